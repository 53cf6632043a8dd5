#include <gtest/gtest.h>

#include <cmath>

#include "ocular/iris.hpp"
#include "ocular/synth.hpp"
#include "support.hpp"

using namespace ocular;
using namespace ocular::iris;
using namespace testsupport;

namespace {

GrayImage dark_disk(int w, int h, double cx, double cy, double r) {
  GrayImage img(w, h, 200);
  synth::fill_disk(img, cx, cy, r, 40);
  return img;
}

BinaryImage ring(int w, int h, int cx, int cy, int r) {
  BinaryImage b(w, h, 0);
  for (const Point& o : circle_offsets(r))
    if (b.contains(cx + o.x, cy + o.y)) b.at(cx + o.x, cy + o.y) = 1;
  return b;
}

// Bright lozenge with right-angle tips at (x0, cy) and (x1, cy) on a darker field.
GrayImage lozenge(int x0, int x1, int cy, double half_height) {
  GrayImage img(120, 60, 90);
  for (int x = x0; x <= x1; ++x) {
    const double h = std::min({half_height, x - x0 + 0.5, x1 - x + 0.5});
    for (int y = 0; y < 60; ++y)
      if (std::abs(y - cy) < h) img.at(x, y) = 220;
  }
  return img;
}

}  // namespace

TEST(Projection, CurvesMatchRowAndColumnStatistics) {
  Rng rng(51);
  const GrayImage img = random_image(rng, 9, 7);
  const ProjectionCurves c = projection_curves(img, 0.6);
  for (int x = 0; x < 9; ++x) {
    double m = 0.0, v = 0.0;
    for (int y = 0; y < 7; ++y) m += img.at(x, y);
    m /= 7.0;
    for (int y = 0; y < 7; ++y) v += (img.at(x, y) - m) * (img.at(x, y) - m);
    v /= 7.0;
    EXPECT_NEAR(c.ipf_v[static_cast<std::size_t>(x)], m, 1e-9);
    EXPECT_NEAR(c.vpf_v[static_cast<std::size_t>(x)], v, 1e-9);
    EXPECT_NEAR(c.gpf_v[static_cast<std::size_t>(x)], 0.4 * m + 0.6 * v, 1e-9);
  }
  const ProjectionCurves ipf = projection_curves(img, 0.0), vpf = projection_curves(img, 1.0);
  EXPECT_EQ(ipf.gpf_h, ipf.ipf_h);
  EXPECT_EQ(vpf.gpf_h, vpf.vpf_h);
  EXPECT_THROW(projection_curves(img, 1.5), Error);
}

TEST(Projection, PeaksRespectSeparation) {
  std::vector<double> c(40, 0.0);
  c[10] = 5, c[12] = 4, c[30] = 3;
  EXPECT_EQ(find_peaks(c, 5), (std::vector<int>{10, 30}));
  EXPECT_EQ(find_peaks(c, 1), (std::vector<int>{10, 12, 30}));
}

TEST(Gpf, DarkDiskCenter) {
  const auto r = gpf_center(dark_disk(80, 50, 40, 25, 12));
  ASSERT_TRUE(r);
  EXPECT_NEAR(r->cx, 40.0, 1.0);
  EXPECT_NEAR(r->cy, 25.0, 1.0);
  EXPECT_FALSE(gpf_center(GrayImage(80, 50, 120)));
}

TEST(Esi, BetaMatchesNeighborhoodOracle) {
  Rng rng(52);
  GrayImage img = random_image(rng, 12, 10);
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y) img.at(x, y) = 0;  // zero-mean corner
  const RealImage beta = esi_beta(img);
  const GrayImage edge = esi_edge_map(img);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 12; ++x) {
      double m = 0.0, q = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) m += img.clamped(x + dx, y + dy);
      m /= 9.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) q += (img.clamped(x + dx, y + dy) - m) * (img.clamped(x + dx, y + dy) - m);
      q /= 9.0;
      const double b = m == 0.0 ? 1.0 : m * m / (m * m + q);
      EXPECT_NEAR(beta.at(x, y), b, 1e-12);
      EXPECT_EQ(edge.at(x, y), std::lround(255.0 * (1.0 - b)));
    }
  EXPECT_EQ(edge.at(0, 0), 0);
}

TEST(Esi, StrongerContrastGivesStrongerEdge) {
  int last = -1;
  for (int dark : {150, 110, 70, 30}) {
    GrayImage img(10, 10, 200);
    for (int y = 0; y < 10; ++y)
      for (int x = 5; x < 10; ++x) img.at(x, y) = static_cast<std::uint8_t>(dark);
    const int e = esi_edge_map(img).at(5, 5);
    EXPECT_GT(e, last);
    last = e;
  }
}

TEST(Glint, OpeningRemovesSmallBrightSpot) {
  GrayImage img = dark_disk(80, 50, 40, 25, 14);
  synth::fill_disk(img, 43, 22, 2.5, 255);
  const GrayImage out = remove_glint(img);
  EXPECT_LE(out.at(43, 22), 45);
  EXPECT_THROW(remove_glint(img, 0), Error);
}

TEST(Canny, KernelsAndVerticalStep) {
  EXPECT_NEAR(gaussian_kernel().sum(), 1.0, 1e-12);
  EXPECT_EQ(sobel_x().at(0, 1), 2.0);
  EXPECT_EQ(sobel_y().at(1, 0), 2.0);
  GrayImage img(30, 20, 30);
  for (int y = 0; y < 20; ++y)
    for (int x = 15; x < 30; ++x) img.at(x, y) = 220;
  const CannyStages s = canny_stages(img, 40, 100);
  for (int y = 3; y < 17; ++y) {
    int count = 0;
    for (int x = 0; x < 30; ++x) count += s.edges.at(x, y);
    EXPECT_EQ(count, 1);
    EXPECT_EQ(s.sector.at(15, y), 0);
  }
  EXPECT_THROW(canny(img, 100, 40), Error);
}

TEST(Canny, DiskOutlineLiesOnTheBoundary) {
  const BinaryImage e = canny(dark_disk(80, 60, 40, 30, 15));
  int n = 0;
  for (int y = 0; y < 60; ++y)
    for (int x = 0; x < 80; ++x)
      if (e.at(x, y)) {
        ++n;
        EXPECT_NEAR(std::hypot(x - 40.0, y - 30.0), 15.0, 1.6);
      }
  EXPECT_GT(n, 60);
}

TEST(Hough, OffsetsAreTheHalfPixelAnnulus) {
  for (int r : {1, 4, 15}) {
    std::size_t expected = 0;
    for (int dy = -r - 1; dy <= r + 1; ++dy)
      for (int dx = -r - 1; dx <= r + 1; ++dx) expected += std::abs(std::hypot(dx, dy) - r) < 0.5;
    const auto offs = circle_offsets(r);
    EXPECT_EQ(offs.size(), expected);
    for (const Point& o : offs) EXPECT_LT(std::abs(std::hypot(o.x, o.y) - r), 0.5);
  }
}

TEST(Hough, RingIsRecoveredExactly) {
  const auto c = hough_circle(ring(80, 60, 37, 29, 15), 8, 25);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->cx, 37);
  EXPECT_EQ(c->cy, 29);
  EXPECT_EQ(c->r, 15);
  EXPECT_EQ(static_cast<std::size_t>(c->votes), circle_offsets(15).size());
  EXPECT_FALSE(hough_circle(BinaryImage(20, 20, 0), 3, 8));
}

TEST(Hough, CenterWindowSelectsTheSmallerCircle) {
  BinaryImage e = ring(120, 60, 30, 30, 20);
  const BinaryImage small = ring(120, 60, 90, 30, 10);
  for (std::size_t i = 0; i < e.size(); ++i) e.pixels()[i] |= small.pixels()[i];
  const auto big = hough_circle(e, 5, 25);
  ASSERT_TRUE(big);
  EXPECT_EQ(big->cx, 30);
  const auto other = hough_circle(e, 5, 25, Rect{70, 10, 40, 40});
  ASSERT_TRUE(other);
  EXPECT_EQ(other->cx, 90);
  EXPECT_EQ(other->r, 10);
}

TEST(IrisCenter, CenteredIrisWithinOnePixel) {
  synth::Rng rng(53);
  const synth::IrisClipStyle style;
  for (double dx : {-20.0, 0.0, 17.5}) {
    const PointF truth{80.0 + dx, 48.0};
    const auto fix = iris_center(synth::iris_eye(style, truth, rng));
    ASSERT_TRUE(fix);
    EXPECT_NEAR(fix->cx, truth.x, 1.0);
    EXPECT_NEAR(fix->cy, truth.y, 1.0);
    EXPECT_NEAR(fix->r, style.iris_radius, 2.0);
  }
}

TEST(IrisCenter, IrisInTheCanthus) {
  synth::Rng rng(54);
  const synth::IrisClipStyle style;
  const PointF truth{synth::almond_left(style) + 22.0, 48.0};
  const auto fix = iris_center(synth::iris_eye(style, truth, rng));
  ASSERT_TRUE(fix);
  EXPECT_NEAR(fix->cx, truth.x, 3.0);
  EXPECT_NEAR(fix->cy, truth.y, 3.0);
}

TEST(IrisCenter, NoiseHasNoIris) {
  Rng rng(55);
  EXPECT_FALSE(iris_center(random_image(rng, 160, 96)));
  EXPECT_FALSE(iris_center(GrayImage(160, 96, 128)));
}

TEST(Corners, LozengeTips) {
  const GrayImage img = lozenge(15, 105, 30, 14.0);
  const auto c = eye_corners(img);
  ASSERT_TRUE(c);
  EXPECT_NEAR(c->nasal.x, 15.0, 2.0);
  EXPECT_NEAR(c->nasal.y, 30.0, 2.0);
  EXPECT_NEAR(c->temporal.x, 105.0, 2.0);
  EXPECT_NEAR(c->temporal.y, 30.0, 2.0);
  EXPECT_NEAR(c->eye_width, 90.0, 4.0);

  const GrayImage blurred = normalize_to_gray(convolve_real(img, gaussian_kernel()));
  const auto b = eye_corners(blurred);
  ASSERT_TRUE(b);
  EXPECT_NEAR(b->nasal.x, 15.0, 3.0);
  EXPECT_NEAR(b->temporal.x, 105.0, 3.0);
  EXPECT_FALSE(eye_corners(GrayImage(120, 60, 90)));
  EXPECT_THROW(eye_corners(GrayImage(8, 8)), Error);
}

TEST(Saccade, LinearRampByHand) {
  std::vector<double> theta(40, 0.1);
  for (int k = 10; k <= 20; ++k) theta[static_cast<std::size_t>(k)] = 0.1 + 0.05 * (k - 10);
  for (int k = 21; k < 40; ++k) theta[static_cast<std::size_t>(k)] = 0.6;
  const auto recs = saccade_params(theta, 30.0);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].onset, 10);
  EXPECT_EQ(recs[0].offset, 20);
  EXPECT_NEAR(recs[0].amplitude, 0.5, 1e-12);
  EXPECT_NEAR(recs[0].peak_velocity, 1.5, 1e-9);
  EXPECT_NEAR(recs[0].duration, 10.0 / 30.0, 1e-12);
  EXPECT_NEAR(recs[0].sr, 4.5, 1e-9);
  EXPECT_TRUE(saccade_params(std::vector<double>(10, 0.3), 30.0).empty());
  EXPECT_THROW(saccade_params(theta, 0.0), Error);
}

TEST(Saccade, PercentError) {
  EXPECT_DOUBLE_EQ(percent_error(200.0, 190.0), 5.0);
  EXPECT_DOUBLE_EQ(percent_error(200.0, 210.0), -5.0);
  EXPECT_EQ(error_code_of([] { percent_error(0.0, 1.0); }), ErrorCode::domain);
}
