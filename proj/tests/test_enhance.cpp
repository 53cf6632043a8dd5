#include <gtest/gtest.h>

#include "ocular/enhance.hpp"
#include "support.hpp"

using namespace ocular;
using namespace ocular::enhance;
using namespace testsupport;

namespace {

GrayImage two_level(int a, int b) {
  GrayImage img(8, 8, static_cast<std::uint8_t>(a));
  for (int y = 4; y < 8; ++y)
    for (int x = 0; x < 8; ++x) img.at(x, y) = static_cast<std::uint8_t>(b);
  return img;
}

}  // namespace

TEST(HistEqualize, TwoLevels) {
  const GrayImage out = hist_equalize(two_level(50, 200));
  EXPECT_EQ(out.at(0, 0), 127);
  EXPECT_EQ(out.at(0, 7), 255);
  EXPECT_THROW(hist_equalize(out, 10, 10), Error);
}

TEST(HistEqualize, MatchesCdfFormulaAndIsMonotone) {
  Rng rng(10);
  for (int n = 0; n < 20; ++n) {
    const GrayImage img = random_image(rng, 23, 17, rand_int(rng, 0, 80), rand_int(rng, 120, 255));
    const int lo = rand_int(rng, 0, 100), hi = rand_int(rng, 150, 255);
    const GrayImage out = hist_equalize(img, lo, hi);
    for (std::size_t i = 0; i < img.size(); ++i) {
      std::uint64_t below = 0;
      for (auto q : img.pixels()) below += q <= img.pixels()[i];
      EXPECT_EQ(out.pixels()[i], lo + (hi - lo) * below / img.size());
      for (std::size_t j = 0; j < img.size(); j += 37)
        if (img.pixels()[j] < img.pixels()[i]) EXPECT_LE(out.pixels()[j], out.pixels()[i]);
    }
  }
}

TEST(Bhe, ConstantImageUnchanged) {
  const GrayImage flat(10, 10, 93);
  EXPECT_EQ(bhe(flat), flat);
}

TEST(Bhe, HalvesStayOnTheirSideOfTheMean) {
  Rng rng(11);
  for (int n = 0; n < 20; ++n) {
    const GrayImage img = natural_image(rng, 48, 40, rand_real(rng, 60, 190), rand_real(rng, 10, 40));
    const int split = static_cast<int>(mean_of(img));
    const GrayImage out = bhe(img);
    int lo = 255, hi = 0;
    for (auto p : img.pixels()) lo = std::min<int>(lo, p), hi = std::max<int>(hi, p);
    for (std::size_t i = 0; i < img.size(); ++i) {
      const int in = img.pixels()[i], o = out.pixels()[i];
      if (in <= split) {
        EXPECT_GE(o, lo);
        EXPECT_LE(o, split);
      } else {
        EXPECT_GT(o, split);
        EXPECT_LE(o, hi);
      }
    }
  }
}

TEST(Bhe, SymmetricHistogramKeepsMean) {
  // Uniform over the full range: each half maps onto itself.
  GrayImage img(256, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 256; ++x) img.at(x, y) = static_cast<std::uint8_t>(x);
  EXPECT_NEAR(mean_of(bhe(img)), mean_of(img), 1.0);
}

TEST(Clahe, RaisesLocalContrastOfDimImage) {
  Rng rng(12);
  const GrayImage img = natural_image(rng, 128, 128, 60, 6);
  const Rect all{0, 0, 128, 128};
  const double before = pixel_stddev(img, all);
  const double clipped = pixel_stddev(clahe(img, ClaheParams{32, 3.0}), all);
  const double unclipped = pixel_stddev(clahe(img, ClaheParams{32, std::numeric_limits<double>::infinity()}), all);
  EXPECT_GT(clipped, before);
  EXPECT_GT(unclipped, clipped);
  EXPECT_GT(unclipped, 4.0 * before);
  EXPECT_THROW(clahe(img, ClaheParams{4, 3.0}), Error);
  EXPECT_THROW(clahe(img, ClaheParams{32, 0.5}), Error);
}

TEST(Clahe, PreservesOrderWithinOneTile) {
  Rng rng(13);
  const GrayImage img = random_image(rng, 16, 16);
  const GrayImage out = clahe(img, ClaheParams{16, std::numeric_limits<double>::infinity()});
  for (std::size_t i = 0; i < img.size(); ++i)
    for (std::size_t j = 0; j < img.size(); ++j)
      if (img.pixels()[i] < img.pixels()[j]) ASSERT_LE(out.pixels()[i], out.pixels()[j]);
}

TEST(Otsu, TwoLevelsSplitJustAboveTheLowerLevel) {
  const OtsuResult r = otsu(two_level(50, 200));
  EXPECT_EQ(r.threshold, 51);
  EXPECT_EQ(r.binary.at(0, 0), 0);
  EXPECT_EQ(r.binary.at(0, 7), 1);
  Histogram256 single{};
  single[77] = 10;
  EXPECT_EQ(otsu_threshold(single), 77);
}

TEST(Otsu, MaximizesBetweenClassVarianceExhaustively) {
  Rng rng(14);
  for (int n = 0; n < 30; ++n) {
    const GrayImage img = random_image(rng, 12, 9, rand_int(rng, 0, 100), rand_int(rng, 101, 255));
    const Histogram256 h = histogram(img);
    const int t = otsu_threshold(h);
    auto between = [&](int thr) {
      long double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
      for (int v = 0; v < 256; ++v) (v < thr ? n0 : n1) += h[v], (v < thr ? s0 : s1) += static_cast<long double>(h[v]) * v;
      if (n0 == 0 || n1 == 0) return -1.0L;
      const long double d = s0 / n0 - s1 / n1;
      return n0 * n1 * d * d;
    };
    const long double best = between(t);
    for (int thr = 0; thr < 256; ++thr) EXPECT_LE(between(thr), best * (1 + 1e-12L));
  }
}
