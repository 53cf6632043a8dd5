#include <gtest/gtest.h>

#include <sstream>

#include "ocular/eyestate.hpp"
#include "ocular/synth.hpp"
#include "support.hpp"

using namespace ocular;
using namespace ocular::eyestate;
using namespace testsupport;

namespace {

// Independent LBP: compare in the clockwise order written out by hand.
int lbp_oracle(const GrayImage& img, int x, int y) {
  const int c = img.clamped(x, y);
  const int ring[8] = {img.clamped(x - 1, y - 1), img.clamped(x, y - 1),     img.clamped(x + 1, y - 1),
                       img.clamped(x + 1, y),     img.clamped(x + 1, y + 1), img.clamped(x, y + 1),
                       img.clamped(x - 1, y + 1), img.clamped(x - 1, y)};
  int code = 0;
  for (int n = 0; n < 8; ++n)
    if (ring[n] >= c) code += 1 << n;
  return code;
}

SvmParams params(KernelKind kind, int degree, double c = 10.0) {
  SvmParams p;
  p.kernel.kind = kind;
  p.kernel.degree = degree;
  p.C = c;
  return p;
}

}  // namespace

TEST(Lbp, TopLeftAndLeftNeighborsGive129) {
  EXPECT_EQ(lbp_code({200, 10, 10, 200, 100, 10, 10, 10, 10}), 129);
  EXPECT_EQ(lbp_code({5, 5, 5, 5, 5, 5, 5, 5, 5}), 255);
}

TEST(Lbp, ImageMatchesOracle) {
  Rng rng(41);
  const GrayImage img = random_image(rng, 17, 13);
  const GrayImage codes = lbp_image(img);
  for (int y = 0; y < 13; ++y)
    for (int x = 0; x < 17; ++x) EXPECT_EQ(codes.at(x, y), lbp_oracle(img, x, y));
}

TEST(Lbp, DescriptorIsInvariantToBrightnessShift) {
  Rng rng(42);
  const GrayImage eye = random_image(rng, 50, 40, 20, 200);
  GrayImage brighter = eye;
  for (auto& p : brighter.pixels()) p = static_cast<std::uint8_t>(p + 40);
  const auto a = block_lbp(eye);
  EXPECT_EQ(a.size(), kDescriptorLength);
  EXPECT_EQ(a, block_lbp(brighter));
  // Every block histogram counts its 20 pixels.
  for (std::size_t b = 0; b < 100; ++b) {
    double s = 0.0;
    for (int k = 0; k < kBins; ++k) s += a[b * kBins + static_cast<std::size_t>(k)];
    EXPECT_EQ(s, 20.0);
  }
  // A flat eye puts every pixel into the top bin.
  const auto flat = block_lbp(GrayImage(50, 40, 90));
  EXPECT_EQ(flat[15], 20.0);
}

TEST(Svm, HardMarginLineIsTheMidpoint) {
  const std::vector<std::vector<double>> x{{-2}, {-1}, {1}, {2}};
  const std::vector<int> y{-1, -1, 1, 1};
  const KernelClassifier c = train_svm(x, y, params(KernelKind::linear, 1, 1e3));
  EXPECT_NEAR(c.decision({0.0}), 0.0, 1e-3);
  EXPECT_NEAR(c.decision({1.0}), 1.0, 1e-3);
  EXPECT_NEAR(c.decision({-0.5}), -0.5, 1e-3);
}

TEST(Svm, DuplicatingAnInteriorSampleChangesNothing) {
  std::vector<std::vector<double>> x{{-2}, {-1}, {1}, {2}, {5}};
  std::vector<int> y{-1, -1, 1, 1, 1};
  const KernelClassifier a = train_svm(x, y, params(KernelKind::linear, 1, 1e3));
  x.push_back({5}), y.push_back(1);
  const KernelClassifier b = train_svm(x, y, params(KernelKind::linear, 1, 1e3));
  for (double t : {-3.0, -0.3, 0.2, 4.0}) EXPECT_NEAR(a.decision({t}), b.decision({t}), 1e-3);
}

TEST(Svm, XorNeedsTheQuadraticKernel) {
  const std::vector<std::vector<double>> x{{1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
  const std::vector<int> y{1, 1, -1, -1};
  auto correct = [&](const KernelClassifier& c) {
    int n = 0;
    for (std::size_t i = 0; i < 4; ++i) n += (c.decision(x[i]) > 0) == (y[i] > 0);
    return n;
  };
  EXPECT_LT(correct(train_svm(x, y, params(KernelKind::linear, 1))), 4);
  EXPECT_EQ(correct(train_svm(x, y, params(KernelKind::poly, 2))), 4);
  EXPECT_THROW(train_svm(x, {1, 1, 1, 1}, params(KernelKind::poly, 2)), Error);
}

TEST(Classifier, SyntheticEyesAreSeparated) {
  synth::Rng rng(43);
  std::vector<std::vector<double>> windows;
  std::vector<EyeState> labels;
  for (int i = 0; i < 300; ++i) {
    const EyeState s = i % 2 ? EyeState::closed : EyeState::open;
    windows.push_back(subspace::window_vector(synth::eye_patch(s, rng), 50, 40));
    labels.push_back(s);
  }
  subspace::SubspaceModel m = subspace::pca_train(windows, 15);
  m.window_w = 50, m.window_h = 40;
  std::vector<std::vector<double>> feats;
  for (const auto& w : windows) feats.push_back(subspace::project(m, w));
  const KernelClassifier clf = classifier_train(feats, labels);
  int right = 0;
  for (int i = 0; i < 100; ++i) {
    const EyeState s = i % 2 ? EyeState::closed : EyeState::open;
    right += eye_state(synth::eye_patch(s, rng), m, clf).state == s;
  }
  EXPECT_GE(right, 90);
  EXPECT_THROW(classifier_train(feats, std::vector<EyeState>(feats.size(), EyeState::unknown)), Error);
}

TEST(Classifier, SaveLoadRoundTrip) {
  const std::vector<std::vector<double>> x{{0.1, 2}, {-1, 0.5}, {1, -1}, {-0.5, 1}};
  const KernelClassifier c = train_svm(x, {1, 1, -1, -1}, params(KernelKind::poly, 3));
  std::stringstream ss;
  save_classifier(ss, c);
  const KernelClassifier back = load_classifier(ss);
  for (const auto& v : x) EXPECT_EQ(back.decision(v), c.decision(v));
  std::stringstream bad("svm poly");
  EXPECT_THROW(load_classifier(bad), Error);
}

TEST(Perclos, PercentAndErrors) {
  EXPECT_NEAR(perclos_percent(600, 1800), 100.0 / 3.0, 1e-12);
  EXPECT_EQ(error_code_of([] { perclos_percent(0, 0); }), ErrorCode::domain);
  EXPECT_EQ(error_code_of([] { perclos_percent(5, 4); }), ErrorCode::parameter);
}

TEST(Perclos, SlidingWindowsCountByHand) {
  // 10 fps, 3 s windows every 1 s: frames 0..49, closed where i % 5 == 0, unknown at 7.
  std::vector<EyeState> s(50, EyeState::open);
  for (std::size_t i = 0; i < 50; i += 5) s[i] = EyeState::closed;
  s[7] = EyeState::unknown;
  const auto rows = perclos(s, PerclosParams{10.0, 3.0, 1.0});
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_TRUE(rows[0].warmup);
  EXPECT_EQ(rows[0].known, 9u);
  EXPECT_EQ(rows[0].closed, 2u);
  EXPECT_FALSE(rows[2].warmup);
  EXPECT_EQ(rows[2].start_frame, 0u);
  EXPECT_EQ(rows[2].known, 29u);
  EXPECT_EQ(rows[3].start_frame, 10u);
  EXPECT_EQ(rows[3].end_frame, 40u);
  EXPECT_NEAR(*rows[3].percent, 20.0, 1e-12);
  const auto blind = perclos(std::vector<EyeState>(20, EyeState::unknown), PerclosParams{10.0, 1.0, 1.0});
  EXPECT_FALSE(blind[0].percent.has_value());
  EXPECT_THROW(perclos(s, PerclosParams{10.0, 1.0, 2.0}), Error);
}
