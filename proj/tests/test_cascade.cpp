#include <gtest/gtest.h>

#include <sstream>

#include "ocular/cascade.hpp"
#include "ocular/synth.hpp"
#include "support.hpp"

using namespace ocular;
using namespace ocular::cascade;
using namespace testsupport;

namespace {

// One small cascade shared by the detection tests.
const CascadeModel& face_model() {
  static const CascadeModel model = [] {
    synth::Rng rng(21);
    std::vector<GrayImage> pos, neg;
    for (int i = 0; i < 500; ++i) pos.push_back(synth::face_window(rng));
    for (int i = 0; i < 60; ++i) neg.push_back(synth::background(160, 120, rng));
    TrainParams tp;
    tp.max_stages = 10;
    tp.target_false_positive_rate = 1e-5;
    tp.feature_pool = 1500;
    tp.seed = 3;
    return train_cascade(pos, neg, tp);
  }();
  return model;
}

}  // namespace

TEST(Haar, FeatureCountOfBaseWindow) {
  EXPECT_EQ(enumerate_features().size(), 162336u);
  for (const auto& f : enumerate_features(12)) EXPECT_TRUE(feature_fits(f, 12));
}

TEST(Haar, TwoRectOnStepEdge) {
  GrayImage img(24, 24, 0);
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 12; ++x) img.at(x, y) = 200;
  const HaarFeature f{FeatureKind::two_h, Rect{0, 0, 24, 24}};
  const auto di = make_integrals(img);
  EXPECT_DOUBLE_EQ(haar_raw(di.sum, f, Rect{0, 0, 24, 24}, 1.0), 200.0 * 12 * 24);
  const double sd = pixel_stddev(img, Rect{0, 0, 24, 24});
  EXPECT_NEAR(window_stddev(di, Rect{0, 0, 24, 24}), sd, 1e-9);
  EXPECT_NEAR(haar_eval(di, f, Rect{0, 0, 24, 24}, 1.0), 200.0 * 12 * 24 / (576.0 * sd), 1e-12);
}

TEST(Haar, RandomFeaturesMatchPixelWeights) {
  Rng rng(22);
  const auto all = enumerate_features();
  for (int n = 0; n < 300; ++n) {
    const GrayImage img = random_image(rng, 40, 40);
    const auto& f = all[static_cast<std::size_t>(rand_int(rng, 0, static_cast<int>(all.size()) - 1))];
    const int ox = rand_int(rng, 0, 16), oy = rand_int(rng, 0, 16);
    EXPECT_DOUBLE_EQ(haar_raw(integral_image(img), f, Rect{ox, oy, 24, 24}, 1.0), haar_pixel_oracle(img, f, ox, oy));
  }
}

TEST(Haar, FlatWindowUsesUnitStddevFloor) {
  const auto di = make_integrals(GrayImage(30, 30, 100));
  EXPECT_DOUBLE_EQ(window_stddev(di, Rect{0, 0, 24, 24}), 0.0);
  EXPECT_DOUBLE_EQ(haar_eval(di, HaarFeature{FeatureKind::two_v, Rect{0, 0, 4, 4}}, Rect{0, 0, 24, 24}, 1.0), 0.0);
}

TEST(Boost, SingleThresholdIsLearnedInOneRound) {
  FeatureMatrix x;
  x.values.push_back({0.1, 0.2, 0.3, 0.6, 0.7, 0.9});
  const std::vector<int> labels{1, 1, 1, 0, 0, 0};
  const BoostResult r = adaboost_train(x, labels, 5);
  ASSERT_EQ(r.stumps.size(), 1u);  // zero error stops training
  EXPECT_DOUBLE_EQ(r.stumps[0].threshold, 0.45);
  EXPECT_EQ(r.stumps[0].parity, 1);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(strong_classify(r.stumps, x, i), labels[i]);
}

TEST(Boost, WeightsSumToOneAndTrainingErrorFalls) {
  Rng rng(23);
  FeatureMatrix x;
  x.values.assign(3, {});
  std::vector<int> labels;
  for (int i = 0; i < 120; ++i) {
    const double a = rand_real(rng, 0, 1), b = rand_real(rng, 0, 1), c = rand_real(rng, 0, 1);
    x.values[0].push_back(a), x.values[1].push_back(b), x.values[2].push_back(c);
    labels.push_back(a + b > 1.0 ? 1 : 0);
  }
  auto errors = [&](const BoostResult& r) {
    int e = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) e += strong_classify(r.stumps, x, i) != labels[i];
    return e;
  };
  const BoostResult one = adaboost_train(x, labels, 1);
  const BoostResult many = adaboost_train(x, labels, 40);
  EXPECT_LT(errors(many), errors(one));
  for (double s : many.normalized_weight_sums) EXPECT_EQ(s, 1.0);
  EXPECT_THROW(adaboost_train(x, std::vector<int>(labels.size(), 1), 3), Error);
}

TEST(Rates, ProductsAndExpectedFeatureCount) {
  const CascadeRates r = cascade_rates({{0.5, 0.99, 2, 0.5}, {0.4, 0.98, 10, 0.4}, {0.3, 0.97, 25, 0.3}});
  EXPECT_NEAR(r.F, 0.5 * 0.4 * 0.3, 1e-15);
  EXPECT_NEAR(r.D, 0.99 * 0.98 * 0.97, 1e-15);
  EXPECT_NEAR(r.N, 2 + 10 * 0.5 + 25 * 0.5 * 0.4, 1e-12);
}

TEST(Remap, ScalesAndClamps) {
  EXPECT_EQ(remap_rect(Rect{20, 20, 48, 48}, 5.0, 1000, 1000), (Rect{100, 100, 240, 240}));
  EXPECT_EQ(remap_rect(Rect{20, 20, 48, 24}, 5.0, 1000, 1000).h, 120);
  EXPECT_EQ(remap_rect(Rect{10, 10, 10, 10}, 2.0, 30, 30), (Rect{20, 20, 10, 10}));
}

TEST(Merge, OverlappingHitsAverageIntoOne) {
  const std::vector<Detection> raw{{Rect{10, 10, 24, 24}, 1.0}, {Rect{12, 10, 24, 24}, 2.0}, {Rect{80, 80, 24, 24}, 0.5}};
  const auto merged = merge_detections(raw, 0.3, 1, 200, 200);
  ASSERT_EQ(merged.size(), 2u);
  EXPECT_EQ(merged[0].rect, (Rect{11, 10, 24, 24}));
  EXPECT_DOUBLE_EQ(merged[0].score, 3.0);
  EXPECT_EQ(merge_detections(raw, 0.3, 2, 200, 200).size(), 1u);
}

TEST(Model, SaveLoadRoundTrip) {
  CascadeModel m;
  Stage s;
  s.weak.push_back({HaarFeature{FeatureKind::three_v, Rect{2, 3, 6, 9}}, -0.125, -1, 0.731});
  s.weak.push_back({HaarFeature{FeatureKind::four, Rect{0, 0, 8, 8}}, 0.3333333333333333, 1, 1.25});
  s.threshold = 0.9;
  m.stages.push_back(s);
  std::stringstream ss;
  save_model(ss, m);
  const CascadeModel back = load_model(ss);
  ASSERT_EQ(back.stages.size(), 1u);
  ASSERT_EQ(back.stages[0].weak.size(), 2u);
  EXPECT_EQ(back.stages[0].weak[1].feature, s.weak[1].feature);
  EXPECT_EQ(back.stages[0].weak[1].threshold, s.weak[1].threshold);
  EXPECT_EQ(back.stages[0].weak[0].parity, -1);
  EXPECT_EQ(back.stages[0].threshold, 0.9);
  std::stringstream bad("not a model");
  EXPECT_TRUE(error_code_of([&] { load_model(bad); }).has_value());
}

TEST(Detect, BlankImageHasNoFaces) {
  EXPECT_TRUE(detect_multiscale(GrayImage(160, 120, 128), face_model()).empty());
}

TEST(Detect, PlantedFacesAreFound) {
  synth::Rng rng(24);
  int found = 0;
  for (int i = 0; i < 10; ++i) {
    const auto scene = synth::face_scene(160, 120, 70, synth::random_style(rng), rng);
    const auto roi = detect_downsampled(scene.image, face_model(), 1.0);
    if (roi && iou(roi->face.rect, scene.truth.face) >= 0.5) ++found;
  }
  EXPECT_GE(found, 8);
}

TEST(Detect, DownsampledSearchAgreesWithFullResolution) {
  synth::Rng rng(25);
  const auto scene = synth::face_scene(320, 240, 140, synth::random_style(rng), rng);
  const auto full = detect_downsampled(scene.image, face_model(), 1.0);
  const auto half = detect_downsampled(scene.image, face_model(), 2.0);
  ASSERT_TRUE(full && half);
  EXPECT_GE(iou(full->face.rect, half->face.rect), 0.5);
  EXPECT_EQ(half->roi.y, half->face.rect.y);
  EXPECT_NEAR(half->roi.h, half->face.rect.h / 2.0, 2.0);
}

TEST(Detect, TiltedFaceIsFoundByRotationSearch) {
  // Plain backdrop: the small test cascade should only react to the face.
  synth::Rng rng(26);
  int found = 0;
  for (int i = 0; i < 5; ++i) {
    GrayImage img(160, 160, 110);
    const Rect face{45 + i * 4, 40, 70, 70};
    synth::draw_face(img, face, synth::random_style(rng), rng);
    const GrayImage tilted = affine_rotate(img, 30.0);
    const auto r = detect_with_rotation(tilted, face_model(), 1.0);
    if (r && r->theta == 30.0 && iou(r->found.face.rect, face) >= 0.5) ++found;
  }
  EXPECT_GE(found, 4);
}

TEST(Template, ExactCopyScoresOne) {
  Rng rng(27);
  const GrayImage img = random_image(rng, 60, 40);
  const GrayImage tmpl = crop(img, Rect{30, 10, 15, 10});
  EXPECT_NEAR(ncc(img, tmpl, 30, 10), 1.0, 1e-12);
  GrayImage inv = tmpl;
  for (auto& p : inv.pixels()) p = static_cast<std::uint8_t>(255 - p);
  EXPECT_NEAR(ncc(img, inv, 30, 10), -1.0, 1e-12);
  EXPECT_EQ(ncc(GrayImage(20, 20, 7), tmpl, 0, 0), 0.0);
  EXPECT_THROW(ncc(img, tmpl, 50, 0), Error);
  // Grid stride is 15*(1-0.25) = 11 horizontally; (33, 10) is not on it but (0,0)-origin windows are.
  const auto grid = template_scores(img, tmpl, 0.25);
  EXPECT_EQ(grid[1].rect.x, 11);
  const auto hits = template_match(img, crop(img, Rect{22, 7, 15, 10}), 0.25, 0.99);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].rect, (Rect{22, 7, 15, 10}));
}
