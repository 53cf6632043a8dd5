#pragma once

// Haar-like features, boosted stumps, attentional cascades, the multi-scale
// scan with its downsample/ROI-remap front end, rotation search and
// normalized-correlation template matching.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ocular/imgcore.hpp"

namespace ocular::cascade {

inline constexpr int kBaseWindow = 24;

enum class FeatureKind { two_h, two_v, three_h, three_v, four };

const char* to_string(FeatureKind k);
FeatureKind feature_kind_from_string(const std::string& s);

/// base is expressed in the 24x24 window frame. Its width/height must be
/// divisible by the kind's column/row count.
struct HaarFeature {
  FeatureKind kind = FeatureKind::two_h;
  Rect base;
  friend bool operator==(const HaarFeature&, const HaarFeature&) = default;
};

struct WeightedRect {
  Rect rect;
  double weight = 0.0;
};

/// Cell grid of each kind as (columns, rows).
std::pair<int, int> feature_grid(FeatureKind k);

bool feature_fits(const HaarFeature& f, int window = kBaseWindow);

/// Every valid feature of the five kinds inside a window x window frame.
std::vector<HaarFeature> enumerate_features(int window = kBaseWindow);

/// Sub-rectangles of the feature scaled by `scale` and placed at (ox, oy):
/// origin and cell sizes are floored after scaling.
std::vector<WeightedRect> feature_rects(const HaarFeature& f, int ox, int oy, double scale);

struct DetectionIntegrals {
  IntegralImage sum;
  IntegralImage sq;
};

DetectionIntegrals make_integrals(const GrayImage& img);

/// Side of the square scan window at a given scale: floor(24 * scale).
int window_side(double scale);

/// Weighted rectangle sum of the scaled feature, before any normalization.
double haar_raw(const IntegralImage& ii, const HaarFeature& f, const Rect& window, double scale);

/// Population standard deviation of the intensities inside window.
double window_stddev(const DetectionIntegrals& di, const Rect& window);

/// haar_raw / (window area * max(stddev, 1)).
double haar_eval(const DetectionIntegrals& di, const HaarFeature& f, const Rect& window, double scale);

struct WeakClassifier {
  HaarFeature feature;
  double threshold = 0.0;
  int parity = 1;  // +1 or -1
  double alpha = 0.0;

  /// 1 iff parity * value < parity * threshold.
  int vote(double value) const { return parity * value < parity * threshold ? 1 : 0; }
};

struct Stage {
  std::vector<WeakClassifier> weak;
  double threshold = 0.0;

  double alpha_sum() const;
  /// Weighted vote of the stage on one window.
  double score(const DetectionIntegrals& di, const Rect& window, double scale) const;
};

struct CascadeModel {
  int window = kBaseWindow;
  double scale_step = 1.25;
  int scale_count = 11;
  std::vector<Stage> stages;
};

/// Runs the stages in order. Returns the summed normalized margin
/// sum(1 + (score - threshold) / alpha_sum) when every stage passes.
std::optional<double> classify_window(const CascadeModel& model, const DetectionIntegrals& di,
                                      const Rect& window, double scale);

void save_model(std::ostream& out, const CascadeModel& model);
void save_model(const std::string& path, const CascadeModel& model);
CascadeModel load_model(std::istream& in);
CascadeModel load_model(const std::string& path);

// ---------------------------------------------------------------------------
// Boosting

/// Feature responses laid out per feature: values[f][i] is feature f on sample i.
struct FeatureMatrix {
  std::vector<std::vector<double>> values;
  std::size_t feature_count() const { return values.size(); }
  std::size_t sample_count() const { return values.empty() ? 0 : values.front().size(); }
};

struct Stump {
  std::size_t feature = 0;
  double threshold = 0.0;
  int parity = 1;
  double alpha = 0.0;
  double error = 0.0;  // weighted error at selection time

  int vote(double value) const { return parity * value < parity * threshold ? 1 : 0; }
};

struct BoostResult {
  std::vector<Stump> stumps;
  /// Sum of the sample weights right after each round's normalization.
  std::vector<double> normalized_weight_sums;
};

/// Discrete boosting of threshold stumps. Initial weights 1/2m for the m
/// negatives and 1/2l for the l positives; each round normalizes, picks the
/// stump of least weighted error over midpoint thresholds, and multiplies the
/// weights of correctly classified samples by beta = eps/(1-eps). Training
/// stops early when no stump reaches eps < 0.5 or after a zero-error round.
BoostResult adaboost_train(const FeatureMatrix& x, const std::vector<int>& labels, int rounds);

/// Strong classifier: 1 iff sum(alpha * h) >= threshold. The default
/// threshold is half the alpha sum.
double strong_score(const std::vector<Stump>& stumps, const FeatureMatrix& x, std::size_t sample);
int strong_classify(const std::vector<Stump>& stumps, const FeatureMatrix& x, std::size_t sample,
                    std::optional<double> threshold = std::nullopt);

struct StageRate {
  double f = 1.0;  // false positive rate
  double d = 1.0;  // detection rate
  double n = 0.0;  // features evaluated in the stage
  double p = 1.0;  // fraction of windows passed on to the next stage
};

struct CascadeRates {
  double F = 1.0;
  double D = 1.0;
  double N = 0.0;
};

/// F = prod f_i, D = prod d_i, N = n_0 + sum_{i>=1} n_i * prod_{j<i} p_j.
CascadeRates cascade_rates(const std::vector<StageRate>& stages);

struct TrainParams {
  int max_stages = 6;
  int max_rounds_per_stage = 30;
  double stage_detection_rate = 0.995;
  double stage_false_positive_rate = 0.4;
  double target_false_positive_rate = 1e-3;
  std::size_t feature_pool = 2000;
  std::size_t negatives_per_stage = 400;
  std::uint64_t seed = 1;
};

struct TrainReport {
  std::vector<double> stage_detection;
  std::vector<double> stage_false_positive;
  std::vector<std::size_t> stage_rounds;
};

/// Trains a cascade on 24x24 positive windows, drawing negative windows from
/// face-free images; later stages are fed only windows that the current
/// cascade still accepts.
CascadeModel train_cascade(const std::vector<GrayImage>& positives,
                           const std::vector<GrayImage>& negative_sources, const TrainParams& params,
                           TrainReport* report = nullptr);

/// Deterministic subsample of a feature pool: partial Fisher-Yates driven by
/// raw mt19937_64 outputs.
std::vector<HaarFeature> sample_features(const std::vector<HaarFeature>& pool, std::size_t count,
                                         std::uint64_t seed);

// ---------------------------------------------------------------------------
// Detection

struct Detection {
  Rect rect;
  double score = 0.0;
  friend bool operator==(const Detection&, const Detection&) = default;
};

struct ScanParams {
  double step = 2.0;         // base stride in pixels, scaled with the window
  double merge_iou = 0.3;
  int min_neighbors = 1;     // raw windows a merged detection needs
};

/// Scans scale 1.25^s for s = 0..10 (skipping windows larger than the image)
/// in (scale, y, x) order and merges overlapping hits.
std::vector<Detection> detect_multiscale(const GrayImage& img, const CascadeModel& model,
                                         const ScanParams& params = {});

/// Groups detections whose IoU exceeds the threshold (transitively) and
/// averages the corners of each group. Groups are emitted in order of their
/// first member; the score of a group is the sum of its members' scores.
std::vector<Detection> merge_detections(const std::vector<Detection>& raw, double iou_threshold,
                                        int min_neighbors, int width, int height);

struct FaceRoi {
  Detection face;  // original-frame coordinates
  Rect roi;        // upper half of the face, original-frame coordinates
};

/// Detects on the image downsampled by sf and maps the best face and its
/// upper-half ROI back by multiplying coordinates by sf.
std::optional<FaceRoi> detect_downsampled(const GrayImage& img, const CascadeModel& model, double sf,
                                          const ScanParams& params = {});

/// Maps a rectangle found in an image downsampled by sf back to the original
/// frame (coordinates times sf, rounded, clamped to width x height).
Rect remap_rect(const Rect& r, double sf, int width, int height);

struct RotatedFaceRoi {
  FaceRoi found;       // in the de-rotated frame
  double theta = 0.0;  // tilt that was undone
};

inline constexpr double kRotationAttempts[] = {0.0, 30.0, -30.0, 45.0, -45.0};

/// Tries each tilt in kRotationAttempts: the image is turned by -theta and
/// searched; the first success wins.
std::optional<RotatedFaceRoi> detect_with_rotation(const GrayImage& img, const CascadeModel& model,
                                                   double sf, const ScanParams& params = {});

// ---------------------------------------------------------------------------
// Template matching

/// Normalized correlation coefficient of the window at (x, y) against tmpl.
/// A zero-variance window or template yields 0.
double ncc(const GrayImage& img, const GrayImage& tmpl, int x, int y);

struct TemplateMatch {
  Rect rect;
  double gamma = 0.0;
};

/// gamma at every window of the overlap grid: stride floor(size * (1 - overlap)), at least 1.
std::vector<TemplateMatch> template_scores(const GrayImage& img, const GrayImage& tmpl,
                                           double overlap = 0.25);

/// Windows of the grid with gamma >= min_gamma.
std::vector<TemplateMatch> template_match(const GrayImage& img, const GrayImage& tmpl,
                                          double overlap = 0.25, double min_gamma = 0.8);

}  // namespace ocular::cascade
