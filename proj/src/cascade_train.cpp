#include <cmath>
#include <numeric>
#include <random>

#include "ocular/cascade.hpp"

namespace ocular::cascade {

namespace {

constexpr double kMinError = 1e-10;

// Incremental form of the boosting loop so the cascade trainer can add
// rounds until a stage meets its false-positive target.
class Booster {
 public:
  Booster(const FeatureMatrix& x, const std::vector<int>& labels) : x_(x), labels_(labels) {
    const std::size_t m = x.sample_count();
    if (x.feature_count() == 0 || m == 0) throw Error(ErrorCode::input, "boosting needs features and samples");
    if (labels.size() != m) throw Error(ErrorCode::input, "label count does not match sample count");
    std::size_t pos = 0, neg = 0;
    for (int l : labels) {
      if (l == 1) ++pos;
      else if (l == 0) ++neg;
      else throw Error(ErrorCode::input, "labels must be 0 or 1");
    }
    if (pos == 0 || neg == 0) throw Error(ErrorCode::input, "boosting needs both classes");
    weights_.resize(m);
    for (std::size_t i = 0; i < m; ++i) weights_[i] = labels[i] ? 0.5 / pos : 0.5 / neg;
    order_.resize(x.feature_count());
    for (std::size_t f = 0; f < x.feature_count(); ++f) {
      if (x.values[f].size() != m) throw Error(ErrorCode::input, "ragged feature matrix");
      auto& o = order_[f];
      o.resize(m);
      std::iota(o.begin(), o.end(), 0);
      std::stable_sort(o.begin(), o.end(),
                       [&](std::size_t a, std::size_t b) { return x.values[f][a] < x.values[f][b]; });
    }
  }

  /// One round; nullopt when no stump beats chance.
  std::optional<Stump> step(double* normalized_sum) {
    double total = 0.0;
    for (double w : weights_) total += w;
    for (double& w : weights_) w /= total;
    // Fold the rounding residue into the last weight so the running sum is exactly one.
    double head = 0.0;
    for (std::size_t i = 0; i + 1 < weights_.size(); ++i) head += weights_[i];
    if (!weights_.empty() && head <= 1.0) weights_.back() = 1.0 - head;
    if (normalized_sum) {
      double s = 0.0;
      for (double w : weights_) s += w;
      *normalized_sum = s;
    }

    const std::size_t m = weights_.size();
    std::vector<double> pos_right(m + 1), neg_right(m + 1);
    bool found = false;
    Stump best;
    best.error = 0.5;
    for (std::size_t f = 0; f < order_.size(); ++f) {
      const auto& o = order_[f];
      const auto& v = x_.values[f];
      pos_right[m] = neg_right[m] = 0.0;
      for (std::size_t k = m; k-- > 0;) {
        const double w = weights_[o[k]];
        pos_right[k] = pos_right[k + 1] + (labels_[o[k]] ? w : 0.0);
        neg_right[k] = neg_right[k + 1] + (labels_[o[k]] ? 0.0 : w);
      }
      double pos_left = 0.0, neg_left = 0.0;
      for (std::size_t k = 1; k < m; ++k) {
        const double w = weights_[o[k - 1]];
        (labels_[o[k - 1]] ? pos_left : neg_left) += w;
        if (v[o[k - 1]] == v[o[k]]) continue;
        const double theta = 0.5 * (v[o[k - 1]] + v[o[k]]);
        // parity +1 predicts 1 below theta, parity -1 predicts 1 above it.
        const double err_plus = neg_left + pos_right[k];
        const double err_minus = pos_left + neg_right[k];
        if (err_plus < best.error) {
          best = {f, theta, 1, 0.0, err_plus};
          found = true;
        }
        if (err_minus < best.error) {
          best = {f, theta, -1, 0.0, err_minus};
          found = true;
        }
      }
    }
    if (!found) return std::nullopt;

    const double eps = std::max(best.error, kMinError);
    const double beta = eps / (1.0 - eps);
    best.alpha = std::log(1.0 / beta);
    const auto& v = x_.values[best.feature];
    for (std::size_t i = 0; i < m; ++i)
      if (best.vote(v[i]) == labels_[i]) weights_[i] *= beta;
    return best;
  }

 private:
  const FeatureMatrix& x_;
  const std::vector<int>& labels_;
  std::vector<double> weights_;
  std::vector<std::vector<std::size_t>> order_;
};

}  // namespace

BoostResult adaboost_train(const FeatureMatrix& x, const std::vector<int>& labels, int rounds) {
  if (rounds < 1) throw Error(ErrorCode::parameter, "boosting needs at least one round");
  Booster booster(x, labels);
  BoostResult result;
  for (int t = 0; t < rounds; ++t) {
    double sum = 0.0;
    auto stump = booster.step(&sum);
    result.normalized_weight_sums.push_back(sum);
    if (!stump) break;
    result.stumps.push_back(*stump);
    if (stump->error == 0.0) break;
  }
  return result;
}

double strong_score(const std::vector<Stump>& stumps, const FeatureMatrix& x, std::size_t sample) {
  double s = 0.0;
  for (const auto& st : stumps) s += st.alpha * st.vote(x.values[st.feature][sample]);
  return s;
}

int strong_classify(const std::vector<Stump>& stumps, const FeatureMatrix& x, std::size_t sample,
                    std::optional<double> threshold) {
  double half = 0.0;
  for (const auto& st : stumps) half += st.alpha;
  half *= 0.5;
  return strong_score(stumps, x, sample) >= threshold.value_or(half) ? 1 : 0;
}

CascadeRates cascade_rates(const std::vector<StageRate>& stages) {
  CascadeRates r;
  double reach = 1.0;  // fraction of windows that get to stage i
  for (const auto& s : stages) {
    for (double v : {s.f, s.d, s.p})
      if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::parameter, "stage rates must lie in [0, 1]");
    if (s.n < 0.0) throw Error(ErrorCode::parameter, "feature count must be non-negative");
    r.F *= s.f;
    r.D *= s.d;
    r.N += s.n * reach;
    reach *= s.p;
  }
  return r;
}

std::vector<HaarFeature> sample_features(const std::vector<HaarFeature>& pool, std::size_t count,
                                         std::uint64_t seed) {
  if (count >= pool.size()) return pool;
  std::vector<std::size_t> idx(pool.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  std::vector<HaarFeature> out;
  out.reserve(count);
  for (auto i : idx) out.push_back(pool[i]);
  return out;
}

namespace {

struct NegativeWindow {
  std::size_t source = 0;
  Rect rect;
  double scale = 1.0;
};

}  // namespace

CascadeModel train_cascade(const std::vector<GrayImage>& positives,
                           const std::vector<GrayImage>& negative_sources, const TrainParams& params,
                           TrainReport* report) {
  if (positives.empty()) throw Error(ErrorCode::input, "cascade training needs positive windows");
  if (negative_sources.empty()) throw Error(ErrorCode::input, "cascade training needs negative images");
  for (const auto& p : positives)
    if (p.width() != kBaseWindow || p.height() != kBaseWindow)
      throw Error(ErrorCode::size, "positive windows must be 24x24");
  for (const auto& n : negative_sources)
    if (n.width() < kBaseWindow || n.height() < kBaseWindow)
      throw Error(ErrorCode::size, "negative images must be at least 24x24");

  const auto features = sample_features(enumerate_features(kBaseWindow), params.feature_pool, params.seed);
  const Rect base{0, 0, kBaseWindow, kBaseWindow};

  std::vector<std::vector<double>> pos_values(features.size(), std::vector<double>(positives.size()));
  for (std::size_t i = 0; i < positives.size(); ++i) {
    const auto di = make_integrals(positives[i]);
    for (std::size_t f = 0; f < features.size(); ++f) pos_values[f][i] = haar_eval(di, features[f], base, 1.0);
  }

  std::vector<DetectionIntegrals> neg_integrals;
  for (const auto& n : negative_sources) neg_integrals.push_back(make_integrals(n));

  CascadeModel model;
  std::mt19937_64 rng(params.seed ^ 0x9e3779b97f4a7c15ULL);
  double overall_fp = 1.0;

  for (int stage_index = 0; stage_index < params.max_stages; ++stage_index) {
    if (overall_fp <= params.target_false_positive_rate) break;

    // Harvest negatives that the current cascade still accepts.
    std::vector<NegativeWindow> negs;
    const std::size_t max_attempts = params.negatives_per_stage * 500;
    for (std::size_t a = 0; a < max_attempts && negs.size() < params.negatives_per_stage; ++a) {
      NegativeWindow nw;
      nw.source = static_cast<std::size_t>(rng() % negative_sources.size());
      const GrayImage& src = negative_sources[nw.source];
      std::vector<double> scales;
      for (double s = 1.0; window_side(s) <= std::min(src.width(), src.height()) &&
                           scales.size() < static_cast<std::size_t>(model.scale_count);
           s *= model.scale_step)
        scales.push_back(s);
      nw.scale = scales[rng() % scales.size()];
      const int side = window_side(nw.scale);
      nw.rect = Rect{static_cast<int>(rng() % static_cast<std::uint64_t>(src.width() - side + 1)),
                     static_cast<int>(rng() % static_cast<std::uint64_t>(src.height() - side + 1)), side, side};
      if (model.stages.empty() || classify_window(model, neg_integrals[nw.source], nw.rect, nw.scale))
        negs.push_back(nw);
    }
    if (negs.empty()) break;

    FeatureMatrix x;
    x.values.resize(features.size());
    std::vector<int> labels(positives.size(), 1);
    labels.resize(positives.size() + negs.size(), 0);
    for (std::size_t f = 0; f < features.size(); ++f) {
      auto& row = x.values[f];
      row = pos_values[f];
      row.reserve(labels.size());
      for (const auto& nw : negs) row.push_back(haar_eval(neg_integrals[nw.source], features[f], nw.rect, nw.scale));
    }

    Booster booster(x, labels);
    std::vector<Stump> stumps;
    double threshold = 0.0, stage_d = 0.0, stage_f = 1.0;
    for (int round = 0; round < params.max_rounds_per_stage; ++round) {
      auto st = booster.step(nullptr);
      if (!st) break;
      stumps.push_back(*st);

      std::vector<double> pos_scores(positives.size());
      for (std::size_t i = 0; i < positives.size(); ++i) pos_scores[i] = strong_score(stumps, x, i);
      std::vector<double> sorted = pos_scores;
      std::sort(sorted.begin(), sorted.end());
      const auto allowed_misses = static_cast<std::size_t>(
          std::floor((1.0 - params.stage_detection_rate) * static_cast<double>(sorted.size())));
      double half = 0.0;
      for (const auto& s : stumps) half += s.alpha;
      half *= 0.5;
      threshold = std::min(half, sorted[std::min(allowed_misses, sorted.size() - 1)]);

      std::size_t tp = 0, fp = 0;
      for (double s : pos_scores) tp += s >= threshold;
      for (std::size_t i = positives.size(); i < labels.size(); ++i) fp += strong_score(stumps, x, i) >= threshold;
      stage_d = static_cast<double>(tp) / static_cast<double>(positives.size());
      stage_f = static_cast<double>(fp) / static_cast<double>(negs.size());
      if (stage_f <= params.stage_false_positive_rate) break;
    }
    if (stumps.empty()) break;

    Stage stage;
    stage.threshold = threshold;
    for (const auto& s : stumps) stage.weak.push_back({features[s.feature], s.threshold, s.parity, s.alpha});
    model.stages.push_back(std::move(stage));
    overall_fp *= stage_f;
    if (report) {
      report->stage_detection.push_back(stage_d);
      report->stage_false_positive.push_back(stage_f);
      report->stage_rounds.push_back(stumps.size());
    }
  }
  if (model.stages.empty()) throw Error(ErrorCode::input, "training produced no stages");
  return model;
}

}  // namespace ocular::cascade
