#pragma once

// Batch pipelines behind the command-line tool: PERCLOS, saccades,
// spectacles, ROC/AUC and model training.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ocular/cascade.hpp"
#include "ocular/eyestate.hpp"
#include "ocular/iris.hpp"
#include "ocular/spectacles.hpp"
#include "ocular/subspace.hpp"
#include "ocular/track.hpp"

namespace ocular::pipeline {

struct RunConfig {
  // face and eye detection
  double sf = 1.0;
  int eye_refine_step = 2;  // 0 keeps the coarse eye-window grid only
  // iris localization
  double alpha = 0.6;
  double canny_low = 40.0;
  double canny_high = 100.0;
  int rmin = 0;
  int rmax = 0;
  double gamma = 0.5;
  int glint_radius = 10;
  double min_support = 0.35;
  // tracking
  track::Vec4 kf_q = track::Vec4(1, 1, 4, 4);
  track::Vec4 kf_r = track::Vec4(4, 4, 16, 16);
  int search_radius = 12;
  int reverify = 6;
  int max_misses = 12;
  double corner_margin = 2.0;
  double saccade_threshold = 0.0;  // 0: 15% of the peak speed
  // PERCLOS
  double window_s = 180.0;
  double stride_s = 60.0;
  // classifiers
  std::string kernel = "poly";
  int degree = 3;
  double svm_c = 10.0;
  int pca_k = 15;
  int lbp_k = 20;
  int cascade_stages = 14;
  double cascade_target_fpr = 1e-6;
  int cascade_rounds = 30;
  int feature_pool = 2000;
  int negatives_per_stage = 400;
  std::string train_mode = "all";
  // spectacles
  std::string edge_mask = "dog";
  std::string spectacle_length = "skeleton";
  int min_component = 30;
  std::string metric = "quasi-euclidean";
  // EOG
  std::string eog;
  double f_lo = 0.4;
  double f_hi = 30.0;
  double truncate = 0.15;
  // misc
  std::string models;
  std::uint64_t seed = 1;
};

/// Sets one key; unknown keys and out-of-range values are parameter errors.
void set_option(RunConfig& cfg, const std::string& key, const std::string& value);
void apply_options(RunConfig& cfg, const std::map<std::string, std::string>& kv);
RunConfig load_config(const std::filesystem::path& path);

struct Models {
  cascade::CascadeModel face;
  subspace::SubspaceModel eye;
  subspace::SubspaceModel state_features;
  eyestate::KernelClassifier state;
};

inline constexpr const char* kFaceModel = "face.cascade";
inline constexpr const char* kEyeModel = "eye.subspace";
inline constexpr const char* kStateFeatures = "state.subspace";
inline constexpr const char* kStateClassifier = "state.svm";

Models load_models(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// ROC

struct RocPoint {
  double threshold = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  double tpr = 0.0;
  double fpr = 0.0;
};

/// Points for every unique score used as a threshold (score >= t is
/// positive), from the strictest down, preceded by the empty-acceptance point.
std::vector<RocPoint> roc_curve(const std::vector<double>& scores, const std::vector<int>& labels);

struct Auc {
  std::uint64_t twice_area = 0;  // trapezoid sum in count units, times two
  std::uint64_t denominator = 0;  // 2 P N
  double value = 0.0;
};

/// Trapezoid area under roc_curve, kept as an exact ratio of integers.
Auc roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// ---------------------------------------------------------------------------
// Pipelines. Report files go to out_dir; progress and timing go to log.

void run_perclos(const std::filesystem::path& dataset, const RunConfig& cfg, const std::filesystem::path& out_dir,
                 std::ostream& log);
void run_saccade(const std::filesystem::path& dataset, const RunConfig& cfg, const std::filesystem::path& out_dir,
                 std::ostream& log);
void run_spectacles(const std::filesystem::path& dataset, const RunConfig& cfg,
                    const std::filesystem::path& out_dir, std::ostream& log);
void run_roc(const std::filesystem::path& scores_csv, const std::filesystem::path& out_dir, std::ostream& log);
void run_train(const std::filesystem::path& dataset, const RunConfig& cfg, const std::filesystem::path& out_dir,
               std::ostream& log);

/// Saccade parameters of a tracked series split at lost or invalid frames.
struct SaccadeRow {
  int segment = 0;
  iris::SaccadeRecord record;
};

std::vector<SaccadeRow> saccades_from_track(const std::vector<track::TrackPoint>& points, double left_x,
                                            double eye_width, double fps, double v_thresh);

}  // namespace ocular::pipeline
