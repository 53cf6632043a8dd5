#pragma once

// Block-LBP eye descriptors, the open/closed kernel classifier and PERCLOS.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ocular/imgcore.hpp"
#include "ocular/subspace.hpp"

namespace ocular::eyestate {

enum class EyeState { open, closed, unknown };

const char* to_string(EyeState s);
EyeState eye_state_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// LBP

inline constexpr int kEyeWidth = 50;
inline constexpr int kEyeHeight = 40;
inline constexpr int kBlockWidth = 5;
inline constexpr int kBlockHeight = 4;
inline constexpr int kBins = 16;
inline constexpr std::size_t kDescriptorLength =
    static_cast<std::size_t>(kEyeWidth / kBlockWidth) * (kEyeHeight / kBlockHeight) * kBins;

/// Neighbor offsets in bit order: clockwise starting at the top-left pixel.
inline constexpr std::array<std::array<int, 2>, 8> kLbpNeighbors = {
    {{-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}}};

/// patch is row-major 3x3; bit n is set iff neighbor n >= center.
int lbp_code(const std::array<std::uint8_t, 9>& patch);

/// Code of every pixel, borders read with edge clamping.
GrayImage lbp_image(const GrayImage& img);

/// 10x10 grid of 5x4 blocks over the 50x40 eye (resized first if needed),
/// 16-bin histogram per block (bin = code / 16), concatenated row-major.
std::vector<double> block_lbp(const GrayImage& eye);

// ---------------------------------------------------------------------------
// Kernel classifier

enum class KernelKind { linear, poly };

struct KernelSpec {
  KernelKind kind = KernelKind::poly;
  int degree = 3;
  double gamma = 0.0;  // 0 selects 1 / (dim * mean feature variance) at training
  double coef0 = 1.0;

  double operator()(const std::vector<double>& a, const std::vector<double>& b) const;
};

struct SvmParams {
  KernelSpec kernel;
  double C = 10.0;
  double tolerance = 1e-3;  // KKT violation bound at termination
  long max_iterations = 10'000'000;
};

struct KernelClassifier {
  KernelSpec kernel;
  double C = 10.0;
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> coefficients;  // alpha_i * y_i
  double bias = 0.0;

  /// sum coef_i K(sv_i, x) + bias; positive means closed.
  double decision(const std::vector<double>& x) const;
};

/// Soft-margin SVM dual solved by SMO with second-order working-set
/// selection. labels are +1 / -1.
KernelClassifier train_svm(const std::vector<std::vector<double>>& x, const std::vector<int>& labels,
                           const SvmParams& params);

/// closed -> +1, open -> -1; unknown labels are rejected.
KernelClassifier classifier_train(const std::vector<std::vector<double>>& x,
                                  const std::vector<EyeState>& labels, const SvmParams& params = {});

void save_classifier(std::ostream& out, const KernelClassifier& c);
void save_classifier(const std::string& path, const KernelClassifier& c);
KernelClassifier load_classifier(std::istream& in);
KernelClassifier load_classifier(const std::string& path);

// ---------------------------------------------------------------------------
// Eye state and PERCLOS

/// Feature vector the classifier sees for an eye crop: the subspace
/// projection weights of the normalized window (image models) or of the
/// block-LBP descriptor (1600-dim models without window geometry).
std::vector<double> eye_features(const GrayImage& eye, const subspace::SubspaceModel& model);

struct EyeStateResult {
  EyeState state = EyeState::unknown;
  double score = 0.0;
};

EyeStateResult eye_state(const GrayImage& eye, const subspace::SubspaceModel& model,
                         const KernelClassifier& clf);

/// 100 * closed / total.
double perclos_percent(std::size_t closed, std::size_t total);

struct PerclosParams {
  double fps = 30.0;
  double window_s = 180.0;
  double stride_s = 60.0;
};

struct PerclosRow {
  int minute = 0;
  std::size_t start_frame = 0;  // inclusive
  std::size_t end_frame = 0;    // exclusive
  std::size_t closed = 0;
  std::size_t known = 0;
  std::optional<double> percent;  // absent when the window has no known frame
  bool warmup = false;            // window shorter than window_s
};

/// One row per completed stride. Unknown frames are left out of both counts.
std::vector<PerclosRow> perclos(const std::vector<EyeState>& states, const PerclosParams& p);

}  // namespace ocular::eyestate
