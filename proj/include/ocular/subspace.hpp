#pragma once

// PCA subspaces learned through the small Gram matrix, and detection by
// minimum reconstruction error over a sliding window grid.

#include <iosfwd>
#include <string>
#include <vector>

#include "ocular/imgcore.hpp"

namespace ocular::subspace {

struct SubspaceModel {
  std::size_t dim = 0;
  std::vector<double> mean;
  std::vector<std::vector<double>> basis;  // K unit vectors of length dim
  std::vector<double> eigenvalues;         // covariance eigenvalues, descending
  // Window geometry for image models; zero for plain feature-vector models.
  int window_w = 0;
  int window_h = 0;

  std::size_t k() const { return basis.size(); }
};

struct EigenPairs {
  std::vector<double> values;                // descending
  std::vector<std::vector<double>> vectors;  // unit eigenvectors
};

/// Cyclic Jacobi eigen-decomposition of a symmetric n x n row-major matrix.
EigenPairs symmetric_eigen(const std::vector<double>& a, std::size_t n);

/// Mean-centers the P vectors, eigen-decomposes the P x P Gram matrix, lifts
/// each eigenvector back to data space and normalizes it. Components are
/// ordered by decreasing eigenvalue; each basis vector's largest-magnitude
/// entry is made positive.
SubspaceModel pca_train(const std::vector<std::vector<double>>& vectors, std::size_t k);

/// Projection weights <vec - mean, u_i>.
std::vector<double> project(const SubspaceModel& m, const std::vector<double>& vec);

/// Distance between vec - mean and its projection onto the basis.
double reconstruction_error(const SubspaceModel& m, const std::vector<double>& vec);

/// Zero-mean, unit-variance copy of the patch intensities (all zeros for a
/// flat patch).
std::vector<double> normalize_window(const GrayImage& patch);

/// Normalized vector of a patch resized to the model's window.
std::vector<double> window_vector(const GrayImage& patch, int window_w, int window_h);

struct DetectParams {
  int window_w = 50;
  int window_h = 40;
  double overlap = 0.10;
  int resize_w = 200;  // 0 keeps the ROI size
  int resize_h = 70;
  int refine_step = 0;  // > 0: dense search at this step within one stride of the coarse minimum
};

inline DetectParams eye_detect_params() { return {50, 40, 0.10, 200, 70, 0}; }
inline DetectParams face_detect_params() { return {200, 140, 0.25, 0, 0, 0}; }

struct SubspaceHit {
  Rect rect;          // in ROI coordinates
  Rect resized_rect;  // in the resized ROI
  double error = 0.0;
};

/// Window origins along one axis: stride = size - round(overlap * size), plus
/// a final window flush with the far edge when the stride leaves a gap.
std::vector<int> window_grid(int extent, int size, double overlap);

/// Minimum-error window; ties keep the first window in (y, x) scan order.
SubspaceHit subspace_detect(const GrayImage& roi, const SubspaceModel& m, const DetectParams& p);

void save_model(std::ostream& out, const SubspaceModel& m);
void save_model(const std::string& path, const SubspaceModel& m);
SubspaceModel load_model(std::istream& in);
SubspaceModel load_model(const std::string& path);

}  // namespace ocular::subspace
