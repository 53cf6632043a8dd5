#pragma once

// Iris-center localization (projection functions, form-factor edge map,
// glint removal, Canny, circular Hough), eye corners, and saccade
// parameters from an iris-position series.

#include <optional>
#include <vector>

#include "ocular/imgcore.hpp"

namespace ocular::iris {

struct ProjectionCurves {
  std::vector<double> ipf_v, vpf_v, gpf_v;  // one value per column
  std::vector<double> ipf_h, vpf_h, gpf_h;  // one value per row
  double alpha = 0.0;
};

/// IPF: mean intensity along the orthogonal axis. VPF: mean squared
/// deviation from that mean. GPF = (1 - alpha) IPF + alpha VPF.
ProjectionCurves projection_curves(const GrayImage& eye, double alpha);

/// Local maxima of curve above mean + 1 std, strongest first, greedily kept
/// when at least min_separation samples from every stronger kept peak.
std::vector<int> find_peaks(const std::vector<double>& curve, int min_separation);

struct GpfResult {
  double cx = 0.0;
  double cy = 0.0;
  ProjectionCurves curves;
};

/// cx: midpoint of the two strongest peaks of |d GPF_v / dx| (the two iris
/// edges); cy: center of the GPF_h peak at half height. nullopt when two
/// separated peaks are absent.
std::optional<GpfResult> gpf_center(const GrayImage& eye, double alpha = 0.6);

/// beta = mu^2 / (mu^2 + sigma^2) = 1 / FF^2 over each 3x3 neighborhood
/// (edge clamped). Zero-mean neighborhoods give beta = 1.
RealImage esi_beta(const GrayImage& eye);

/// Edge strength round(255 * (1 - beta)); flat and zero-mean regions give 0.
GrayImage esi_edge_map(const GrayImage& eye);

/// Grayscale opening with a disk (radius 10 by default) to suppress glints.
GrayImage remove_glint(const GrayImage& eye, int radius = 10);

Kernel gaussian_kernel();  // 5x5, weights / 159
Kernel sobel_x();          // [1 0 -1; 2 0 -2; 1 0 -1]
Kernel sobel_y();          // [1 2 1; 0 0 0; -1 -2 -1]

struct CannyStages {
  RealImage smoothed;
  RealImage gx, gy, magnitude;
  GrayImage sector;  // quantized gradient direction 0:0, 1:45, 2:90, 3:135 degrees
  RealImage suppressed;
  BinaryImage edges;
};

CannyStages canny_stages(const GrayImage& img, double t_low, double t_high);
BinaryImage canny(const GrayImage& img, double t_low = 40.0, double t_high = 100.0);

struct Circle {
  int cx = 0;
  int cy = 0;
  int r = 0;
  int votes = 0;
};

/// Offsets (dx, dy) with |sqrt(dx^2 + dy^2) - r| < 0.5.
std::vector<Point> circle_offsets(int r);

/// Max-vote cell of the (cx, cy, r) accumulator; ties go to the smallest r,
/// then the smallest (cy, cx). nullopt for an empty edge map. When centers
/// is given only cells inside it compete; every edge pixel still votes.
std::optional<Circle> hough_circle(const BinaryImage& edges, int rmin, int rmax,
                                   const std::optional<Rect>& centers = std::nullopt);

struct IrisConfig {
  double gamma = 0.5;
  int glint_radius = 10;
  double t_low = 40.0;
  double t_high = 100.0;
  int rmin = 0;  // 0: eye height / 6
  int rmax = 0;  // 0: eye height / 2
  double min_support = 0.35;      // votes / circle offsets
  double density_factor = 3.0;    // support must also exceed this times edge density
};

struct IrisFix {
  double cx = 0.0;
  double cy = 0.0;
  double r = 0.0;
  double support = 0.0;
};

/// gamma -> glint removal -> Canny -> Hough, then a least-squares circle fit
/// on the edge pixels near the winning circle. nullopt when no circle has
/// enough support.
std::optional<IrisFix> iris_center(const GrayImage& eye, const IrisConfig& cfg = {},
                                   const std::optional<Rect>& centers = std::nullopt);

struct EyeCorners {
  PointF temporal;
  PointF nasal;
  double eye_width = 0.0;
};

struct CornerConfig {
  double band = 0.2;              // fraction of the width searched at each side
  bool temporal_on_right = true;
  double relative_floor = 0.05;   // band response must reach this share of the global max
};

/// Minimum eigenvalue of the 3x3-summed structure tensor.
RealImage corner_response(const GrayImage& img);

std::optional<EyeCorners> eye_corners(const GrayImage& eye, const CornerConfig& cfg = {});

struct SaccadeRecord {
  int onset = 0;
  int offset = 0;
  double amplitude = 0.0;      // eye-width fraction
  double peak_velocity = 0.0;  // fraction per second
  double duration = 0.0;       // seconds
  double sr = 0.0;             // peak_velocity / duration
};

/// v(k) = (theta(k) - theta(k-1)) * fps. Segments are maximal runs of
/// |v| > v_thresh (default 15% of max |v|); onset is the frame before the run,
/// offset its last frame. Duration uses the frames of the extreme positions
/// inside the segment.
std::vector<SaccadeRecord> saccade_params(const std::vector<double>& theta, double fps,
                                          std::optional<double> v_thresh = std::nullopt);

/// 100 * (truth - estimate) / truth.
double percent_error(double truth, double estimate);

}  // namespace ocular::iris
