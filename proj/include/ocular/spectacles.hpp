#pragma once

// Spectacle-presence detection on the upper half of a face crop and
// eye-region extraction around the detected frame.

#include <optional>
#include <vector>

#include "ocular/enhance.hpp"
#include "ocular/imgcore.hpp"

namespace ocular::spectacles {

Kernel dog_mask();        // 7x7 Mexican hat, center 16, zero sum
Kernel laplacian_mask();  // 5x5, -1 everywhere, center 24

enum class EdgeMask { dog, laplacian };

/// How the size l of a frame component is measured. skeleton counts the
/// pixels of the thinned component (its arc length); pixels counts the
/// dilated component itself.
enum class LengthMeasure { skeleton, pixels };

struct SpectacleConfig {
  EdgeMask edge = EdgeMask::dog;
  LengthMeasure length = LengthMeasure::skeleton;
  std::size_t min_component = 30;
  int dilate_half = 1;  // 3x3 square
  int keep = 4;
  bool two_components = true;  // D = (l1 + l2) / 1.5b, else l1 / 1.5b
  bool upper_half = true;
  enhance::ClaheParams clahe{};
  DistanceMetric metric = DistanceMetric::quasi_euclidean;
};

struct FrameComponent {
  Component component;
  double length = 0.0;
};

struct SpectacleResult {
  bool detected = false;
  double D = 0.0;
  double breadth = 0.0;
  std::vector<FrameComponent> components;  // longest first
  BinaryImage mask;                        // retained components on the ROI
  std::optional<BinaryImage> eye_region;
};

/// (l1 + l2) / (1.5 b)
double detection_factor(double l1, double l2, double b);
/// l / (1.5 b)
double detection_factor(double l, double b);

/// Zhang-Suen thinning to a one-pixel-wide skeleton.
BinaryImage thin(const BinaryImage& bin);

/// CLAHE, local standard deviation, edge mask, Otsu, small-component
/// removal, dilation, best components, detection factor.
SpectacleResult detect_spectacles(const GrayImage& face, const SpectacleConfig& cfg = {});

/// Pixels whose distance to the retained frame components is below 0.8 l,
/// l being the longest component.
BinaryImage extract_eye_region(const SpectacleResult& result,
                               DistanceMetric metric = DistanceMetric::quasi_euclidean);

/// Distance threshold used by extract_eye_region, exposed for callers that
/// want a custom cut.
BinaryImage eye_region_within(const SpectacleResult& result, DistanceMetric metric, double d_m);

}  // namespace ocular::spectacles
