#pragma once

// Illumination compensation and global thresholding.

#include <array>
#include <cstdint>
#include <limits>

#include "ocular/imgcore.hpp"

namespace ocular::enhance {

using Histogram256 = std::array<std::uint64_t, 256>;

Histogram256 histogram(const GrayImage& img);

/// CDF remapping onto [range_lo, range_hi]:
///   out(v) = lo + floor((hi - lo) * cdf(v) / N)
/// An image with a single gray level maps entirely to range_lo.
GrayImage hist_equalize(const GrayImage& img, int range_lo = 0, int range_hi = 255);

/// Bi-histogram equalization. Pixels at or below the mean are equalized onto
/// [min, floor(mean)], the rest onto [floor(mean)+1, max].
GrayImage bhe(const GrayImage& img);

struct ClaheParams {
  int tile = 64;
  /// Clip limit as a multiple of the uniform bin height; infinity disables clipping.
  double clip = 3.0;
};

GrayImage clahe(const GrayImage& img, const ClaheParams& p = {});

struct OtsuResult {
  int threshold = 0;
  BinaryImage binary;  // 1 where f(x,y) >= threshold
};

/// Threshold maximizing between-class variance, classes {< T} and {>= T}.
/// Ties go to the smallest T; a single-level histogram returns that level.
int otsu_threshold(const Histogram256& hist);
OtsuResult otsu(const GrayImage& img);

}  // namespace ocular::enhance
