#pragma once

// Raster containers and pixel-level algorithms shared by every pipeline.
// Coordinates: x grows rightward, y grows downward, origin at the top-left
// pixel.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ocular/error.hpp"

namespace ocular {

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct PointF {
  double x = 0.0;
  double y = 0.0;
};

struct Rect {
  int x = 0;
  int y = 0;
  int w = 1;
  int h = 1;

  int right() const { return x + w; }    // exclusive
  int bottom() const { return y + h; }   // exclusive
  long long area() const { return static_cast<long long>(w) * h; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

double iou(const Rect& a, const Rect& b);

/// Row-major raster. Tag distinguishes rasters that share a pixel type but
/// not a meaning (gray levels vs. 0/1 masks).
template <typename T, typename Tag = void>
class Plane {
 public:
  using value_type = T;

  Plane() = default;

  Plane(int width, int height, T fill = T{}) : width_(width), height_(height) {
    check_shape(width, height);
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  Plane(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    check_shape(width, height);
    if (data_.size() != static_cast<std::size_t>(width) * height) {
      throw Error(ErrorCode::size, "raster data length does not match width*height");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  bool contains(const Rect& r) const {
    return r.w >= 1 && r.h >= 1 && r.x >= 0 && r.y >= 0 && r.right() <= width_ &&
           r.bottom() <= height_;
  }

  T& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  const T& at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  /// Edge-clamped read.
  const T& clamped(int x, int y) const {
    x = std::clamp(x, 0, width_ - 1);
    y = std::clamp(y, 0, height_ - 1);
    return at(x, y);
  }

  std::span<T> pixels() { return data_; }
  std::span<const T> pixels() const { return data_; }
  std::span<const T> row(int y) const {
    return std::span<const T>(data_).subspan(static_cast<std::size_t>(y) * width_, width_);
  }
  const std::vector<T>& vector() const { return data_; }

  friend bool operator==(const Plane& a, const Plane& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
  }

 private:
  static void check_shape(int width, int height) {
    if (width < 1 || height < 1) {
      throw Error(ErrorCode::size, "raster dimensions must be at least 1x1");
    }
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

struct BinaryTag {};

using GrayImage = Plane<std::uint8_t>;
using BinaryImage = Plane<std::uint8_t, BinaryTag>;
using ResponseImage = Plane<std::int16_t>;
using RealImage = Plane<double>;

GrayImage crop(const GrayImage& img, const Rect& r);
GrayImage flip_horizontal(const GrayImage& img);
std::vector<double> to_vector(const GrayImage& img);

/// Summed-area table: at(x, y) is the sum of source values over [0..x]x[0..y].
class IntegralImage {
 public:
  IntegralImage() = default;
  IntegralImage(int width, int height, std::vector<std::uint64_t> data)
      : table_(width, height, std::move(data)) {}

  int width() const { return table_.width(); }
  int height() const { return table_.height(); }
  std::uint64_t at(int x, int y) const { return table_.at(x, y); }

  /// Table lookup with out-of-range (negative) coordinates reading as 0.
  std::uint64_t at_or_zero(int x, int y) const {
    return (x < 0 || y < 0) ? 0 : table_.at(x, y);
  }

 private:
  Plane<std::uint64_t> table_;
};

IntegralImage integral_image(const GrayImage& img);
/// Summed-area table of squared intensities, used for window variance.
IntegralImage squared_integral_image(const GrayImage& img);

/// Sum of the source intensities inside r, from four table lookups.
std::uint64_t rect_sum(const IntegralImage& ii, const Rect& r);

/// Bicubic (Catmull-Rom, a = -0.5) resize to an explicit output size.
GrayImage resize_bicubic(const GrayImage& img, int out_width, int out_height);

/// Downsample by scale factor sf >= 1; output is floor(w/sf) x floor(h/sf).
GrayImage resample_bicubic(const GrayImage& img, double sf);

/// Rotate about the image center by theta degrees (y-down convention, so a
/// positive angle turns +x toward +y). Bilinear inverse mapping; samples
/// falling outside the source become 0.
GrayImage affine_rotate(const GrayImage& img, double theta_degrees);

/// Maps a point of the source frame through the same rotation used by
/// affine_rotate, and back.
PointF rotate_point(PointF p, int width, int height, double theta_degrees);

struct Kernel {
  int size = 1;
  std::vector<double> weights;  // row-major, size*size

  Kernel() : weights{1.0} {}
  Kernel(int side, std::vector<double> w);

  double at(int col, int row) const { return weights[static_cast<std::size_t>(row) * size + col]; }
  double sum() const;

  static Kernel identity();
};

/// True convolution with edge clamping: out(x,y) = sum k(u,v) * i(x-u, y-v).
RealImage convolve_real(const GrayImage& img, const Kernel& k);
RealImage convolve_real(const RealImage& img, const Kernel& k);

/// Convolution rounded and saturated to 16 bits. With normalize set the
/// response is linearly mapped onto [0, 255] (constant responses map to 0).
ResponseImage convolve(const GrayImage& img, const Kernel& k, bool normalize);

/// Linear map of a real raster onto [0, 255], rounded.
GrayImage normalize_to_gray(const RealImage& img);

enum class MorphOp { erode, dilate, open };

/// Flat grayscale morphology with a disk structuring element
/// {(dx,dy): dx^2 + dy^2 <= r^2}. Neighbors outside the image are ignored.
GrayImage morph(const GrayImage& img, MorphOp op, int radius);

BinaryImage dilate_square(const BinaryImage& bin, int half_width);

struct Component {
  int label = 0;
  std::size_t pixel_count = 0;
  Rect bounds;
  std::vector<Point> pixels;  // raster order
};

/// 8-connected components of at least min_size pixels, largest first; ties
/// go to the component whose first raster pixel comes first.
std::vector<Component> connected_components(const BinaryImage& bin, std::size_t min_size);

BinaryImage mask_from_components(int width, int height, std::span<const Component> comps);

enum class DistanceMetric { chessboard, cityblock, euclidean, quasi_euclidean };

double metric_distance(DistanceMetric m, int dx, int dy);

/// Distance from every pixel to the nearest nonzero pixel under the metric.
RealImage distance_transform(const BinaryImage& bin, DistanceMetric metric);

/// Population standard deviation of each 3x3 neighborhood, scaled so the
/// largest value becomes 255.
GrayImage local_stddev(const GrayImage& img);

/// out = round(255 * (in/255)^gamma).
GrayImage gamma_correct(const GrayImage& img, double gamma);

// Binary PGM (P5, maxval 255).
GrayImage read_pgm(std::istream& in);
GrayImage read_pgm(const std::string& path);
void write_pgm(std::ostream& out, const GrayImage& img);
void write_pgm(const std::string& path, const GrayImage& img);

}  // namespace ocular
