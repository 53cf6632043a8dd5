#include "ocular/imgcore.hpp"

#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

namespace ocular {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::bounds: return "bounds";
    case ErrorCode::scale: return "scale";
    case ErrorCode::size: return "size";
    case ErrorCode::domain: return "domain";
    case ErrorCode::parameter: return "parameter";
    case ErrorCode::input: return "input";
    case ErrorCode::rank: return "rank";
    case ErrorCode::numerical: return "numerical";
    case ErrorCode::constraint: return "constraint";
    case ErrorCode::state: return "state";
    case ErrorCode::io: return "io";
    case ErrorCode::format: return "format";
  }
  return "unknown";
}

double iou(const Rect& a, const Rect& b) {
  const int ix0 = std::max(a.x, b.x);
  const int iy0 = std::max(a.y, b.y);
  const int ix1 = std::min(a.right(), b.right());
  const int iy1 = std::min(a.bottom(), b.bottom());
  if (ix1 <= ix0 || iy1 <= iy0) return 0.0;
  const double inter = static_cast<double>(ix1 - ix0) * (iy1 - iy0);
  return inter / (static_cast<double>(a.area()) + static_cast<double>(b.area()) - inter);
}

GrayImage crop(const GrayImage& img, const Rect& r) {
  if (!img.contains(r)) throw Error(ErrorCode::bounds, "crop rectangle outside image");
  GrayImage out(r.w, r.h);
  for (int y = 0; y < r.h; ++y)
    for (int x = 0; x < r.w; ++x) out.at(x, y) = img.at(r.x + x, r.y + y);
  return out;
}

GrayImage flip_horizontal(const GrayImage& img) {
  GrayImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out.at(img.width() - 1 - x, y) = img.at(x, y);
  return out;
}

std::vector<double> to_vector(const GrayImage& img) {
  return std::vector<double>(img.pixels().begin(), img.pixels().end());
}

namespace {

template <typename F>
IntegralImage build_integral(const GrayImage& img, F value) {
  const int w = img.width();
  const int h = img.height();
  std::vector<std::uint64_t> t(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    std::uint64_t row = 0;
    for (int x = 0; x < w; ++x) {
      row += value(img.at(x, y));
      const std::uint64_t above = y > 0 ? t[static_cast<std::size_t>(y - 1) * w + x] : 0;
      t[static_cast<std::size_t>(y) * w + x] = row + above;
    }
  }
  return IntegralImage(w, h, std::move(t));
}

}  // namespace

IntegralImage integral_image(const GrayImage& img) {
  return build_integral(img, [](std::uint8_t v) { return static_cast<std::uint64_t>(v); });
}

IntegralImage squared_integral_image(const GrayImage& img) {
  return build_integral(img, [](std::uint8_t v) {
    return static_cast<std::uint64_t>(v) * static_cast<std::uint64_t>(v);
  });
}

std::uint64_t rect_sum(const IntegralImage& ii, const Rect& r) {
  if (r.w < 1 || r.h < 1 || r.x < 0 || r.y < 0 || r.right() > ii.width() ||
      r.bottom() > ii.height()) {
    throw Error(ErrorCode::bounds, "rectangle outside integral image");
  }
  const int x1 = r.right() - 1;
  const int y1 = r.bottom() - 1;
  // Ordered so that no intermediate underflows.
  return ii.at(x1, y1) + ii.at_or_zero(r.x - 1, r.y - 1) - ii.at_or_zero(r.x - 1, y1) -
         ii.at_or_zero(x1, r.y - 1);
}

// ---------------------------------------------------------------------------
// Resampling

namespace {

double catmull_rom(double x) {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

std::uint8_t round_half_up(double v) {
  const double r = std::floor(v + 0.5);
  return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

struct Taps {
  std::array<int, 4> index;
  std::array<double, 4> weight;
};

std::vector<Taps> bicubic_taps(int out_len, int in_len, double scale) {
  std::vector<Taps> taps(out_len);
  for (int i = 0; i < out_len; ++i) {
    const double src = (i + 0.5) * scale - 0.5;
    const double base = std::floor(src);
    const double t = src - base;
    for (int k = 0; k < 4; ++k) {
      const int idx = static_cast<int>(base) - 1 + k;
      taps[i].index[k] = std::clamp(idx, 0, in_len - 1);
      taps[i].weight[k] = catmull_rom(t - (k - 1));
    }
  }
  return taps;
}

GrayImage resize_with_scale(const GrayImage& img, int ow, int oh, double sx, double sy) {
  const auto tx = bicubic_taps(ow, img.width(), sx);
  const auto ty = bicubic_taps(oh, img.height(), sy);
  // Separable: horizontal pass into a real buffer, then vertical.
  std::vector<double> tmp(static_cast<std::size_t>(ow) * img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += tx[x].weight[k] * img.at(tx[x].index[k], y);
      tmp[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  GrayImage out(ow, oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k)
        acc += ty[y].weight[k] * tmp[static_cast<std::size_t>(ty[y].index[k]) * ow + x];
      out.at(x, y) = round_half_up(acc);
    }
  }
  return out;
}

}  // namespace

GrayImage resize_bicubic(const GrayImage& img, int out_width, int out_height) {
  if (out_width < 1 || out_height < 1) throw Error(ErrorCode::size, "resize target must be >= 1x1");
  if (out_width == img.width() && out_height == img.height()) return img;
  return resize_with_scale(img, out_width, out_height,
                           static_cast<double>(img.width()) / out_width,
                           static_cast<double>(img.height()) / out_height);
}

GrayImage resample_bicubic(const GrayImage& img, double sf) {
  if (!(sf >= 1.0)) throw Error(ErrorCode::parameter, "scale factor must be >= 1");
  const int ow = static_cast<int>(std::floor(img.width() / sf));
  const int oh = static_cast<int>(std::floor(img.height() / sf));
  if (ow < 8 || oh < 8) throw Error(ErrorCode::scale, "downsampled image smaller than 8x8");
  if (sf == 1.0) return img;
  return resize_with_scale(img, ow, oh, sf, sf);
}

// ---------------------------------------------------------------------------
// Rotation

PointF rotate_point(PointF p, int width, int height, double theta_degrees) {
  const double t = theta_degrees * std::numbers::pi / 180.0;
  const double c = std::cos(t);
  const double s = std::sin(t);
  const double cx = (width - 1) / 2.0;
  const double cy = (height - 1) / 2.0;
  const double dx = p.x - cx;
  const double dy = p.y - cy;
  return {c * dx - s * dy + cx, s * dx + c * dy + cy};
}

GrayImage affine_rotate(const GrayImage& img, double theta_degrees) {
  if (std::abs(theta_degrees) > 90.0)
    throw Error(ErrorCode::parameter, "rotation angle must lie in [-90, 90]");
  const int w = img.width();
  const int h = img.height();
  if (theta_degrees == 0.0) return img;
  const double t = theta_degrees * std::numbers::pi / 180.0;
  const double c = std::cos(t);
  const double s = std::sin(t);
  const double cx = (w - 1) / 2.0;
  const double cy = (h - 1) / 2.0;
  constexpr double eps = 1e-9;
  GrayImage out(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Inverse map: source = R(-theta) (dst - center) + center.
      const double dx = x - cx;
      const double dy = y - cy;
      double sx = c * dx + s * dy + cx;
      double sy = -s * dx + c * dy + cy;
      if (sx < -eps || sy < -eps || sx > w - 1 + eps || sy > h - 1 + eps) continue;
      sx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
      sy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const int x1 = std::min(x0 + 1, w - 1);
      const int y1 = std::min(y0 + 1, h - 1);
      const double fx = sx - x0;
      const double fy = sy - y0;
      const double top = img.at(x0, y0) * (1.0 - fx) + img.at(x1, y0) * fx;
      const double bot = img.at(x0, y1) * (1.0 - fx) + img.at(x1, y1) * fx;
      out.at(x, y) = round_half_up(top * (1.0 - fy) + bot * fy);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Convolution

Kernel::Kernel(int side, std::vector<double> w) : size(side), weights(std::move(w)) {
  if (side < 1 || side % 2 == 0) throw Error(ErrorCode::parameter, "kernel side must be odd");
  if (weights.size() != static_cast<std::size_t>(side) * side)
    throw Error(ErrorCode::size, "kernel weight count must be side*side");
}

double Kernel::sum() const {
  double s = 0.0;
  for (double v : weights) s += v;
  return s;
}

Kernel Kernel::identity() { return Kernel(1, {1.0}); }

namespace {

template <typename Src>
RealImage convolve_impl(const Src& img, const Kernel& k) {
  if (k.size > img.width() || k.size > img.height())
    throw Error(ErrorCode::size, "kernel larger than image");
  const int half = k.size / 2;
  RealImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      double acc = 0.0;
      for (int r = 0; r < k.size; ++r) {
        for (int c = 0; c < k.size; ++c) {
          const double wgt = k.at(c, r);
          if (wgt == 0.0) continue;
          acc += wgt * static_cast<double>(img.clamped(x - (c - half), y - (r - half)));
        }
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

}  // namespace

RealImage convolve_real(const GrayImage& img, const Kernel& k) { return convolve_impl(img, k); }
RealImage convolve_real(const RealImage& img, const Kernel& k) { return convolve_impl(img, k); }

GrayImage normalize_to_gray(const RealImage& img) {
  const auto px = img.pixels();
  const auto [lo_it, hi_it] = std::minmax_element(px.begin(), px.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  GrayImage out(img.width(), img.height(), 0);
  if (hi - lo <= 0.0) return out;
  const double scale = 255.0 / (hi - lo);
  auto dst = out.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) dst[i] = round_half_up((px[i] - lo) * scale);
  return out;
}

ResponseImage convolve(const GrayImage& img, const Kernel& k, bool normalize) {
  const RealImage real = convolve_real(img, k);
  ResponseImage out(img.width(), img.height());
  if (normalize) {
    const GrayImage g = normalize_to_gray(real);
    for (std::size_t i = 0; i < g.size(); ++i) out.pixels()[i] = g.pixels()[i];
    return out;
  }
  constexpr double lo = std::numeric_limits<std::int16_t>::min();
  constexpr double hi = std::numeric_limits<std::int16_t>::max();
  for (std::size_t i = 0; i < real.size(); ++i)
    out.pixels()[i] = static_cast<std::int16_t>(std::clamp(std::round(real.pixels()[i]), lo, hi));
  return out;
}

// ---------------------------------------------------------------------------
// Morphology

namespace {

// Sliding extremum along rows for a horizontal half-width, clipped to the
// image. Neighbors outside are ignored rather than padded.
template <typename Pick>
std::vector<std::uint8_t> row_extremum(const GrayImage& img, int hw, Pick pick) {
  const int w = img.width();
  std::vector<std::uint8_t> out(img.size());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - hw);
      const int x1 = std::min(w - 1, x + hw);
      std::uint8_t v = img.at(x0, y);
      for (int xx = x0 + 1; xx <= x1; ++xx) v = pick(v, img.at(xx, y));
      out[static_cast<std::size_t>(y) * w + x] = v;
    }
  }
  return out;
}

template <typename Pick>
GrayImage disk_filter(const GrayImage& img, int radius, Pick pick) {
  const int w = img.width();
  std::vector<int> half_width(2 * radius + 1);
  for (int dy = -radius; dy <= radius; ++dy) {
    int hw = 0;
    while ((hw + 1) * (hw + 1) + dy * dy <= radius * radius) ++hw;
    half_width[dy + radius] = hw;
  }
  std::vector<std::vector<std::uint8_t>> rows(radius + 1);
  for (int hw : half_width)
    if (rows[hw].empty()) rows[hw] = row_extremum(img, hw, pick);

  GrayImage out(w, img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      bool first = true;
      std::uint8_t v = 0;
      for (int dy = -radius; dy <= radius; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= img.height()) continue;
        const std::uint8_t r = rows[half_width[dy + radius]][static_cast<std::size_t>(yy) * w + x];
        v = first ? r : pick(v, r);
        first = false;
      }
      out.at(x, y) = v;
    }
  }
  return out;
}

std::uint8_t pick_min(std::uint8_t a, std::uint8_t b) { return std::min(a, b); }
std::uint8_t pick_max(std::uint8_t a, std::uint8_t b) { return std::max(a, b); }

}  // namespace

GrayImage morph(const GrayImage& img, MorphOp op, int radius) {
  if (radius < 1) throw Error(ErrorCode::parameter, "structuring element radius must be >= 1");
  switch (op) {
    case MorphOp::erode: return disk_filter(img, radius, pick_min);
    case MorphOp::dilate: return disk_filter(img, radius, pick_max);
    case MorphOp::open:
      return disk_filter(disk_filter(img, radius, pick_min), radius, pick_max);
  }
  return img;
}

BinaryImage dilate_square(const BinaryImage& bin, int half_width) {
  BinaryImage out(bin.width(), bin.height(), 0);
  for (int y = 0; y < bin.height(); ++y) {
    for (int x = 0; x < bin.width(); ++x) {
      if (!bin.at(x, y)) continue;
      for (int dy = -half_width; dy <= half_width; ++dy)
        for (int dx = -half_width; dx <= half_width; ++dx)
          if (out.contains(x + dx, y + dy)) out.at(x + dx, y + dy) = 1;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Connected components

std::vector<Component> connected_components(const BinaryImage& bin, std::size_t min_size) {
  const int w = bin.width();
  const int h = bin.height();
  std::vector<char> seen(bin.size(), 0);
  std::vector<Component> comps;
  std::deque<Point> queue;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if (!bin.at(x, y) || seen[idx]) continue;
      Component c;
      seen[idx] = 1;
      queue.push_back({x, y});
      int x0 = x, x1 = x, y0 = y, y1 = y;
      while (!queue.empty()) {
        const Point p = queue.front();
        queue.pop_front();
        c.pixels.push_back(p);
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = p.x + dx;
            const int ny = p.y + dy;
            if (!bin.contains(nx, ny) || !bin.at(nx, ny)) continue;
            const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
            if (seen[nidx]) continue;
            seen[nidx] = 1;
            queue.push_back({nx, ny});
          }
        }
      }
      c.pixel_count = c.pixels.size();
      c.bounds = Rect{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
      std::sort(c.pixels.begin(), c.pixels.end(),
                [](const Point& a, const Point& b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
      if (c.pixel_count >= min_size) comps.push_back(std::move(c));
    }
  }
  // Discovery order is raster order of each component's first pixel, so a
  // stable sort on size alone implements the tie rule.
  std::stable_sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
    return a.pixel_count > b.pixel_count;
  });
  for (std::size_t i = 0; i < comps.size(); ++i) comps[i].label = static_cast<int>(i) + 1;
  return comps;
}

BinaryImage mask_from_components(int width, int height, std::span<const Component> comps) {
  BinaryImage out(width, height, 0);
  for (const auto& c : comps)
    for (const auto& p : c.pixels) out.at(p.x, p.y) = 1;
  return out;
}

// ---------------------------------------------------------------------------
// Distance transforms

double metric_distance(DistanceMetric m, int dx, int dy) {
  const double ax = std::abs(dx);
  const double ay = std::abs(dy);
  switch (m) {
    case DistanceMetric::chessboard: return std::max(ax, ay);
    case DistanceMetric::cityblock: return ax + ay;
    case DistanceMetric::euclidean: return std::sqrt(ax * ax + ay * ay);
    case DistanceMetric::quasi_euclidean:
      return ax > ay ? ax + (std::numbers::sqrt2 - 1.0) * ay : (std::numbers::sqrt2 - 1.0) * ax + ay;
  }
  return 0.0;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

RealImage chamfer(const BinaryImage& bin, bool diagonal) {
  const int w = bin.width();
  const int h = bin.height();
  RealImage d(w, h, kInf);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (bin.at(x, y)) d.at(x, y) = 0.0;
  auto relax = [&](int x, int y, int nx, int ny) {
    if (d.contains(nx, ny)) d.at(x, y) = std::min(d.at(x, y), d.at(nx, ny) + 1.0);
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      relax(x, y, x - 1, y);
      relax(x, y, x, y - 1);
      if (diagonal) {
        relax(x, y, x - 1, y - 1);
        relax(x, y, x + 1, y - 1);
      }
    }
  }
  for (int y = h - 1; y >= 0; --y) {
    for (int x = w - 1; x >= 0; --x) {
      relax(x, y, x + 1, y);
      relax(x, y, x, y + 1);
      if (diagonal) {
        relax(x, y, x + 1, y + 1);
        relax(x, y, x - 1, y + 1);
      }
    }
  }
  return d;
}

// Exact 1-D squared distance transform of a sampled function (lower envelope
// of parabolas).
void edt_1d(const std::vector<double>& f, std::vector<double>& out) {
  const int n = static_cast<int>(f.size());
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (f[v[k]] == kInf) {
      v[k] = q;
      continue;
    }
    double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double d = q - v[k];
    out[q] = f[v[k]] == kInf ? kInf : d * d + f[v[k]];
  }
}

RealImage euclidean_dt(const BinaryImage& bin) {
  const int w = bin.width();
  const int h = bin.height();
  RealImage sq(w, h, kInf);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (bin.at(x, y)) sq.at(x, y) = 0.0;
  std::vector<double> f(h), g(h);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = sq.at(x, y);
    edt_1d(f, g);
    for (int y = 0; y < h; ++y) sq.at(x, y) = g[y];
  }
  f.resize(w);
  g.resize(w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f[x] = sq.at(x, y);
    edt_1d(f, g);
    for (int x = 0; x < w; ++x) sq.at(x, y) = std::sqrt(g[x]);
  }
  return sq;
}

// Quasi-Euclidean distance is never below the chessboard distance, so the
// search grows square rings outward from the chessboard distance and stops
// once the ring radius exceeds the best value found.
RealImage quasi_euclidean_dt(const BinaryImage& bin) {
  const RealImage cb = chamfer(bin, true);
  const int w = bin.width();
  const int h = bin.height();
  RealImage out(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int start = static_cast<int>(cb.at(x, y));
      if (start == 0) continue;
      double best = kInf;
      for (int k = start; k <= std::max(w, h) && k <= best; ++k) {
        auto visit = [&](int dx, int dy) {
          const int nx = x + dx;
          const int ny = y + dy;
          if (bin.contains(nx, ny) && bin.at(nx, ny))
            best = std::min(best, metric_distance(DistanceMetric::quasi_euclidean, dx, dy));
        };
        for (int d = -k; d <= k; ++d) {
          visit(d, -k);
          visit(d, k);
        }
        for (int d = -k + 1; d <= k - 1; ++d) {
          visit(-k, d);
          visit(k, d);
        }
      }
      out.at(x, y) = best;
    }
  }
  return out;
}

}  // namespace

RealImage distance_transform(const BinaryImage& bin, DistanceMetric metric) {
  const auto px = bin.pixels();
  if (std::none_of(px.begin(), px.end(), [](std::uint8_t v) { return v != 0; }))
    throw Error(ErrorCode::domain, "distance transform needs at least one nonzero pixel");
  switch (metric) {
    case DistanceMetric::chessboard: return chamfer(bin, true);
    case DistanceMetric::cityblock: return chamfer(bin, false);
    case DistanceMetric::euclidean: return euclidean_dt(bin);
    case DistanceMetric::quasi_euclidean: return quasi_euclidean_dt(bin);
  }
  return chamfer(bin, true);
}

// ---------------------------------------------------------------------------
// Point operators

GrayImage local_stddev(const GrayImage& img) {
  RealImage sigma(img.width(), img.height());
  double peak = 0.0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      double mean = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) mean += img.clamped(x + dx, y + dy);
      mean /= 9.0;
      double var = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const double d = img.clamped(x + dx, y + dy) - mean;
          var += d * d;
        }
      }
      sigma.at(x, y) = std::sqrt(var / 9.0);
      peak = std::max(peak, sigma.at(x, y));
    }
  }
  GrayImage out(img.width(), img.height(), 0);
  if (peak <= 0.0) return out;
  for (std::size_t i = 0; i < out.size(); ++i)
    out.pixels()[i] = round_half_up(255.0 * sigma.pixels()[i] / peak);
  return out;
}

GrayImage gamma_correct(const GrayImage& img, double gamma) {
  if (!(gamma >= 0.1 && gamma <= 10.0)) throw Error(ErrorCode::parameter, "gamma must lie in [0.1, 10]");
  std::array<std::uint8_t, 256> lut{};
  for (int v = 0; v < 256; ++v) lut[v] = round_half_up(255.0 * std::pow(v / 255.0, gamma));
  GrayImage out = img;
  for (auto& p : out.pixels()) p = lut[p];
  return out;
}

}  // namespace ocular
