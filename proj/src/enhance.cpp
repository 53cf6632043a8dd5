#include "ocular/enhance.hpp"

#include <cmath>

namespace ocular::enhance {

Histogram256 histogram(const GrayImage& img) {
  Histogram256 h{};
  for (std::uint8_t v : img.pixels()) ++h[v];
  return h;
}

namespace {

using Lut = std::array<std::uint8_t, 256>;

int count_levels(const Histogram256& h) {
  int n = 0;
  for (auto c : h) n += c > 0;
  return n;
}

// Equalizing map for the pixels counted in h. Levels absent from h map to
// lo; callers only look up present levels.
Lut equalize_lut(const Histogram256& h, int lo, int hi) {
  Lut lut;
  lut.fill(static_cast<std::uint8_t>(lo));
  std::uint64_t total = 0;
  for (auto c : h) total += c;
  if (total == 0 || hi <= lo || count_levels(h) == 1) return lut;
  const auto span = static_cast<std::uint64_t>(hi - lo);
  std::uint64_t cdf = 0;
  for (int v = 0; v < 256; ++v) {
    cdf += h[v];
    lut[v] = static_cast<std::uint8_t>(lo + span * cdf / total);
  }
  return lut;
}

}  // namespace

GrayImage hist_equalize(const GrayImage& img, int range_lo, int range_hi) {
  if (img.empty()) throw Error(ErrorCode::size, "cannot equalize an empty image");
  if (range_lo < 0 || range_hi > 255 || range_lo >= range_hi)
    throw Error(ErrorCode::parameter, "equalization range must satisfy 0 <= lo < hi <= 255");
  const Lut lut = equalize_lut(histogram(img), range_lo, range_hi);
  GrayImage out = img;
  for (auto& p : out.pixels()) p = lut[p];
  return out;
}

GrayImage bhe(const GrayImage& img) {
  const Histogram256 h = histogram(img);
  double sum = 0.0;
  int min_level = 255;
  int max_level = 0;
  for (int v = 0; v < 256; ++v) {
    if (!h[v]) continue;
    sum += static_cast<double>(h[v]) * v;
    min_level = std::min(min_level, v);
    max_level = std::max(max_level, v);
  }
  const double mean = sum / static_cast<double>(img.size());
  const int split = static_cast<int>(std::floor(mean));

  Histogram256 lower{}, upper{};
  for (int v = 0; v < 256; ++v) (v <= split ? lower : upper)[v] = h[v];
  const Lut lo_lut = equalize_lut(lower, min_level, split);
  const Lut hi_lut = equalize_lut(upper, std::min(split + 1, max_level), max_level);

  GrayImage out = img;
  for (auto& p : out.pixels()) p = p <= split ? lo_lut[p] : hi_lut[p];
  return out;
}

GrayImage clahe(const GrayImage& img, const ClaheParams& p) {
  if (p.tile < 8) throw Error(ErrorCode::parameter, "CLAHE tile must be at least 8 px");
  if (!(p.clip >= 1.0)) throw Error(ErrorCode::parameter, "CLAHE clip limit must be >= 1");
  const int t = p.tile;
  const int nx = (img.width() + t - 1) / t;
  const int ny = (img.height() + t - 1) / t;
  const double n = static_cast<double>(t) * t;
  const double limit = std::isinf(p.clip) ? std::numeric_limits<double>::infinity() : p.clip * n / 256.0;

  // Tile mappings on the edge-replicated padded image.
  std::vector<std::array<double, 256>> maps(static_cast<std::size_t>(nx) * ny);
  for (int ty = 0; ty < ny; ++ty) {
    for (int tx = 0; tx < nx; ++tx) {
      std::array<double, 256> hist{};
      for (int y = ty * t; y < (ty + 1) * t; ++y)
        for (int x = tx * t; x < (tx + 1) * t; ++x) hist[img.clamped(x, y)] += 1.0;
      int levels = 0;
      double excess = 0.0;
      for (auto& c : hist) {
        levels += c > 0.0;
        if (c > limit) {
          excess += c - limit;
          c = limit;
        }
      }
      auto& m = maps[static_cast<std::size_t>(ty) * nx + tx];
      if (levels == 1 && excess == 0.0) {
        m.fill(0.0);
        continue;
      }
      const double bonus = excess / 256.0;
      double cdf = 0.0;
      for (int v = 0; v < 256; ++v) {
        cdf += hist[v] + bonus;
        m[v] = std::floor(255.0 * std::min(cdf, n) / n);
      }
    }
  }

  auto grid = [&](double pos, int count, int& i0, int& i1, double& w) {
    const double f = (pos - (t - 1) / 2.0) / t;
    i0 = static_cast<int>(std::floor(f));
    w = f - i0;
    if (i0 < 0) {
      i0 = 0;
      w = 0.0;
    }
    if (i0 >= count - 1) {
      i0 = count - 1;
      w = 0.0;
    }
    i1 = std::min(i0 + 1, count - 1);
  };

  GrayImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    int y0, y1;
    double wy;
    grid(y, ny, y0, y1, wy);
    for (int x = 0; x < img.width(); ++x) {
      int x0, x1;
      double wx;
      grid(x, nx, x0, x1, wx);
      const int v = img.at(x, y);
      const auto at = [&](int i, int j) { return maps[static_cast<std::size_t>(j) * nx + i][v]; };
      const double top = (1.0 - wx) * at(x0, y0) + wx * at(x1, y0);
      const double bot = (1.0 - wx) * at(x0, y1) + wx * at(x1, y1);
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::round((1.0 - wy) * top + wy * bot), 0.0, 255.0));
    }
  }
  return out;
}

int otsu_threshold(const Histogram256& hist) {
  int lo = -1, hi = -1;
  double total_n = 0.0, total_s = 0.0;
  for (int v = 0; v < 256; ++v) {
    if (!hist[v]) continue;
    if (lo < 0) lo = v;
    hi = v;
    total_n += static_cast<double>(hist[v]);
    total_s += static_cast<double>(hist[v]) * v;
  }
  if (lo < 0) throw Error(ErrorCode::size, "empty histogram");
  if (lo == hi) return lo;

  int best_t = lo + 1;
  double best = -1.0;
  double n0 = 0.0, s0 = 0.0;
  for (int t = lo + 1; t <= hi; ++t) {
    n0 += static_cast<double>(hist[t - 1]);
    s0 += static_cast<double>(hist[t - 1]) * (t - 1);
    const double n1 = total_n - n0;
    const double s1 = total_s - s0;
    if (n0 == 0.0 || n1 == 0.0) continue;
    const double diff = s0 / n0 - s1 / n1;
    const double between = n0 * n1 * diff * diff;
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

OtsuResult otsu(const GrayImage& img) {
  OtsuResult r;
  r.threshold = otsu_threshold(histogram(img));
  r.binary = BinaryImage(img.width(), img.height(), 0);
  for (std::size_t i = 0; i < img.size(); ++i)
    r.binary.pixels()[i] = img.pixels()[i] >= r.threshold ? 1 : 0;
  return r;
}

}  // namespace ocular::enhance
