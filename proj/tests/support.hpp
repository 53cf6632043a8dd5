#pragma once

// Shared fixtures and brute-force oracles for the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ocular/cascade.hpp"
#include "ocular/imgcore.hpp"

namespace testsupport {

using Rng = std::mt19937_64;

inline int rand_int(Rng& rng, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline double rand_real(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline ocular::GrayImage random_image(Rng& rng, int w, int h, int lo = 0, int hi = 255) {
  ocular::GrayImage img(w, h);
  for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(rand_int(rng, lo, hi));
  return img;
}

inline ocular::BinaryImage random_mask(Rng& rng, int w, int h, double density) {
  ocular::BinaryImage m(w, h);
  for (auto& p : m.pixels()) p = rand_real(rng, 0.0, 1.0) < density ? 1 : 0;
  return m;
}

/// Sum over r by visiting every pixel.
inline std::uint64_t pixel_sum(const ocular::GrayImage& img, const ocular::Rect& r) {
  std::uint64_t s = 0;
  for (int y = r.y; y < r.bottom(); ++y)
    for (int x = r.x; x < r.right(); ++x) s += img.at(x, y);
  return s;
}

/// Haar response at scale 1 from a per-pixel weight map: the feature box is
/// cut into its cell grid and each pixel takes the weight of its cell.
inline double haar_pixel_oracle(const ocular::GrayImage& img, const ocular::cascade::HaarFeature& f, int ox,
                                int oy) {
  using K = ocular::cascade::FeatureKind;
  int cols = 2, rows = 1;
  if (f.kind == K::two_v) cols = 1, rows = 2;
  if (f.kind == K::three_h) cols = 3, rows = 1;
  if (f.kind == K::three_v) cols = 1, rows = 3;
  if (f.kind == K::four) cols = 2, rows = 2;
  const int cw = f.base.w / cols, ch = f.base.h / rows;
  double acc = 0.0;
  for (int y = 0; y < f.base.h; ++y) {
    for (int x = 0; x < f.base.w; ++x) {
      const int c = x / cw, r = y / ch;
      double w = 0.0;
      switch (f.kind) {
        case K::two_h: w = c == 0 ? 1 : -1; break;
        case K::two_v: w = r == 0 ? 1 : -1; break;
        case K::three_h: w = c == 1 ? 2 : -1; break;
        case K::three_v: w = r == 1 ? 2 : -1; break;
        case K::four: w = (c + r) % 2 == 0 ? 1 : -1; break;
      }
      acc += w * img.at(ox + f.base.x + x, oy + f.base.y + y);
    }
  }
  return acc;
}

/// Population standard deviation over r, two-pass.
inline double pixel_stddev(const ocular::GrayImage& img, const ocular::Rect& r) {
  double mean = 0.0;
  for (int y = r.y; y < r.bottom(); ++y)
    for (int x = r.x; x < r.right(); ++x) mean += img.at(x, y);
  mean /= static_cast<double>(r.area());
  double var = 0.0;
  for (int y = r.y; y < r.bottom(); ++y)
    for (int x = r.x; x < r.right(); ++x) var += (img.at(x, y) - mean) * (img.at(x, y) - mean);
  return std::sqrt(var / static_cast<double>(r.area()));
}

/// Approximately 1/f texture: octaves of bilinearly interpolated random
/// grids, amplitude proportional to the cell size, scaled to the requested
/// mean and standard deviation and clipped to [0, 255].
inline ocular::GrayImage natural_image(Rng& rng, int w, int h, double mean, double sd) {
  std::vector<double> acc(static_cast<std::size_t>(w) * h, 0.0);
  for (int cell = 2; cell <= std::max(w, h); cell *= 2) {
    const int gw = w / cell + 2, gh = h / cell + 2;
    std::vector<double> grid(static_cast<std::size_t>(gw) * gh);
    for (auto& g : grid) g = rand_real(rng, -1.0, 1.0) * cell;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double gx = static_cast<double>(x) / cell, gy = static_cast<double>(y) / cell;
        const int ix = static_cast<int>(gx), iy = static_cast<int>(gy);
        const double fx = gx - ix, fy = gy - iy;
        auto at = [&](int i, int j) { return grid[static_cast<std::size_t>(j) * gw + i]; };
        acc[static_cast<std::size_t>(y) * w + x] += (1 - fy) * ((1 - fx) * at(ix, iy) + fx * at(ix + 1, iy)) +
                                                    fy * ((1 - fx) * at(ix, iy + 1) + fx * at(ix + 1, iy + 1));
      }
  }
  double m = 0.0, v = 0.0;
  for (double a : acc) m += a;
  m /= static_cast<double>(acc.size());
  for (double a : acc) v += (a - m) * (a - m);
  const double s = std::sqrt(v / static_cast<double>(acc.size()));
  ocular::GrayImage img(w, h);
  for (std::size_t i = 0; i < acc.size(); ++i)
    img.pixels()[i] = static_cast<std::uint8_t>(std::clamp(std::lround(mean + sd * (acc[i] - m) / s), 0L, 255L));
  return img;
}

/// Code of the ocular::Error thrown by f, if any.
template <typename F>
std::optional<ocular::ErrorCode> error_code_of(F&& f) {
  try {
    f();
  } catch (const ocular::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline double mean_of(const ocular::GrayImage& img) {
  double s = 0.0;
  for (auto p : img.pixels()) s += p;
  return s / static_cast<double>(img.size());
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("ocular_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Same file names with byte-identical contents, recursively.
inline bool same_tree(const std::filesystem::path& a, const std::filesystem::path& b, std::string* why = nullptr) {
  namespace fs = std::filesystem;
  std::vector<fs::path> fa, fb;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) fa.push_back(fs::relative(e.path(), a));
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) fb.push_back(fs::relative(e.path(), b));
  std::sort(fa.begin(), fa.end());
  std::sort(fb.begin(), fb.end());
  if (fa != fb) {
    if (why) *why = "file sets differ";
    return false;
  }
  for (const auto& f : fa) {
    if (slurp(a / f) != slurp(b / f)) {
      if (why) *why = f.string() + " differs";
      return false;
    }
  }
  return !fa.empty();
}

}  // namespace testsupport
