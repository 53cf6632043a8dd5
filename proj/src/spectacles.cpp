#include "ocular/spectacles.hpp"

#include <algorithm>

#include "ocular/error.hpp"

namespace ocular::spectacles {

Kernel dog_mask() {
  return Kernel(7, {0,  0,  -1, -1, -1, 0,  0,
                    0,  -2, -3, -3, -3, -2, 0,
                    -1, -3, 5,  5,  5,  -3, -1,
                    -1, -3, 5,  16, 5,  -3, -1,
                    -1, -3, 5,  5,  5,  -3, -1,
                    0,  -2, -3, -3, -3, -2, 0,
                    0,  0,  -1, -1, -1, 0,  0});
}

Kernel laplacian_mask() {
  std::vector<double> w(25, -1.0);
  w[12] = 24.0;
  return Kernel(5, std::move(w));
}

double detection_factor(double l1, double l2, double b) {
  if (!(b > 0.0)) throw Error(ErrorCode::parameter, "face breadth must be positive");
  if (l1 < 0.0 || l2 < 0.0) throw Error(ErrorCode::parameter, "component sizes must be non-negative");
  return (l1 + l2) / (1.5 * b);
}

double detection_factor(double l, double b) { return detection_factor(l, 0.0, b); }

BinaryImage thin(const BinaryImage& bin) {
  const int w = bin.width();
  const int h = bin.height();
  BinaryImage img = bin;
  auto px = [&](int x, int y) -> int { return img.contains(x, y) && img.at(x, y) ? 1 : 0; };
  std::vector<Point> marked;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      marked.clear();
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (!img.at(x, y)) continue;
          // P2..P9 clockwise from north.
          const int p[8] = {px(x, y - 1), px(x + 1, y - 1), px(x + 1, y),     px(x + 1, y + 1),
                            px(x, y + 1), px(x - 1, y + 1), px(x - 1, y),     px(x - 1, y - 1)};
          int b = 0;
          int a = 0;
          for (int i = 0; i < 8; ++i) {
            b += p[i];
            a += (p[i] == 0 && p[(i + 1) % 8] == 1);
          }
          if (b < 2 || b > 6 || a != 1) continue;
          if (pass == 0) {
            if (p[0] * p[2] * p[4] != 0 || p[2] * p[4] * p[6] != 0) continue;
          } else {
            if (p[0] * p[2] * p[6] != 0 || p[0] * p[4] * p[6] != 0) continue;
          }
          marked.push_back({x, y});
        }
      }
      for (const Point& m : marked) img.at(m.x, m.y) = 0;
      changed = changed || !marked.empty();
    }
  }
  return img;
}

namespace {

double component_length(const Component& c, LengthMeasure measure) {
  if (measure == LengthMeasure::pixels) return static_cast<double>(c.pixel_count);
  BinaryImage local(c.bounds.w, c.bounds.h);
  for (const Point& p : c.pixels) local.at(p.x - c.bounds.x, p.y - c.bounds.y) = 1;
  const BinaryImage sk = thin(local);
  return static_cast<double>(std::count(sk.pixels().begin(), sk.pixels().end(), 1));
}

}  // namespace

SpectacleResult detect_spectacles(const GrayImage& face, const SpectacleConfig& cfg) {
  if (face.width() == 0 || face.height() == 0) throw Error(ErrorCode::input, "empty face crop");
  if (cfg.keep < 1) throw Error(ErrorCode::parameter, "must keep at least one component");
  const GrayImage roi =
      cfg.upper_half ? crop(face, Rect{0, 0, face.width(), std::max(1, face.height() / 2)}) : face;

  SpectacleResult res;
  res.breadth = static_cast<double>(face.width());
  res.mask = BinaryImage(roi.width(), roi.height());

  const GrayImage enhanced = enhance::clahe(roi, cfg.clahe);
  const GrayImage spread = local_stddev(enhanced);
  const Kernel k = cfg.edge == EdgeMask::dog ? dog_mask() : laplacian_mask();
  const RealImage response = convolve_real(spread, k);
  const auto [lo, hi] = std::minmax_element(response.pixels().begin(), response.pixels().end());
  if (*lo == *hi) return res;  // flat response: nothing to threshold

  const GrayImage edges = normalize_to_gray(response);
  const BinaryImage binary = enhance::otsu(edges).binary;
  const BinaryImage cleaned = mask_from_components(
      roi.width(), roi.height(), connected_components(binary, cfg.min_component));
  const BinaryImage grown = dilate_square(cleaned, cfg.dilate_half);

  auto comps = connected_components(grown, 1);
  if (comps.size() > static_cast<std::size_t>(cfg.keep)) comps.resize(static_cast<std::size_t>(cfg.keep));
  res.mask = mask_from_components(roi.width(), roi.height(), comps);
  for (auto& c : comps) {
    const double len = component_length(c, cfg.length);
    res.components.push_back({std::move(c), len});
  }
  std::stable_sort(res.components.begin(), res.components.end(),
                   [](const FrameComponent& a, const FrameComponent& b) { return a.length > b.length; });

  const double l1 = res.components.empty() ? 0.0 : res.components[0].length;
  const double l2 = res.components.size() < 2 ? 0.0 : res.components[1].length;
  res.D = cfg.two_components ? detection_factor(l1, l2, res.breadth) : detection_factor(l1, res.breadth);
  res.detected = res.D >= 1.0;
  if (res.detected) res.eye_region = extract_eye_region(res, cfg.metric);
  return res;
}

BinaryImage eye_region_within(const SpectacleResult& result, DistanceMetric metric, double d_m) {
  if (!result.detected) throw Error(ErrorCode::state, "no spectacles detected; eye region undefined");
  const RealImage dist = distance_transform(result.mask, metric);
  BinaryImage region(dist.width(), dist.height());
  for (std::size_t i = 0; i < dist.size(); ++i) region.pixels()[i] = dist.pixels()[i] < d_m ? 1 : 0;
  return region;
}

BinaryImage extract_eye_region(const SpectacleResult& result, DistanceMetric metric) {
  if (!result.detected || result.components.empty())
    throw Error(ErrorCode::state, "no spectacles detected; eye region undefined");
  return eye_region_within(result, metric, 0.8 * result.components.front().length);
}

}  // namespace ocular::spectacles
