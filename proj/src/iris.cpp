#include "ocular/iris.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <deque>
#include <numbers>
#include <numeric>

namespace ocular::iris {

ProjectionCurves projection_curves(const GrayImage& eye, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::parameter, "alpha must lie in [0, 1]");
  const int w = eye.width();
  const int h = eye.height();
  ProjectionCurves c;
  c.alpha = alpha;
  c.ipf_v.assign(w, 0.0);
  c.vpf_v.assign(w, 0.0);
  c.ipf_h.assign(h, 0.0);
  c.vpf_h.assign(h, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      c.ipf_v[x] += eye.at(x, y);
      c.ipf_h[y] += eye.at(x, y);
    }
  for (auto& v : c.ipf_v) v /= h;
  for (auto& v : c.ipf_h) v /= w;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double dv = eye.at(x, y) - c.ipf_v[x];
      const double dh = eye.at(x, y) - c.ipf_h[y];
      c.vpf_v[x] += dv * dv;
      c.vpf_h[y] += dh * dh;
    }
  for (auto& v : c.vpf_v) v /= h;
  for (auto& v : c.vpf_h) v /= w;
  c.gpf_v.resize(w);
  c.gpf_h.resize(h);
  for (int x = 0; x < w; ++x) c.gpf_v[x] = (1.0 - alpha) * c.ipf_v[x] + alpha * c.vpf_v[x];
  for (int y = 0; y < h; ++y) c.gpf_h[y] = (1.0 - alpha) * c.ipf_h[y] + alpha * c.vpf_h[y];
  return c;
}

std::vector<int> find_peaks(const std::vector<double>& curve, int min_separation) {
  const int n = static_cast<int>(curve.size());
  if (n < 3) return {};
  const double mean = std::accumulate(curve.begin(), curve.end(), 0.0) / n;
  double var = 0.0;
  for (double v : curve) var += (v - mean) * (v - mean);
  const double floor = mean + std::sqrt(var / n);
  std::vector<int> cand;
  for (int i = 0; i < n; ++i) {
    const double left = i > 0 ? curve[i - 1] : -std::numeric_limits<double>::infinity();
    const double right = i + 1 < n ? curve[i + 1] : -std::numeric_limits<double>::infinity();
    if (curve[i] > floor && curve[i] >= left && curve[i] > right) cand.push_back(i);
  }
  std::stable_sort(cand.begin(), cand.end(), [&](int a, int b) { return curve[a] > curve[b]; });
  std::vector<int> kept;
  for (int c : cand) {
    bool ok = true;
    for (int k : kept) ok = ok && std::abs(c - k) >= min_separation;
    if (ok) kept.push_back(c);
  }
  return kept;
}

std::optional<GpfResult> gpf_center(const GrayImage& eye, double alpha) {
  if (eye.width() < 16 || eye.height() < 12) throw Error(ErrorCode::size, "eye region must be at least 16x12");
  GpfResult r;
  r.curves = projection_curves(eye, alpha);
  const auto& g = r.curves.gpf_v;
  const int w = eye.width();
  std::vector<double> edge(w, 0.0);
  for (int x = 1; x + 1 < w; ++x) edge[x] = std::abs(g[x + 1] - g[x - 1]) / 2.0;
  const auto peaks = find_peaks(edge, std::max(2, w / 8));
  if (peaks.size() < 2) return std::nullopt;
  r.cx = 0.5 * (peaks[0] + peaks[1]);
  // The peak of GPF_h is flat on top (equal chord lengths through the disk
  // center), so its location is taken at half height rather than at the
  // first maximal row.
  const auto& gh = r.curves.gpf_h;
  const int h = static_cast<int>(gh.size());
  const int top = static_cast<int>(std::max_element(gh.begin(), gh.end()) - gh.begin());
  const double half = 0.5 * (gh[top] + *std::min_element(gh.begin(), gh.end()));
  int a = top, b = top;
  while (a > 0 && gh[a - 1] >= half) --a;
  while (b + 1 < h && gh[b + 1] >= half) ++b;
  double lo = a, hi = b;
  if (a > 0) lo = a - (gh[a] - half) / (gh[a] - gh[a - 1]);
  if (b + 1 < h) hi = b + (gh[b] - half) / (gh[b] - gh[b + 1]);
  r.cy = 0.5 * (lo + hi);
  return r;
}

RealImage esi_beta(const GrayImage& eye) {
  RealImage beta(eye.width(), eye.height(), 1.0);
  for (int y = 0; y < eye.height(); ++y) {
    for (int x = 0; x < eye.width(); ++x) {
      double mean = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) mean += eye.clamped(x + dx, y + dy);
      mean /= 9.0;
      double var = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const double d = eye.clamped(x + dx, y + dy) - mean;
          var += d * d;
        }
      var /= 9.0;
      if (mean > 0.0) beta.at(x, y) = mean * mean / (mean * mean + var);
    }
  }
  return beta;
}

GrayImage esi_edge_map(const GrayImage& eye) {
  const RealImage beta = esi_beta(eye);
  GrayImage out(eye.width(), eye.height());
  for (std::size_t i = 0; i < out.size(); ++i)
    out.pixels()[i] = static_cast<std::uint8_t>(std::floor(255.0 * (1.0 - beta.pixels()[i]) + 0.5));
  return out;
}

GrayImage remove_glint(const GrayImage& eye, int radius) { return morph(eye, MorphOp::open, radius); }

Kernel gaussian_kernel() {
  std::vector<double> w = {2, 4,  5,  4,  2,  4, 9,  12, 9,  4, 5, 12, 15,
                           12, 5, 4, 9, 12, 9, 4, 2, 4,  5,  4, 2};
  for (double& v : w) v /= 159.0;
  return Kernel(5, std::move(w));
}

Kernel sobel_x() { return Kernel(3, {1, 0, -1, 2, 0, -2, 1, 0, -1}); }
Kernel sobel_y() { return Kernel(3, {1, 2, 1, 0, 0, 0, -1, -2, -1}); }

CannyStages canny_stages(const GrayImage& img, double t_low, double t_high) {
  if (!(t_low < t_high)) throw Error(ErrorCode::parameter, "Canny needs t_low < t_high");
  const int w = img.width();
  const int h = img.height();
  CannyStages s;
  s.smoothed = convolve_real(img, gaussian_kernel());
  s.gx = convolve_real(s.smoothed, sobel_x());
  s.gy = convolve_real(s.smoothed, sobel_y());
  s.magnitude = RealImage(w, h, 0.0);
  s.sector = GrayImage(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = s.gx.at(x, y), gy = s.gy.at(x, y);
      s.magnitude.at(x, y) = std::sqrt(gx * gx + gy * gy);
      double deg = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
      if (deg < 0.0) deg += 180.0;
      s.sector.at(x, y) = static_cast<std::uint8_t>(static_cast<int>(std::lround(deg / 45.0)) % 4);
    }
  }

  // Neighbors compared along the gradient: the first must be strictly
  // weaker, the second weaker or equal, so plateaus two pixels wide keep one.
  static constexpr int kCmp[4][4] = {
      {-1, 0, 1, 0},    // gradient 0 deg: west / east
      {-1, -1, 1, 1},   // 45 deg (down-right in image rows): north-west / south-east
      {0, -1, 0, 1},    // 90 deg: north / south
      {1, -1, -1, 1},   // 135 deg: north-east / south-west
  };
  auto mag = [&](int x, int y) { return s.magnitude.contains(x, y) ? s.magnitude.at(x, y) : 0.0; };
  s.suppressed = RealImage(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double m = s.magnitude.at(x, y);
      const int* c = kCmp[s.sector.at(x, y)];
      if (m > mag(x + c[0], y + c[1]) && m >= mag(x + c[2], y + c[3])) s.suppressed.at(x, y) = m;
    }
  }

  s.edges = BinaryImage(w, h, 0);
  std::deque<Point> queue;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (s.suppressed.at(x, y) >= t_high) {
        s.edges.at(x, y) = 1;
        queue.push_back({x, y});
      }
  while (!queue.empty()) {
    const Point p = queue.front();
    queue.pop_front();
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = p.x + dx, ny = p.y + dy;
        if (!s.edges.contains(nx, ny) || s.edges.at(nx, ny) || s.suppressed.at(nx, ny) < t_low) continue;
        s.edges.at(nx, ny) = 1;
        queue.push_back({nx, ny});
      }
  }
  return s;
}

BinaryImage canny(const GrayImage& img, double t_low, double t_high) { return canny_stages(img, t_low, t_high).edges; }

std::vector<Point> circle_offsets(int r) {
  std::vector<Point> out;
  for (int dy = -r - 1; dy <= r + 1; ++dy)
    for (int dx = -r - 1; dx <= r + 1; ++dx)
      if (std::abs(std::sqrt(static_cast<double>(dx * dx + dy * dy)) - r) < 0.5) out.push_back({dx, dy});
  return out;
}

namespace {

std::vector<Point> edge_pixels(const BinaryImage& edges) {
  std::vector<Point> pts;
  for (int y = 0; y < edges.height(); ++y)
    for (int x = 0; x < edges.width(); ++x)
      if (edges.at(x, y)) pts.push_back({x, y});
  return pts;
}

}  // namespace

std::optional<Circle> hough_circle(const BinaryImage& edges, int rmin, int rmax, const std::optional<Rect>& centers) {
  const int w = edges.width();
  const int h = edges.height();
  if (rmin < 3) throw Error(ErrorCode::parameter, "rmin must be >= 3");
  if (rmax > std::min(w, h) / 2 || rmax < rmin) throw Error(ErrorCode::parameter, "rmax must lie in [rmin, min(w,h)/2]");
  const auto pts = edge_pixels(edges);
  if (pts.empty()) return std::nullopt;
  std::optional<Circle> best;
  std::vector<int> acc(static_cast<std::size_t>(w) * h);
  for (int r = rmin; r <= rmax; ++r) {
    std::fill(acc.begin(), acc.end(), 0);
    for (const Point& off : circle_offsets(r)) {
      for (const Point& p : pts) {
        const int cx = p.x - off.x, cy = p.y - off.y;
        if (cx >= 0 && cy >= 0 && cx < w && cy < h) ++acc[static_cast<std::size_t>(cy) * w + cx];
      }
    }
    for (int cy = 0; cy < h; ++cy)
      for (int cx = 0; cx < w; ++cx) {
        const int v = acc[static_cast<std::size_t>(cy) * w + cx];
        if (centers && !(cx >= centers->x && cy >= centers->y && cx < centers->right() && cy < centers->bottom()))
          continue;
        if (v > 0 && (!best || v > best->votes)) best = Circle{cx, cy, r, v};
      }
  }
  return best;
}

namespace {

// Algebraic (Kasa) circle fit through the given points.
std::optional<IrisFix> fit_circle(const std::vector<Point>& pts) {
  if (pts.size() < 5) return std::nullopt;
  Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
  Eigen::Vector3d atb = Eigen::Vector3d::Zero();
  for (const Point& p : pts) {
    const Eigen::Vector3d row(p.x, p.y, 1.0);
    ata += row * row.transpose();
    atb += row * -(static_cast<double>(p.x) * p.x + static_cast<double>(p.y) * p.y);
  }
  const Eigen::Vector3d sol = ata.ldlt().solve(atb);
  if (!sol.allFinite()) return std::nullopt;
  IrisFix f;
  f.cx = -sol[0] / 2.0;
  f.cy = -sol[1] / 2.0;
  const double r2 = f.cx * f.cx + f.cy * f.cy - sol[2];
  if (!(r2 > 0.0)) return std::nullopt;
  f.r = std::sqrt(r2);
  return f;
}

}  // namespace

std::optional<IrisFix> iris_center(const GrayImage& eye, const IrisConfig& cfg, const std::optional<Rect>& centers) {
  const int rmin = cfg.rmin > 0 ? cfg.rmin : std::max(3, eye.height() / 6);
  const int rmax = cfg.rmax > 0 ? cfg.rmax : std::min(eye.width(), eye.height()) / 2;
  if (rmax < rmin) throw Error(ErrorCode::size, "eye crop too small for the radius range");
  GrayImage g = gamma_correct(eye, cfg.gamma);
  if (cfg.glint_radius > 0) g = remove_glint(g, cfg.glint_radius);
  const BinaryImage edges = canny(g, cfg.t_low, cfg.t_high);
  const auto circle = hough_circle(edges, rmin, rmax, centers);
  if (!circle) return std::nullopt;

  const auto pts = edge_pixels(edges);
  const double density = static_cast<double>(pts.size()) / static_cast<double>(edges.size());
  const double support = static_cast<double>(circle->votes) / static_cast<double>(circle_offsets(circle->r).size());
  if (support < std::max(cfg.min_support, cfg.density_factor * density)) return std::nullopt;

  IrisFix fix{static_cast<double>(circle->cx), static_cast<double>(circle->cy), static_cast<double>(circle->r), support};
  std::vector<Point> near;
  for (const Point& p : pts) {
    const double d = std::hypot(p.x - circle->cx, p.y - circle->cy);
    if (std::abs(d - circle->r) <= 1.5) near.push_back(p);
  }
  if (auto fit = fit_circle(near)) {
    if (std::hypot(fit->cx - fix.cx, fit->cy - fix.cy) <= 2.0 && std::abs(fit->r - fix.r) <= 2.0) {
      fix.cx = fit->cx;
      fix.cy = fit->cy;
      fix.r = fit->r;
    }
  }
  return fix;
}

RealImage corner_response(const GrayImage& img) {
  const int w = img.width();
  const int h = img.height();
  RealImage ix(w, h), iy(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      ix.at(x, y) = (img.clamped(x + 1, y) - img.clamped(x - 1, y)) / 2.0;
      iy.at(x, y) = (img.clamped(x, y + 1) - img.clamped(x, y - 1)) / 2.0;
    }
  RealImage out(w, h, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double a = 0, b = 0, c = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const double gx = ix.clamped(x + dx, y + dy), gy = iy.clamped(x + dx, y + dy);
          a += gx * gx;
          b += gx * gy;
          c += gy * gy;
        }
      out.at(x, y) = 0.5 * (a + c) - std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    }
  return out;
}

std::optional<EyeCorners> eye_corners(const GrayImage& eye, const CornerConfig& cfg) {
  if (eye.width() < 10 || eye.height() < 5) throw Error(ErrorCode::size, "eye crop too small for corner search");
  const RealImage resp = corner_response(eye);
  const int w = eye.width();
  const int band = std::max(1, static_cast<int>(std::lround(cfg.band * w)));
  double global = 0.0;
  for (double v : resp.pixels()) global = std::max(global, v);
  if (!(global > 0.0)) return std::nullopt;

  auto strongest = [&](int x0, int x1) -> std::optional<PointF> {
    double best = -1.0;
    PointF p;
    for (int y = 0; y < eye.height(); ++y)
      for (int x = x0; x < x1; ++x)
        if (resp.at(x, y) > best) {
          best = resp.at(x, y);
          p = {static_cast<double>(x), static_cast<double>(y)};
        }
    if (best < cfg.relative_floor * global) return std::nullopt;
    return p;
  };
  const auto left = strongest(0, band);
  const auto right = strongest(w - band, w);
  if (!left || !right) return std::nullopt;
  EyeCorners c;
  c.temporal = cfg.temporal_on_right ? *right : *left;
  c.nasal = cfg.temporal_on_right ? *left : *right;
  c.eye_width = std::abs(right->x - left->x);
  return c;
}

std::vector<SaccadeRecord> saccade_params(const std::vector<double>& theta, double fps,
                                          std::optional<double> v_thresh) {
  if (!(fps > 0.0)) throw Error(ErrorCode::parameter, "fps must be positive");
  std::vector<SaccadeRecord> out;
  const std::size_t n = theta.size();
  if (n < 2) return out;
  std::vector<double> v(n, 0.0);
  double vmax = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    v[k] = (theta[k] - theta[k - 1]) * fps;
    vmax = std::max(vmax, std::abs(v[k]));
  }
  if (vmax == 0.0) return out;
  const double thresh = v_thresh.value_or(0.15 * vmax);

  std::size_t k = 1;
  while (k < n) {
    if (!(std::abs(v[k]) > thresh)) {
      ++k;
      continue;
    }
    std::size_t end = k;
    while (end + 1 < n && std::abs(v[end + 1]) > thresh) ++end;
    SaccadeRecord r;
    r.onset = static_cast<int>(k - 1);
    r.offset = static_cast<int>(end);
    r.amplitude = theta[end] - theta[k - 1];
    std::size_t kmax = k - 1, kmin = k - 1;
    for (std::size_t i = k - 1; i <= end; ++i) {
      r.peak_velocity = i >= k ? std::max(r.peak_velocity, std::abs(v[i])) : r.peak_velocity;
      if (theta[i] > theta[kmax]) kmax = i;
      if (theta[i] < theta[kmin]) kmin = i;
    }
    r.duration = std::abs(static_cast<double>(kmax) - static_cast<double>(kmin)) / fps;
    if (r.duration > 0.0) {
      r.sr = r.peak_velocity / r.duration;
      out.push_back(r);
    }
    k = end + 1;
  }
  return out;
}

double percent_error(double truth, double estimate) {
  if (truth == 0.0) throw Error(ErrorCode::domain, "percent error undefined for a zero reference");
  return 100.0 * (truth - estimate) / truth;
}

}  // namespace ocular::iris
