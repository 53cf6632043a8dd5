#include "ocular/subspace.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

namespace ocular::subspace {

EigenPairs symmetric_eigen(const std::vector<double>& input, std::size_t n) {
  if (input.size() != n * n) throw Error(ErrorCode::size, "matrix size mismatch");
  std::vector<double> a = input;
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  auto A = [&](std::size_t r, std::size_t c) -> double& { return a[r * n + c]; };

  double scale = 0.0;
  for (double x : a) scale += x * x;
  scale = std::sqrt(scale);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
    if (std::sqrt(off) <= 1e-15 * scale || off == 0.0) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p], vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return A(i, i) > A(j, j); });
  EigenPairs out;
  for (std::size_t idx : order) {
    out.values.push_back(A(idx, idx));
    std::vector<double> vec(n);
    for (std::size_t k = 0; k < n; ++k) vec[k] = v[k * n + idx];
    out.vectors.push_back(std::move(vec));
  }
  return out;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_dim(const SubspaceModel& m, const std::vector<double>& vec) {
  if (vec.size() != m.dim) throw Error(ErrorCode::input, "vector length does not match model dimension");
}

}  // namespace

SubspaceModel pca_train(const std::vector<std::vector<double>>& vectors, std::size_t k) {
  const std::size_t p = vectors.size();
  if (p < 2) throw Error(ErrorCode::input, "PCA needs at least two vectors");
  if (k < 1 || k > p - 1) throw Error(ErrorCode::parameter, "K must lie in [1, P-1]");
  const std::size_t dim = vectors.front().size();
  if (dim == 0) throw Error(ErrorCode::input, "empty training vectors");
  for (const auto& v : vectors)
    if (v.size() != dim) throw Error(ErrorCode::input, "training vectors differ in length");

  SubspaceModel m;
  m.dim = dim;
  m.mean.assign(dim, 0.0);
  for (const auto& v : vectors)
    for (std::size_t i = 0; i < dim; ++i) m.mean[i] += v[i];
  for (double& x : m.mean) x /= static_cast<double>(p);

  std::vector<std::vector<double>> phi(p, std::vector<double>(dim));
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t i = 0; i < dim; ++i) phi[j][i] = vectors[j][i] - m.mean[i];

  std::vector<double> gram(p * p);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a; b < p; ++b) gram[a * p + b] = gram[b * p + a] = dot(phi[a], phi[b]);

  const EigenPairs eig = symmetric_eigen(gram, p);
  const double top = eig.values.front();
  if (!(top > 0.0)) throw Error(ErrorCode::rank, "training vectors are all identical");
  if (eig.values[k - 1] <= 1e-12 * top)
    throw Error(ErrorCode::rank, "training data spans fewer than K dimensions");

  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double> u(dim, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
      const double w = eig.vectors[c][j];
      for (std::size_t i = 0; i < dim; ++i) u[i] += w * phi[j][i];
    }
    // Re-orthogonalize against earlier components to absorb round-off.
    for (const auto& prev : m.basis) {
      const double d = dot(u, prev);
      for (std::size_t i = 0; i < dim; ++i) u[i] -= d * prev[i];
    }
    const double norm = std::sqrt(dot(u, u));
    if (!(norm > 0.0)) throw Error(ErrorCode::rank, "degenerate principal component");
    std::size_t arg = 0;
    for (std::size_t i = 0; i < dim; ++i) {
      u[i] /= norm;
      if (std::abs(u[i]) > std::abs(u[arg])) arg = i;
    }
    if (u[arg] < 0.0)
      for (double& x : u) x = -x;
    m.basis.push_back(std::move(u));
    m.eigenvalues.push_back(eig.values[c] / static_cast<double>(p));
  }
  return m;
}

std::vector<double> project(const SubspaceModel& m, const std::vector<double>& vec) {
  check_dim(m, vec);
  std::vector<double> phi(m.dim);
  for (std::size_t i = 0; i < m.dim; ++i) phi[i] = vec[i] - m.mean[i];
  std::vector<double> w(m.k());
  for (std::size_t c = 0; c < m.k(); ++c) w[c] = dot(phi, m.basis[c]);
  return w;
}

double reconstruction_error(const SubspaceModel& m, const std::vector<double>& vec) {
  const auto w = project(m, vec);
  std::vector<double> r(m.dim);
  for (std::size_t i = 0; i < m.dim; ++i) r[i] = vec[i] - m.mean[i];
  for (std::size_t c = 0; c < m.k(); ++c)
    for (std::size_t i = 0; i < m.dim; ++i) r[i] -= w[c] * m.basis[c][i];
  return std::sqrt(dot(r, r));
}

std::vector<double> normalize_window(const GrayImage& patch) {
  std::vector<double> v = to_vector(patch);
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / n);
  for (double& x : v) x = sd > 0.0 ? (x - mean) / sd : 0.0;
  return v;
}

std::vector<double> window_vector(const GrayImage& patch, int window_w, int window_h) {
  return normalize_window(resize_bicubic(patch, window_w, window_h));
}

std::vector<int> window_grid(int extent, int size, double overlap) {
  if (size > extent) throw Error(ErrorCode::size, "window larger than search region");
  const int stride = std::max(1, size - static_cast<int>(std::lround(overlap * size)));
  std::vector<int> out;
  for (int p = 0; p + size <= extent; p += stride) out.push_back(p);
  if (out.back() + size < extent) out.push_back(extent - size);
  return out;
}

SubspaceHit subspace_detect(const GrayImage& roi, const SubspaceModel& m, const DetectParams& p) {
  if (roi.width() < 8 || roi.height() < 8) throw Error(ErrorCode::size, "ROI smaller than 8x8");
  if (static_cast<std::size_t>(p.window_w) * p.window_h != m.dim)
    throw Error(ErrorCode::input, "window size does not match model dimension");
  const bool resize = p.resize_w > 0 && p.resize_h > 0;
  const GrayImage img = resize ? resize_bicubic(roi, p.resize_w, p.resize_h) : roi;
  const double sx = static_cast<double>(roi.width()) / img.width();
  const double sy = static_cast<double>(roi.height()) / img.height();

  SubspaceHit best;
  bool have = false;
  auto consider = [&](int x, int y) {
    const Rect r{x, y, p.window_w, p.window_h};
    const double e = reconstruction_error(m, normalize_window(crop(img, r)));
    if (!have || e < best.error) {
      best.error = e;
      best.resized_rect = r;
      have = true;
    }
  };
  const auto ys = window_grid(img.height(), p.window_h, p.overlap);
  const auto xs = window_grid(img.width(), p.window_w, p.overlap);
  for (int y : ys)
    for (int x : xs) consider(x, y);
  if (p.refine_step > 0) {
    const Rect c = best.resized_rect;
    const int rx = p.window_w - static_cast<int>(std::lround(p.overlap * p.window_w));
    const int ry = p.window_h - static_cast<int>(std::lround(p.overlap * p.window_h));
    for (int y = std::max(0, c.y - ry); y <= std::min(img.height() - p.window_h, c.y + ry); y += p.refine_step)
      for (int x = std::max(0, c.x - rx); x <= std::min(img.width() - p.window_w, c.x + rx); x += p.refine_step)
        consider(x, y);
  }
  const Rect& r = best.resized_rect;
  const int x0 = std::clamp(static_cast<int>(std::lround(r.x * sx)), 0, roi.width() - 1);
  const int y0 = std::clamp(static_cast<int>(std::lround(r.y * sy)), 0, roi.height() - 1);
  const int x1 = std::clamp(static_cast<int>(std::lround(r.right() * sx)), x0 + 1, roi.width());
  const int y1 = std::clamp(static_cast<int>(std::lround(r.bottom() * sy)), y0 + 1, roi.height());
  best.rect = Rect{x0, y0, x1 - x0, y1 - y0};
  return best;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

void write_row(std::ostream& out, const std::vector<double>& v) {
  char buf[40];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", v[i]);
    out << (i ? " " : "") << buf;
  }
  out << "\n";
}

std::vector<double> read_row(std::istream& in, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v)
    if (!(in >> x)) throw Error(ErrorCode::format, "subspace model: truncated vector");
  return v;
}

}  // namespace

void save_model(std::ostream& out, const SubspaceModel& m) {
  out << "ocular-subspace 1\n";
  out << "dim " << m.dim << " k " << m.k() << " window " << m.window_w << ' ' << m.window_h << "\n";
  write_row(out, m.mean);
  write_row(out, m.eigenvalues);
  for (const auto& u : m.basis) write_row(out, u);
}

void save_model(const std::string& path, const SubspaceModel& m) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  save_model(out, m);
}

SubspaceModel load_model(std::istream& in) {
  std::string tok;
  int version = 0;
  if (!(in >> tok >> version) || tok != "ocular-subspace" || version != 1)
    throw Error(ErrorCode::format, "not a subspace model");
  SubspaceModel m;
  std::size_t k = 0;
  std::string t1, t2, t3;
  if (!(in >> t1 >> m.dim >> t2 >> k >> t3 >> m.window_w >> m.window_h) || t1 != "dim" || t2 != "k" ||
      t3 != "window" || m.dim == 0)
    throw Error(ErrorCode::format, "subspace model: bad header");
  m.mean = read_row(in, m.dim);
  m.eigenvalues = read_row(in, k);
  for (std::size_t c = 0; c < k; ++c) m.basis.push_back(read_row(in, m.dim));
  return m;
}

SubspaceModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  return load_model(in);
}

}  // namespace ocular::subspace
