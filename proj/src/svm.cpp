#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "ocular/eyestate.hpp"

namespace ocular::eyestate {

double KernelSpec::operator()(const std::vector<double>& a, const std::vector<double>& b) const {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] * b[i];
  if (kind == KernelKind::linear) return d;
  const double base = gamma * d + coef0;
  double r = 1.0;
  for (int k = 0; k < degree; ++k) r *= base;
  return r;
}

double KernelClassifier::decision(const std::vector<double>& x) const {
  double s = bias;
  for (std::size_t i = 0; i < support_vectors.size(); ++i) s += coefficients[i] * kernel(support_vectors[i], x);
  return s;
}

namespace {

constexpr double kTau = 1e-12;

// Dual: min 1/2 a'Qa - e'a, 0 <= a <= C, y'a = 0, Q_ij = y_i y_j K_ij.
class SmoSolver {
 public:
  SmoSolver(const std::vector<std::vector<double>>& x, const std::vector<int>& y, const SvmParams& p)
      : n_(x.size()), y_(y), c_(p.C), tol_(p.tolerance), q_(n_ * n_), alpha_(n_, 0.0), grad_(n_, -1.0) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i; j < n_; ++j) q_[i * n_ + j] = q_[j * n_ + i] = y[i] * y[j] * p.kernel(x[i], x[j]);
    max_iter_ = p.max_iterations;
  }

  void solve() {
    for (long iter = 0; iter < max_iter_; ++iter) {
      std::size_t i, j;
      if (!select(i, j)) return;
      update(i, j);
    }
    throw Error(ErrorCode::numerical, "SMO did not converge within the iteration limit");
  }

  const std::vector<double>& alpha() const { return alpha_; }

  double rho() const {
    double ub = std::numeric_limits<double>::infinity();
    double lb = -ub;
    double sum_free = 0.0;
    int free = 0;
    for (std::size_t t = 0; t < n_; ++t) {
      const double yg = y_[t] * grad_[t];
      if (upper(t)) {
        if (y_[t] == -1) ub = std::min(ub, yg);
        else lb = std::max(lb, yg);
      } else if (lower(t)) {
        if (y_[t] == 1) ub = std::min(ub, yg);
        else lb = std::max(lb, yg);
      } else {
        ++free;
        sum_free += yg;
      }
    }
    return free > 0 ? sum_free / free : (ub + lb) / 2.0;
  }

 private:
  double Q(std::size_t i, std::size_t j) const { return q_[i * n_ + j]; }
  bool upper(std::size_t t) const { return alpha_[t] >= c_; }
  bool lower(std::size_t t) const { return alpha_[t] <= 0.0; }

  bool select(std::size_t& out_i, std::size_t& out_j) const {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmax2 = gmax;
    long gi = -1, gj = -1;
    for (std::size_t t = 0; t < n_; ++t) {
      if (y_[t] == 1) {
        if (!upper(t) && -grad_[t] >= gmax) {
          gmax = -grad_[t];
          gi = static_cast<long>(t);
        }
      } else if (!lower(t) && grad_[t] >= gmax) {
        gmax = grad_[t];
        gi = static_cast<long>(t);
      }
    }
    if (gi < 0) return false;
    const auto i = static_cast<std::size_t>(gi);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n_; ++t) {
      if (y_[t] == 1) {
        if (lower(t)) continue;
        const double diff = gmax + grad_[t];
        gmax2 = std::max(gmax2, grad_[t]);
        if (diff > 0.0) {
          double quad = Q(i, i) + Q(t, t) - 2.0 * y_[i] * Q(i, t);
          if (quad <= 0.0) quad = kTau;
          const double obj = -(diff * diff) / quad;
          if (obj <= best) {
            best = obj;
            gj = static_cast<long>(t);
          }
        }
      } else {
        if (upper(t)) continue;
        const double diff = gmax - grad_[t];
        gmax2 = std::max(gmax2, -grad_[t]);
        if (diff > 0.0) {
          double quad = Q(i, i) + Q(t, t) + 2.0 * y_[i] * Q(i, t);
          if (quad <= 0.0) quad = kTau;
          const double obj = -(diff * diff) / quad;
          if (obj <= best) {
            best = obj;
            gj = static_cast<long>(t);
          }
        }
      }
    }
    if (gmax + gmax2 < tol_ || gj < 0) return false;
    out_i = i;
    out_j = static_cast<std::size_t>(gj);
    return true;
  }

  void update(std::size_t i, std::size_t j) {
    const double old_i = alpha_[i], old_j = alpha_[j];
    double& ai = alpha_[i];
    double& aj = alpha_[j];
    if (y_[i] != y_[j]) {
      double quad = Q(i, i) + Q(j, j) + 2.0 * Q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad_[i] - grad_[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) {
          aj = 0.0;
          ai = diff;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = -diff;
      }
      if (diff > 0.0) {
        if (ai > c_) {
          ai = c_;
          aj = c_ - diff;
        }
      } else if (aj > c_) {
        aj = c_;
        ai = c_ + diff;
      }
    } else {
      double quad = Q(i, i) + Q(j, j) - 2.0 * Q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad_[i] - grad_[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > c_) {
        if (ai > c_) {
          ai = c_;
          aj = sum - c_;
        }
      } else if (aj < 0.0) {
        aj = 0.0;
        ai = sum;
      }
      if (sum > c_) {
        if (aj > c_) {
          aj = c_;
          ai = sum - c_;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = sum;
      }
    }
    const double di = ai - old_i, dj = aj - old_j;
    for (std::size_t t = 0; t < n_; ++t) grad_[t] += Q(i, t) * di + Q(j, t) * dj;
  }

  std::size_t n_;
  const std::vector<int>& y_;
  double c_;
  double tol_;
  long max_iter_ = 0;
  std::vector<double> q_;
  std::vector<double> alpha_;
  std::vector<double> grad_;
};

}  // namespace

KernelClassifier train_svm(const std::vector<std::vector<double>>& x, const std::vector<int>& labels,
                           const SvmParams& params) {
  if (x.empty() || x.size() != labels.size()) throw Error(ErrorCode::input, "samples and labels must align");
  bool pos = false, neg = false;
  for (int l : labels) {
    if (l == 1) pos = true;
    else if (l == -1) neg = true;
    else throw Error(ErrorCode::input, "labels must be +1 or -1");
  }
  if (!pos || !neg) throw Error(ErrorCode::input, "classifier training needs both classes");
  if (!(params.C > 0.0)) throw Error(ErrorCode::parameter, "C must be positive");
  const std::size_t dim = x.front().size();
  for (const auto& v : x)
    if (v.size() != dim) throw Error(ErrorCode::input, "samples differ in length");

  SvmParams p = params;
  if (p.kernel.kind == KernelKind::poly) {
    if (p.kernel.degree < 1) throw Error(ErrorCode::parameter, "polynomial degree must be >= 1");
    if (p.kernel.gamma <= 0.0) {
      double mean_var = 0.0;
      const double n = static_cast<double>(x.size());
      for (std::size_t f = 0; f < dim; ++f) {
        double m = 0.0, q = 0.0;
        for (const auto& v : x) m += v[f];
        m /= n;
        for (const auto& v : x) q += (v[f] - m) * (v[f] - m);
        mean_var += q / n;
      }
      mean_var /= static_cast<double>(dim);
      p.kernel.gamma = mean_var > 0.0 ? 1.0 / (static_cast<double>(dim) * mean_var) : 1.0 / dim;
    }
  }

  SmoSolver solver(x, labels, p);
  solver.solve();
  KernelClassifier clf;
  clf.kernel = p.kernel;
  clf.C = p.C;
  clf.bias = -solver.rho();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (solver.alpha()[i] <= 0.0) continue;
    clf.support_vectors.push_back(x[i]);
    clf.coefficients.push_back(solver.alpha()[i] * labels[i]);
  }
  return clf;
}

KernelClassifier classifier_train(const std::vector<std::vector<double>>& x, const std::vector<EyeState>& labels,
                                  const SvmParams& params) {
  std::vector<int> y;
  y.reserve(labels.size());
  for (auto s : labels) {
    if (s == EyeState::unknown) throw Error(ErrorCode::input, "training labels must be open or closed");
    y.push_back(s == EyeState::closed ? 1 : -1);
  }
  return train_svm(x, y, params);
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void save_classifier(std::ostream& out, const KernelClassifier& c) {
  out << "ocular-svm 1\n";
  out << "kernel " << (c.kernel.kind == KernelKind::linear ? "linear" : "poly") << " degree " << c.kernel.degree
      << " gamma " << fmt_real(c.kernel.gamma) << " coef0 " << fmt_real(c.kernel.coef0) << "\n";
  out << "C " << fmt_real(c.C) << " bias " << fmt_real(c.bias) << "\n";
  const std::size_t dim = c.support_vectors.empty() ? 0 : c.support_vectors.front().size();
  out << "sv " << c.support_vectors.size() << " dim " << dim << "\n";
  for (std::size_t i = 0; i < c.support_vectors.size(); ++i) {
    out << fmt_real(c.coefficients[i]);
    for (double v : c.support_vectors[i]) out << ' ' << fmt_real(v);
    out << "\n";
  }
}

void save_classifier(const std::string& path, const KernelClassifier& c) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  save_classifier(out, c);
}

KernelClassifier load_classifier(std::istream& in) {
  std::string tok, kind, t_deg, t_gamma, t_coef, t_c, t_bias, t_sv, t_dim;
  int version = 0;
  if (!(in >> tok >> version) || tok != "ocular-svm" || version != 1)
    throw Error(ErrorCode::format, "not a classifier file");
  KernelClassifier c;
  std::size_t count = 0, dim = 0;
  if (!(in >> tok >> kind >> t_deg >> c.kernel.degree >> t_gamma >> c.kernel.gamma >> t_coef >> c.kernel.coef0) ||
      tok != "kernel" || (kind != "linear" && kind != "poly"))
    throw Error(ErrorCode::format, "classifier: bad kernel line");
  c.kernel.kind = kind == "linear" ? KernelKind::linear : KernelKind::poly;
  if (!(in >> t_c >> c.C >> t_bias >> c.bias >> t_sv >> count >> t_dim >> dim) || t_c != "C" || t_sv != "sv")
    throw Error(ErrorCode::format, "classifier: bad header");
  for (std::size_t i = 0; i < count; ++i) {
    double coef = 0.0;
    std::vector<double> v(dim);
    if (!(in >> coef)) throw Error(ErrorCode::format, "classifier: truncated");
    for (auto& x : v)
      if (!(in >> x)) throw Error(ErrorCode::format, "classifier: truncated");
    c.coefficients.push_back(coef);
    c.support_vectors.push_back(std::move(v));
  }
  return c;
}

KernelClassifier load_classifier(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  return load_classifier(in);
}

}  // namespace ocular::eyestate
