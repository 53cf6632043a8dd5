#include "ocular/track.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ocular/error.hpp"

namespace ocular::track {

Mat4 default_q() { return Vec4(1.0, 1.0, 4.0, 4.0).asDiagonal(); }
Mat4 default_r() { return Vec4(4.0, 4.0, 16.0, 16.0).asDiagonal(); }

KfModel make_model(double T, const Mat4& Q, const Mat4& R) {
  if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorCode::parameter, "frame period must be positive");
  KfModel m;
  m.T = T;
  m.A << 1, 0, 1, 0,
         0, 1, 0, 1,
         0, 0, 1, 0,
         0, 0, 0, 1;
  m.B << T, 0,
         0, T,
         T, 0,
         0, T;
  m.H = Mat4::Identity();
  m.Q = Q;
  m.R = R;
  return m;
}

namespace {

Mat4 symmetrize(const Mat4& P) { return 0.5 * (P + P.transpose()); }

Mat4 innovation_inverse(const KfModel& m, const Mat4& P) {
  const Mat4 S = m.H * P * m.H.transpose() + m.R;
  Eigen::FullPivLU<Mat4> lu(S);
  if (!lu.isInvertible() || !std::isfinite(S.norm())) {
    std::string msg = "innovation covariance is singular (rank " + std::to_string(lu.rank()) +
                      ", max pivot " + std::to_string(lu.maxPivot()) + ")";
    throw Error(ErrorCode::numerical, msg);
  }
  return lu.inverse();
}

void require_finite(const Vec4& z) {
  if (!z.allFinite()) throw Error(ErrorCode::input, "measurement is not finite");
}

}  // namespace

KfState kf_step(const KfModel& m, const KfState& s, const Vec4& z, const Vec2& u) {
  require_finite(z);
  const Mat4 K = m.A * s.P * m.H.transpose() * innovation_inverse(m, s.P);
  KfState out;
  out.x = m.A * s.x + m.B * u + K * (z - m.H * s.x);
  out.P = symmetrize((m.A - K * m.H) * s.P * m.A.transpose() + m.Q);
  return out;
}

KfState kf_predict(const KfModel& m, const KfState& s, const Vec2& u) {
  KfState out;
  out.x = m.A * s.x + m.B * u;
  out.P = symmetrize(m.A * s.P * m.A.transpose() + m.Q);
  return out;
}

KfState kf_correct(const KfModel& m, const KfState& s, const Vec4& z) {
  require_finite(z);
  const Mat4 Kf = s.P * m.H.transpose() * innovation_inverse(m, s.P);
  KfState out;
  out.x = s.x + Kf * (z - m.H * s.x);
  out.P = symmetrize((Mat4::Identity() - Kf * m.H) * s.P);
  return out;
}

BoxConstraint position_box(double xmin, double xmax, double ymin, double ymax) {
  BoxConstraint c;
  c.D = Eigen::MatrixXd::Zero(2, 4);
  c.D(0, 0) = 1.0;
  c.D(1, 1) = 1.0;
  c.dmin = Eigen::Vector2d(xmin, ymin);
  c.dmax = Eigen::Vector2d(xmax, ymax);
  return c;
}

namespace {

Eigen::MatrixXd regularized(const Eigen::MatrixXd& sigma) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() == Eigen::Success) return sigma;
  return sigma + 1e-9 * Eigen::MatrixXd::Identity(sigma.rows(), sigma.cols());
}

}  // namespace

double qp_objective(const Eigen::VectorXd& x, const Eigen::VectorXd& xhat, const Eigen::MatrixXd& sigma) {
  const Eigen::MatrixXd W = regularized(sigma).inverse();
  return x.dot(W * x) - 2.0 * xhat.dot(W * x);
}

Eigen::VectorXd project_box(const Eigen::VectorXd& xhat, const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& D,
                            const Eigen::VectorXd& dmin, const Eigen::VectorXd& dmax) {
  const auto n = xhat.size();
  const auto s = D.rows();
  if (sigma.rows() != n || sigma.cols() != n || D.cols() != n || dmin.size() != s || dmax.size() != s)
    throw Error(ErrorCode::size, "constraint dimensions do not match the state");
  if (s > 4) throw Error(ErrorCode::size, "at most four constraint rows are supported");
  for (Eigen::Index i = 0; i < s; ++i)
    if (!(dmin[i] < dmax[i])) throw Error(ErrorCode::constraint, "infeasible box: d_min must be below d_max");

  const Eigen::VectorXd d = D * xhat;
  if (((d - dmin).array() >= 0.0).all() && ((dmax - d).array() >= 0.0).all()) return xhat;

  const Eigen::MatrixXd S = regularized(sigma);
  const Eigen::MatrixXd W = S.inverse();
  auto objective = [&](const Eigen::VectorXd& x) { return x.dot(W * x) - 2.0 * xhat.dot(W * x); };

  // Each row is free (0), pinned at d_min (1) or pinned at d_max (2).
  int combos = 1;
  for (Eigen::Index i = 0; i < s; ++i) combos *= 3;
  Eigen::VectorXd best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int code = 1; code < combos; ++code) {
    std::vector<Eigen::Index> rows;
    std::vector<double> targets;
    int c = code;
    for (Eigen::Index i = 0; i < s; ++i, c /= 3) {
      if (c % 3 == 0) continue;
      rows.push_back(i);
      targets.push_back(c % 3 == 1 ? dmin[i] : dmax[i]);
    }
    const auto a = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd Da(a, n);
    Eigen::VectorXd ba(a);
    for (Eigen::Index r = 0; r < a; ++r) {
      Da.row(r) = D.row(rows[static_cast<std::size_t>(r)]);
      ba[r] = targets[static_cast<std::size_t>(r)];
    }
    const Eigen::MatrixXd M = Da * S * Da.transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible()) continue;
    Eigen::VectorXd x = xhat - S * Da.transpose() * lu.solve(Da * xhat - ba);
    const Eigen::VectorXd dx = D * x;
    bool feasible = true;
    for (Eigen::Index i = 0; i < s; ++i) {
      const double tol = 1e-9 * std::max(1.0, std::abs(dx[i]));
      if (dx[i] < dmin[i] - tol || dx[i] > dmax[i] + tol) feasible = false;
    }
    if (!feasible) continue;
    const double obj = objective(x);
    if (obj < best_obj) {
      best_obj = obj;
      best = std::move(x);
    }
  }
  if (best.size() == 0) throw Error(ErrorCode::constraint, "no feasible active set (D not full rank?)");
  return best;
}

KfState constrain(const KfState& s, const BoxConstraint& c) {
  KfState out = s;
  out.x = project_box(s.x, s.P, c.D, c.dmin, c.dmax);
  return out;
}

KalmanTracker::KalmanTracker(const TrackerConfig& cfg, std::optional<BoxConstraint> box)
    : cfg_(cfg), model_(make_model(1.0 / cfg.fps, cfg.Q, cfg.R)), box_(std::move(box)) {
  if (cfg.reverify_every < 1 || cfg.max_misses < 1 || cfg.search_radius < 1)
    throw Error(ErrorCode::parameter, "tracker periods and search radius must be positive");
}

std::optional<Rect> KalmanTracker::search_window(int width, int height) const {
  if (!acquired_ || since_full_ + 1 >= cfg_.reverify_every) return std::nullopt;
  const int r = cfg_.search_radius;
  const int cx = static_cast<int>(std::lround(pred_.x[0]));
  const int cy = static_cast<int>(std::lround(pred_.x[1]));
  const int x0 = std::clamp(cx - r, 0, std::max(0, width - 1));
  const int y0 = std::clamp(cy - r, 0, std::max(0, height - 1));
  const int x1 = std::clamp(cx + r + 1, x0 + 1, width);
  const int y1 = std::clamp(cy + r + 1, y0 + 1, height);
  return Rect{x0, y0, x1 - x0, y1 - y0};
}

TrackPoint KalmanTracker::update(int frame, std::optional<PointF> measurement) {
  TrackPoint tp;
  tp.frame = frame;
  if (!acquired_) {
    if (!measurement) return tp;
    acquired_ = true;
    misses_ = 0;
    since_full_ = 0;
    pred_.x = Vec4(measurement->x, measurement->y, 0.0, 0.0);
    pred_.P = cfg_.R;
    last_meas_ = measurement;
    last_meas_frame_ = frame;
  } else {
    since_full_ = since_full_ + 1 >= cfg_.reverify_every ? 0 : since_full_ + 1;
  }

  KfState est = pred_;
  if (measurement) {
    Vec4 z(measurement->x, measurement->y, pred_.x[2], pred_.x[3]);
    if (last_meas_ && frame > last_meas_frame_) {
      const double gap = frame - last_meas_frame_;
      z[2] = (measurement->x - last_meas_->x) / gap;
      z[3] = (measurement->y - last_meas_->y) / gap;
    }
    est = kf_correct(model_, pred_, z);
    last_meas_ = measurement;
    last_meas_frame_ = frame;
    misses_ = 0;
    tp.measured = true;
  } else {
    ++misses_;
  }

  if (box_) {
    const KfState c = constrain(est, *box_);
    tp.constrained = (c.x - est.x).norm() > 0.0;
    est = c;
  }
  tp.valid = true;
  tp.x = est.x;
  pred_ = kf_predict(model_, est);

  if (misses_ >= cfg_.max_misses) {
    tp.lost = true;
    acquired_ = false;
    last_meas_.reset();
  }
  return tp;
}

std::vector<TrackPoint> track_iris(const std::vector<GrayImage>& frames, const Detector& detector,
                                   const TrackerConfig& cfg, std::optional<BoxConstraint> box) {
  KalmanTracker tracker(cfg, std::move(box));
  std::vector<TrackPoint> out;
  out.reserve(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const GrayImage& f = frames[k];
    const std::optional<Rect> window = tracker.search_window(f.width(), f.height());
    std::optional<PointF> m = detector(f, window);
    out.push_back(tracker.update(static_cast<int>(k), m));
  }
  return out;
}

}  // namespace ocular::track
