#pragma once

// Linear Kalman filtering of the iris center with optional box constraints
// enforced by projection in the inverse-covariance metric.

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "ocular/imgcore.hpp"

namespace ocular::track {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using Mat42 = Eigen::Matrix<double, 4, 2>;

/// State (px, py, vx, vy). A advances position by one velocity step per
/// frame; B maps a 2-D input scaled by the frame period T.
struct KfModel {
  Mat4 A;
  Mat42 B;
  Mat4 H;
  Mat4 Q;
  Mat4 R;
  double T = 1.0;
};

Mat4 default_q();  // diag(1, 1, 4, 4)
Mat4 default_r();  // diag(4, 4, 16, 16)

KfModel make_model(double T, const Mat4& Q = default_q(), const Mat4& R = default_r());

struct KfState {
  Vec4 x = Vec4::Zero();
  Mat4 P = Mat4::Identity();
};

/// One-step predictor:
///   K = A P H' (H P H' + R)^-1
///   x+ = A x + B u + K (z - H x)
///   P+ = (A - K H) P A' + Q, symmetrized.
KfState kf_step(const KfModel& m, const KfState& s, const Vec4& z, const Vec2& u = Vec2::Zero());

/// Same recursion without a measurement (gain zero).
KfState kf_predict(const KfModel& m, const KfState& s, const Vec2& u = Vec2::Zero());

/// Measurement update at the current frame: returns the filtered estimate
/// x + P H' S^-1 (z - H x). Followed by kf_predict it reproduces kf_step.
KfState kf_correct(const KfModel& m, const KfState& s, const Vec4& z);

struct BoxConstraint {
  Eigen::MatrixXd D;  // s x 4, full row rank
  Eigen::VectorXd dmin;
  Eigen::VectorXd dmax;
};

/// D = [I2 0]: bounds on the position components only.
BoxConstraint position_box(double xmin, double xmax, double ymin, double ymax);

/// Minimizer of x'W x - 2 xhat' W x (W = sigma^-1) subject to
/// dmin <= D x <= dmax, found by enumerating every active set.
Eigen::VectorXd project_box(const Eigen::VectorXd& xhat, const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& D,
                            const Eigen::VectorXd& dmin, const Eigen::VectorXd& dmax);

/// x'W x - 2 xhat' W x.
double qp_objective(const Eigen::VectorXd& x, const Eigen::VectorXd& xhat, const Eigen::MatrixXd& sigma);

/// Projects the state estimate; the covariance is left unchanged.
KfState constrain(const KfState& s, const BoxConstraint& c);

struct TrackerConfig {
  double fps = 30.0;
  Mat4 Q = default_q();
  Mat4 R = default_r();
  int reverify_every = 6;  // full re-detection period in frames
  int max_misses = 12;     // consecutive failures before the track is dropped
  int search_radius = 12;  // half-size of the search window around the prediction
};

struct TrackPoint {
  int frame = 0;
  bool valid = false;        // false until the track is acquired
  Vec4 x = Vec4::Zero();     // filtered estimate at this frame
  bool measured = false;
  bool constrained = false;  // projection moved the estimate
  bool lost = false;         // track dropped at this frame
};

/// Tracking session over one sequence. Frames must be fed in order.
class KalmanTracker {
 public:
  explicit KalmanTracker(const TrackerConfig& cfg, std::optional<BoxConstraint> box = std::nullopt);

  /// Search window for the next frame, or nullopt when a full detection is due.
  std::optional<Rect> search_window(int width, int height) const;

  TrackPoint update(int frame, std::optional<PointF> measurement);

  bool acquired() const { return acquired_; }
  const KfState& predicted() const { return pred_; }
  void set_constraint(std::optional<BoxConstraint> box) { box_ = std::move(box); }

 private:
  TrackerConfig cfg_;
  KfModel model_;
  std::optional<BoxConstraint> box_;
  KfState pred_;
  bool acquired_ = false;
  int misses_ = 0;
  int since_full_ = 0;
  std::optional<PointF> last_meas_;
  int last_meas_frame_ = 0;
};

/// Detector contract: frame plus optional search rectangle in, iris center
/// in frame coordinates out.
using Detector = std::function<std::optional<PointF>(const GrayImage&, const std::optional<Rect>&)>;

std::vector<TrackPoint> track_iris(const std::vector<GrayImage>& frames, const Detector& detector,
                                   const TrackerConfig& cfg, std::optional<BoxConstraint> box = std::nullopt);

}  // namespace ocular::track
