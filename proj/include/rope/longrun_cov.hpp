#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <deque>

#include "rope/errors.hpp"

namespace rope {

// Online estimator of the long-run covariance of the score process
// x_i * g_i: the lag-0 average plus the first ceil(lambda*log i) lagged
// autocovariances at each step, accumulated from a ring buffer of partial
// sums S_j = sum_{i<=j} x_i * g_i. Single-owner; O(d^2 + d log n) memory.
class LongRunCovariance {
 public:
  explicit LongRunCovariance(int dim, double lambda = 2.0,
                             double min_variance_floor = 1e-12);

  // Feed the score of the current observation: g_val is the thresholded
  // gradient already computed by the estimator for this step.
  void update(const Eigen::VectorXd& x, double g_val);

  const Eigen::MatrixXd& sigma() const { return sigma_; }
  std::int64_t count() const { return n_; }
  int dim() const { return d_; }
  double lambda() const { return lambda_; }
  double variance_floor() const { return floor_; }

  // Number of lagged terms entering the update at step i:
  // ceil(lambda*log i) ∧ (i-1).
  std::int64_t lag_window(std::int64_t i) const;

  // Retained partial sums (diagnostic; excludes the implicit S_0 = 0).
  std::size_t buffer_size() const;

 private:
  int d_;
  double lambda_;
  double floor_;
  std::int64_t n_ = 0;
  Eigen::MatrixXd sigma_;
  std::deque<Eigen::VectorXd> sums_;  // S_{base_}, ..., S_{n_}
  std::int64_t base_ = 0;
};

struct ConfidenceInterval {
  double center = 0.0;
  double half_width = 0.0;
  double level = 0.0;  // nominal 1 - xi
  double sigma_v_sq_raw = 0.0;
  bool floored = false;

  double lower() const { return center - half_width; }
  double upper() const { return center + half_width; }
  bool contains(double value) const {
    return value >= lower() && value <= upper();
  }
  double width() const { return 2.0 * half_width; }
};

// Plug-in interval for v'theta at nominal level 1 - xi:
//   sigma_v^2 = v' h_inv Sigma h_inv' v,
//   v'theta_hat +- q_{1-xi/2} * sqrt(max(sigma_v^2, floor)) / sqrt(n).
// A non-positive (or sub-floor) variance estimate is reported via
// floored=true, not treated as a failure.
ConfidenceInterval confidence_interval(const Eigen::VectorXd& v,
                                       const Eigen::VectorXd& theta_hat,
                                       const Eigen::MatrixXd& h_inv,
                                       const LongRunCovariance& cov,
                                       std::int64_t n, double xi);

}  // namespace rope
