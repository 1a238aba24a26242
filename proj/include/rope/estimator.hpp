#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "rope/observation.hpp"
#include "rope/pseudo_huber.hpp"

namespace rope {

struct WarmStartResult {
  Eigen::VectorXd theta;
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;  // |sum_i x_i g_tau(z_i'theta - b_i)|_2
};

// Solve sum_i x_i g_tau0(z_i'theta - b_i) = 0 on a fixed batch by damped
// Newton iterations. Converged when the residual 2-norm drops below
// tol * batch size; otherwise returns the best iterate with converged=false.
WarmStartResult warm_start(const std::vector<Observation>& batch, double tau0,
                           int max_iter = 50, double tol = 1e-10);

struct RopeConfig {
  ThresholdSchedule schedule;
  int n0 = 100;
  // Initial threshold; <= 0 means tau_at(schedule, n0).
  double tau0 = 0.0;
  // h_inv is recomputed from the running information average this often;
  // the rank-1 recursion alone accumulates rounding over long streams.
  std::int64_t direct_refresh_period = 4096;
  int warm_start_max_iter = 50;
  double warm_start_tol = 1e-10;

  double initial_tau() const {
    return tau0 > 0.0 ? tau0 : tau_at(schedule, n0);
  }
};

struct StepInfo {
  double tau = 0.0;
  double residual = 0.0;  // z'theta_hat_prev - b
  double g_val = 0.0;     // g_tau(residual); shared with the covariance update
  double gprime = 0.0;
  bool rank1_skipped = false;
  bool refreshed = false;
};

// Online Newton-type estimator: consumes one observation at a time and
// maintains the running averages (theta_bar, g_bar), the inverse empirical
// information matrix via a rank-1 recursion, and the current iterate
// theta_hat = theta_bar - h_inv * g_bar. Single-owner; O(d^2) per step.
class RopeEstimator {
 public:
  // Warm start on the batch, then initialize the online state from it.
  RopeEstimator(const std::vector<Observation>& warm_batch,
                const RopeConfig& config);

  // Initialize from a caller-supplied theta0 (skips the warm-start solve).
  RopeEstimator(const std::vector<Observation>& warm_batch,
                const Eigen::VectorXd& theta0, const RopeConfig& config);

  StepInfo step(const Observation& obs);

  Eigen::VectorXd estimate() const { return theta_hat_; }
  const Eigen::VectorXd& theta_average() const { return theta_bar_; }
  const Eigen::VectorXd& gradient_average() const { return g_bar_; }
  const Eigen::MatrixXd& information_inverse() const { return h_inv_; }
  // Running average of the empirical information matrix (refresh source).
  const Eigen::MatrixXd& information_average() const { return h_avg_; }

  std::int64_t steps_consumed() const { return n_; }
  int dim() const { return d_; }
  const RopeConfig& config() const { return config_; }
  const WarmStartResult& warm_start_result() const { return warm_; }

 private:
  void init_from_batch(const std::vector<Observation>& batch);
  bool refresh_inverse();

  RopeConfig config_;
  int d_ = 0;
  std::int64_t n_ = 0;
  Eigen::VectorXd theta_hat_;
  Eigen::VectorXd theta_bar_;
  Eigen::VectorXd g_bar_;
  Eigen::MatrixXd h_inv_;
  Eigen::MatrixXd h_avg_;
  bool pending_refresh_ = false;
  WarmStartResult warm_;
};

}  // namespace rope
