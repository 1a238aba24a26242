#include "rope/estimator.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <sstream>

#include "rope/errors.hpp"

namespace rope {

namespace {

constexpr double kConditionLimit = 1e12;
constexpr double kRidge = 1e-8;
constexpr double kBreakdownTol = 1e-12;

// Residual of the batch estimating equation and its Jacobian at theta.
void batch_equation(const std::vector<Observation>& batch, double tau,
                    const Eigen::VectorXd& theta, Eigen::VectorXd& f,
                    Eigen::MatrixXd& jac) {
  const Eigen::Index d = theta.size();
  f.setZero(d);
  jac.setZero(d, d);
  for (const Observation& obs : batch) {
    const double r = obs.z.dot(theta) - obs.b;
    f.noalias() += obs.x * pseudo_huber_grad(r, tau);
    jac.noalias() += obs.x * obs.z.transpose() * pseudo_huber_grad2(r, tau);
  }
}

}  // namespace

WarmStartResult warm_start(const std::vector<Observation>& batch, double tau0,
                           int max_iter, double tol) {
  if (batch.empty()) throw InsufficientDataError("warm start: empty batch");
  const Eigen::Index d = batch.front().dim();
  if (static_cast<Eigen::Index>(batch.size()) < d) {
    std::ostringstream msg;
    msg << "warm start: batch size " << batch.size() << " < dimension " << d;
    throw InsufficientDataError(msg.str());
  }
  for (const Observation& obs : batch) check_observation(obs, d);
  if (!(tau0 > 0.0)) throw std::domain_error("warm start: tau0 must be > 0");

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
  int total_iterations = 0;

  // Damped Newton at a fixed threshold; returns the best residual norm
  // reached. 'require_progress' guards the first rung against an
  // identically singular Jacobian.
  auto newton_at = [&](double tau, bool require_progress) {
    Eigen::VectorXd f;
    Eigen::MatrixXd jac;
    batch_equation(batch, tau, theta, f, jac);
    double best_norm = f.norm();
    const double target = tol * static_cast<double>(batch.size());
    bool made_progress = false;
    for (int it = 0; it < max_iter; ++it) {
      if (best_norm <= target) break;

      bool ridged = false;
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
      if (!(lu.rcond() > 1.0 / kConditionLimit)) {
        // Ridge rescue for a near-singular Jacobian.
        lu.compute(jac + kRidge * Eigen::MatrixXd::Identity(d, d));
        ridged = true;
      }
      const Eigen::VectorXd direction = lu.solve(f);
      if (!direction.allFinite())
        throw InitializationError("warm start: Newton direction not finite");

      // Backtrack on residual increase.
      bool accepted = false;
      double lambda = 1.0;
      for (int half = 0; half < 40; ++half) {
        Eigen::VectorXd candidate = theta - lambda * direction;
        Eigen::VectorXd fc;
        Eigen::MatrixXd jc;
        batch_equation(batch, tau, candidate, fc, jc);
        const double norm_c = fc.norm();
        if (norm_c < best_norm) {
          theta = std::move(candidate);
          f = std::move(fc);
          jac = std::move(jc);
          best_norm = norm_c;
          accepted = true;
          break;
        }
        lambda *= 0.5;
      }
      ++total_iterations;
      if (!accepted) {
        if (ridged && require_progress && !made_progress)
          throw InitializationError(
              "warm start: Jacobian singular beyond ridge rescue");
        break;  // stalled at this threshold
      }
      made_progress = true;
    }
    return best_norm;
  };

  // Threshold continuation: start near the data scale, where the loss is
  // effectively quadratic and free of saturation plateaus, and tighten
  // geometrically down to tau0.
  double b_scale = 0.0;
  for (const Observation& obs : batch) b_scale += std::fabs(obs.b);
  b_scale /= static_cast<double>(batch.size());
  std::vector<double> ladder;
  for (double tau = std::max(tau0, 8.0 * (b_scale + 1.0)); tau > 4.0 * tau0;
       tau *= 0.25)
    ladder.push_back(tau);
  ladder.push_back(tau0);

  WarmStartResult result;
  double final_norm = 0.0;
  for (std::size_t rung = 0; rung < ladder.size(); ++rung)
    final_norm = newton_at(ladder[rung], rung == 0);

  result.theta = theta;
  result.iterations = total_iterations;
  result.residual_norm = final_norm;
  result.converged =
      final_norm <= tol * static_cast<double>(batch.size());
  return result;
}

RopeEstimator::RopeEstimator(const std::vector<Observation>& warm_batch,
                             const RopeConfig& config)
    : config_(config) {
  config_.schedule.validate();
  if (warm_batch.empty())
    throw InsufficientDataError("init: empty warm-start batch");
  config_.n0 = static_cast<int>(warm_batch.size());
  warm_ = warm_start(warm_batch, config_.initial_tau(),
                     config_.warm_start_max_iter, config_.warm_start_tol);
  init_from_batch(warm_batch);
}

RopeEstimator::RopeEstimator(const std::vector<Observation>& warm_batch,
                             const Eigen::VectorXd& theta0,
                             const RopeConfig& config)
    : config_(config) {
  config_.schedule.validate();
  config_.n0 = static_cast<int>(warm_batch.size());
  warm_.theta = theta0;
  warm_.converged = true;
  init_from_batch(warm_batch);
}

void RopeEstimator::init_from_batch(const std::vector<Observation>& batch) {
  if (batch.empty()) throw InsufficientDataError("init: empty warm-start batch");
  d_ = static_cast<int>(batch.front().dim());
  if (static_cast<Eigen::Index>(batch.size()) < d_)
    throw InsufficientDataError("init: warm-start batch smaller than dimension");
  if (warm_.theta.size() != d_)
    throw DataError("init: theta0 dimension mismatch");

  const double tau0 = config_.initial_tau();
  const double inv_n0 = 1.0 / static_cast<double>(batch.size());
  h_avg_.setZero(d_, d_);
  g_bar_.setZero(d_);
  for (const Observation& obs : batch) {
    check_observation(obs, d_);
    const double r = obs.z.dot(warm_.theta) - obs.b;
    h_avg_.noalias() +=
        inv_n0 * pseudo_huber_grad2(r, tau0) * obs.x * obs.z.transpose();
    g_bar_.noalias() += inv_n0 * pseudo_huber_grad(r, tau0) * obs.x;
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(h_avg_);
  const double rcond = lu.rcond();
  if (!(rcond > 1.0 / kConditionLimit)) {
    std::ostringstream msg;
    msg << "init: information matrix numerically singular (condition estimate "
        << (rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity())
        << ")";
    throw InitializationError(msg.str());
  }
  h_inv_ = lu.inverse();
  theta_hat_ = warm_.theta;
  theta_bar_ = warm_.theta;
  n_ = static_cast<std::int64_t>(batch.size());
}

bool RopeEstimator::refresh_inverse() {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(h_avg_);
  if (!(lu.rcond() > 1.0 / kConditionLimit)) return false;
  h_inv_ = lu.inverse();
  return true;
}

StepInfo RopeEstimator::step(const Observation& obs) {
  check_observation(obs, d_);

  StepInfo info;
  if (pending_refresh_) {
    info.refreshed = refresh_inverse();
    pending_refresh_ = !info.refreshed;
  }

  const double n = static_cast<double>(n_);
  info.tau = tau_at(config_.schedule, n_ + 1);
  info.residual = obs.z.dot(theta_hat_) - obs.b;
  info.g_val = pseudo_huber_grad(info.residual, info.tau);
  info.gprime = pseudo_huber_grad2(info.residual, info.tau);

  theta_bar_ = (n * theta_bar_ + theta_hat_) / (n + 1.0);
  g_bar_ = (n / (n + 1.0)) * g_bar_ + (1.0 / (n + 1.0)) * info.g_val * obs.x;
  h_avg_ = (n / (n + 1.0)) * h_avg_ +
           (info.gprime / (n + 1.0)) * obs.x * obs.z.transpose();

  // Rank-1 inverse recursion; the bracketed pivot is the scalar
  // s = (1/n) z'h_inv x + 1/g'.
  const Eigen::VectorXd u = h_inv_ * obs.x;
  const Eigen::VectorXd w = h_inv_.transpose() * obs.z;
  const double s = obs.z.dot(u) / n + 1.0 / info.gprime;
  if (std::fabs(s) < kBreakdownTol || !std::isfinite(u.squaredNorm()) ||
      !std::isfinite(w.squaredNorm())) {
    // Near-breakdown of the recursion: keep h_inv, fold the observation
    // into the running average only, and refresh directly next step.
    info.rank1_skipped = true;
    pending_refresh_ = true;
  } else {
    const double scale = (n + 1.0) / n;
    h_inv_ = scale * (h_inv_ - u * w.transpose() / (n * s));
  }

  n_ += 1;
  if (config_.direct_refresh_period > 0 &&
      (n_ - static_cast<std::int64_t>(config_.n0)) > 0 &&
      (n_ - static_cast<std::int64_t>(config_.n0)) %
              config_.direct_refresh_period == 0) {
    if (refresh_inverse()) info.refreshed = true;
  }

  theta_hat_ = theta_bar_ - h_inv_ * g_bar_;
  return info;
}

}  // namespace rope
