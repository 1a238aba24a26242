#include "rope/longrun_cov.hpp"

#include <algorithm>
#include <cmath>

#include "rope/rng.hpp"

namespace rope {

LongRunCovariance::LongRunCovariance(int dim, double lambda,
                                     double min_variance_floor)
    : d_(dim), lambda_(lambda), floor_(min_variance_floor) {
  if (dim < 1) throw DataError("LongRunCovariance: dimension must be >= 1");
  if (!(lambda > 0.0)) throw DataError("LongRunCovariance: lambda must be > 0");
  sigma_.setZero(d_, d_);
  sums_.emplace_back(Eigen::VectorXd::Zero(d_));  // S_0
}

std::int64_t LongRunCovariance::lag_window(std::int64_t i) const {
  if (i <= 1) return 0;
  const auto w = static_cast<std::int64_t>(
      std::ceil(lambda_ * std::log(static_cast<double>(i))));
  return std::min(w, i - 1);
}

std::size_t LongRunCovariance::buffer_size() const {
  // S_0 is an implicit zero, not a stored lagged sum.
  return sums_.size() - (base_ == 0 ? 1 : 0);
}

void LongRunCovariance::update(const Eigen::VectorXd& x, double g_val) {
  if (x.size() != d_) throw DataError("cov update: dimension mismatch");
  if (!x.allFinite() || !std::isfinite(g_val))
    throw DataError("cov update: non-finite input");

  const std::int64_t i = n_ + 1;
  const std::int64_t window = lag_window(i);
  const Eigen::VectorXd& s_prev = sums_.back();                  // S_{i-1}
  const Eigen::VectorXd& s_old = sums_[static_cast<std::size_t>(
      i - 1 - window - base_)];                                  // S_{i-1-window}
  const Eigen::VectorXd lagged = s_prev - s_old;

  const double ratio = static_cast<double>(i - 1) / static_cast<double>(i);
  const double inv_i = 1.0 / static_cast<double>(i);
  sigma_ *= ratio;
  sigma_.noalias() += inv_i * (g_val * g_val) * x * x.transpose();
  sigma_.noalias() += inv_i * g_val * x * lagged.transpose();
  sigma_.noalias() += inv_i * g_val * lagged * x.transpose();
  sigma_ = ((sigma_ + sigma_.transpose()) * 0.5).eval();

  sums_.emplace_back(s_prev + g_val * x);
  n_ = i;

  // Keep exactly what the next step's window needs.
  const std::int64_t oldest_needed = n_ - lag_window(n_ + 1);
  while (base_ < oldest_needed) {
    sums_.pop_front();
    ++base_;
  }
}

ConfidenceInterval confidence_interval(const Eigen::VectorXd& v,
                                       const Eigen::VectorXd& theta_hat,
                                       const Eigen::MatrixXd& h_inv,
                                       const LongRunCovariance& cov,
                                       std::int64_t n, double xi) {
  if (v.size() != theta_hat.size() || h_inv.rows() != v.size() ||
      h_inv.cols() != v.size() || cov.dim() != v.size())
    throw DataError("confidence interval: dimension mismatch");
  if (n < 2) throw DataError("confidence interval: n must be >= 2");
  if (!(xi > 0.0 && xi < 1.0))
    throw DataError("confidence interval: xi must lie in (0,1)");

  const Eigen::VectorXd u = h_inv.transpose() * v;
  const double sigma_v_sq = u.dot(cov.sigma() * u);
  const double floor = cov.variance_floor();

  ConfidenceInterval ci;
  ci.center = v.dot(theta_hat);
  ci.level = 1.0 - xi;
  ci.sigma_v_sq_raw = sigma_v_sq;
  ci.floored = !(sigma_v_sq >= floor);
  const double q = inverse_normal_cdf(1.0 - 0.5 * xi);
  ci.half_width = q * std::sqrt(std::max(sigma_v_sq, floor)) /
                  std::sqrt(static_cast<double>(n));
  return ci;
}

}  // namespace rope
