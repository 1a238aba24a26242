#include "rope/lsa.hpp"

#include <algorithm>
#include <cmath>

#include "rope/rng.hpp"

namespace rope {

LsaEstimator::LsaEstimator(int dim, const LsaConfig& config)
    : config_(config), d_(dim) {
  if (dim < 1) throw DataError("lsa: dimension must be >= 1");
  if (!(config.alpha >= 0.0)) throw ConfigError("lsa: alpha must be >= 0");
  if (!(config.eta > 0.0 && config.eta <= 1.0))
    throw ConfigError("lsa: eta must lie in (0,1]");
  if (config.b_boot < 0) throw ConfigError("lsa: b_boot must be >= 0");
  theta_.setZero(d_);
  theta_avg_.setZero(d_);
  replicates_.assign(config_.b_boot, Eigen::VectorXd::Zero(d_));
  replicate_avgs_.assign(config_.b_boot, Eigen::VectorXd::Zero(d_));
  replicate_frozen_.assign(config_.b_boot, false);
}

void LsaEstimator::step(const Observation& obs) {
  check_observation(obs, d_);
  const std::int64_t n = n_ + 1;
  const double lr = config_.alpha * std::pow(static_cast<double>(n), -config_.eta);

  if (!diverged_) {
    theta_ -= lr * (obs.z.dot(theta_) - obs.b) * obs.x;
    if (theta_.norm() > config_.divergence_limit) diverged_ = true;
  }
  theta_avg_ += (theta_ - theta_avg_) / static_cast<double>(n);

  CounterRng weight_rng(config_.seed, static_cast<std::uint64_t>(n));
  for (int b = 0; b < config_.b_boot; ++b) {
    const double w = config_.weights == BootstrapWeights::Unit
                         ? 1.0
                         : weight_rng.exponential();
    auto& rep = replicates_[static_cast<std::size_t>(b)];
    if (!replicate_frozen_[static_cast<std::size_t>(b)]) {
      rep -= lr * w * (obs.z.dot(rep) - obs.b) * obs.x;
      if (rep.norm() > config_.divergence_limit)
        replicate_frozen_[static_cast<std::size_t>(b)] = true;
    }
    auto& avg = replicate_avgs_[static_cast<std::size_t>(b)];
    avg += (rep - avg) / static_cast<double>(n);
  }
  n_ = n;
}

ConfidenceInterval LsaEstimator::ci(const Eigen::VectorXd& v, double xi) const {
  if (v.size() != d_) throw DataError("lsa ci: dimension mismatch");
  if (config_.b_boot < 50)
    throw ConfigError("lsa ci: need at least 50 bootstrap replicates");
  if (!(xi > 0.0 && xi < 1.0)) throw DataError("lsa ci: xi must lie in (0,1)");

  const double center = v.dot(theta_avg_);
  std::vector<double> centered;
  centered.reserve(replicate_avgs_.size());
  for (const auto& avg : replicate_avgs_) {
    const double delta = v.dot(avg) - center;
    if (!std::isfinite(delta)) continue;
    centered.push_back(delta);
  }
  if (centered.size() < static_cast<std::size_t>(config_.b_boot))
    throw NumericError("lsa ci: fewer finite replicates than b_boot");

  std::sort(centered.begin(), centered.end());
  // Linear-interpolation empirical quantile on the sorted diffs.
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(centered.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, centered.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return centered[lo] * (1.0 - frac) + centered[hi] * frac;
  };
  const double upper = center - quantile(0.5 * xi);
  const double lower = center - quantile(1.0 - 0.5 * xi);

  ConfidenceInterval ci;
  ci.center = 0.5 * (lower + upper);
  ci.half_width = 0.5 * (upper - lower);
  ci.level = 1.0 - xi;
  ci.sigma_v_sq_raw = 0.0;
  ci.floored = false;
  return ci;
}

}  // namespace rope
