#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "rope/longrun_cov.hpp"
#include "rope/observation.hpp"

namespace rope {

enum class BootstrapWeights {
  Exponential,  // i.i.d. Exp(1): nonnegative, mean 1, variance 1
  Unit,         // degenerate W = 1 (testing)
};

struct LsaConfig {
  double alpha = 0.5;
  double eta = 2.0 / 3.0;
  int b_boot = 200;
  std::uint64_t seed = 0;
  BootstrapWeights weights = BootstrapWeights::Exponential;
  double divergence_limit = 1e12;
};

// Averaged first-order TD iteration with step size alpha * i^(-eta) and a
// multiplier bootstrap: each replicate consumes the shared observation with
// an independent random weight. Per-step cost O(B*d).
class LsaEstimator {
 public:
  LsaEstimator(int dim, const LsaConfig& config);

  void step(const Observation& obs);

  Eigen::VectorXd estimate() const { return theta_avg_; }
  const Eigen::VectorXd& iterate() const { return theta_; }
  std::int64_t steps_consumed() const { return n_; }
  int dim() const { return d_; }
  bool diverged() const { return diverged_; }
  int replicate_count() const { return static_cast<int>(replicates_.size()); }
  const Eigen::VectorXd& replicate_average(int r) const {
    return replicate_avgs_[static_cast<std::size_t>(r)];
  }

  // Percentile interval from the centered replicate projections.
  ConfidenceInterval ci(const Eigen::VectorXd& v, double xi) const;

 private:
  LsaConfig config_;
  int d_;
  std::int64_t n_ = 0;
  Eigen::VectorXd theta_;
  Eigen::VectorXd theta_avg_;
  std::vector<Eigen::VectorXd> replicates_;
  std::vector<Eigen::VectorXd> replicate_avgs_;
  std::vector<bool> replicate_frozen_;
  bool diverged_ = false;
};

}  // namespace rope
