#pragma once

// Shared test oracles. Everything here recomputes expectations by an
// independent route (batch formulas, direct inversion, shadow sums) and must
// stay decoupled from the streaming implementations it checks.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rope/observation.hpp"
#include "rope/pseudo_huber.hpp"
#include "rope/rng.hpp"

namespace test_support {

// Synthetic TD-shaped stream: x_i iid standard normal, z_i = x_i - g*x_{i+1}
// so E[x z'] = I, with optional replacement outliers in b.
struct SyntheticStream {
  std::vector<rope::Observation> observations;
  std::vector<bool> outlier;
};

inline SyntheticStream synthetic_stream(std::uint64_t seed, int d, int n,
                                        double coupling = 0.5,
                                        double noise_sd = 1.0,
                                        double outlier_prob = 0.0,
                                        double outlier_scale = 1e4,
                                        int outlier_from = 0) {
  rope::CounterRng rng(seed, 0xabcdef);
  const double feature_scale = 1.0 / std::sqrt(static_cast<double>(d));
  Eigen::VectorXd theta_true = Eigen::VectorXd::Zero(d);
  for (int j = 0; j < d; ++j) theta_true(j) = rng.normal();

  SyntheticStream stream;
  stream.observations.reserve(n);
  Eigen::VectorXd x(d), x_next(d);
  for (int j = 0; j < d; ++j) x(j) = feature_scale * rng.normal();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) x_next(j) = feature_scale * rng.normal();
    rope::Observation obs;
    obs.x = x;
    obs.z = x - coupling * x_next;
    const bool is_outlier =
        i >= outlier_from && outlier_prob > 0.0 && rng.u01() < outlier_prob;
    obs.b = is_outlier ? outlier_scale * (rng.u01() - 0.2)
                       : obs.z.dot(theta_true) + noise_sd * rng.normal();
    stream.observations.push_back(obs);
    stream.outlier.push_back(is_outlier);
    x = x_next;
  }
  return stream;
}

// Batch evaluation of the truncated long-run covariance estimator: lag-0
// average plus the first ceil(lambda*log i) ∧ (i-1) lagged autocovariances
// per step, from stored scores. The independent oracle for the online form.
inline Eigen::MatrixXd batch_longrun_cov(const std::vector<Eigen::VectorXd>& xs,
                                         const std::vector<double>& gs,
                                         double lambda) {
  const int n = static_cast<int>(xs.size());
  const int d = static_cast<int>(xs.front().size());
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(d, d);
  for (int i = 1; i <= n; ++i) {
    const Eigen::VectorXd& xi = xs[i - 1];
    const double gi = gs[i - 1];
    sigma += gi * gi * xi * xi.transpose();
    const auto window = std::min<std::int64_t>(
        static_cast<std::int64_t>(std::ceil(lambda * std::log(double(i)))),
        i - 1);
    for (std::int64_t k = 1; k <= window; ++k) {
      const Eigen::VectorXd& xl = xs[i - 1 - k];
      const double gl = gs[i - 1 - k];
      sigma += gi * gl * xi * xl.transpose();
      sigma += gi * gl * xl * xi.transpose();
    }
  }
  return sigma / static_cast<double>(n);
}

// Direct (non-recursive) running average of the information matrix for the
// Sherman-Morrison equivalence checks.
class ShadowInformation {
 public:
  explicit ShadowInformation(int d) : sum_(Eigen::MatrixXd::Zero(d, d)) {}

  void init(const std::vector<rope::Observation>& batch,
            const Eigen::VectorXd& theta0, double tau0) {
    for (const auto& obs : batch) {
      const double r = obs.z.dot(theta0) - obs.b;
      sum_ += rope::pseudo_huber_grad2(r, tau0) * obs.x * obs.z.transpose();
    }
    count_ = static_cast<double>(batch.size());
  }

  void add(const rope::Observation& obs, const Eigen::VectorXd& theta_prev,
           double tau) {
    const double r = obs.z.dot(theta_prev) - obs.b;
    sum_ += rope::pseudo_huber_grad2(r, tau) * obs.x * obs.z.transpose();
    count_ += 1.0;
  }

  Eigen::MatrixXd average() const { return sum_ / count_; }
  Eigen::MatrixXd direct_inverse() const {
    return average().fullPivLu().inverse();
  }

 private:
  Eigen::MatrixXd sum_;
  double count_ = 0.0;
};

// Wilson-Hilferty chi-square quantile; ample accuracy for test gates at
// moderate degrees of freedom.
inline double chi_square_quantile(double p, double dof) {
  const double z = rope::inverse_normal_cdf(p);
  const double a = 2.0 / (9.0 * dof);
  const double c = 1.0 - a + z * std::sqrt(a);
  return dof * c * c * c;
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace test_support
