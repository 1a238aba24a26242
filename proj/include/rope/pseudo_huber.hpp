#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace rope {

// Pseudo-Huber loss family, parametrized by a threshold tau > 0:
//   value: tau^2 * (sqrt(1 + (x/tau)^2) - 1)
//   grad:  x / sqrt(1 + x^2/tau^2), bounded by tau in magnitude
//   grad2: (1 + x^2/tau^2)^(-3/2), in (0, 1]
// Quadratic near the origin, linear in the tails.

namespace detail {
inline void require_positive_tau(double tau) {
  if (!(tau > 0.0)) throw std::domain_error("pseudo-Huber: tau must be > 0");
}
}  // namespace detail

inline double pseudo_huber_value(double x, double tau) {
  detail::require_positive_tau(tau);
  const double a = x / tau;
  // sqrt(1+a^2)-1 written to avoid cancellation for small a and
  // overflow for large a.
  const double h = std::hypot(1.0, a);
  return tau * tau * (a * a / (1.0 + h));
}

inline double pseudo_huber_grad(double x, double tau) {
  detail::require_positive_tau(tau);
  const double a = x / tau;
  return tau * a / std::hypot(1.0, a);
}

inline double pseudo_huber_grad2(double x, double tau) {
  detail::require_positive_tau(tau);
  const double h = std::hypot(1.0, x / tau);
  return 1.0 / (h * h * h);
}

enum class ThresholdFamily {
  // c_tau * max(1, i^beta1 / (log i)^beta2)
  TheoremForm,
  // c_tau * max(1, (i / (log i)^2)^beta1)
  ExperimentForm,
  // c_tau
  Constant,
};

// Time-varying threshold tau_i. The logarithm is evaluated at max(i, 3) so
// the schedule is finite and positive from the first step.
struct ThresholdSchedule {
  ThresholdFamily family = ThresholdFamily::ExperimentForm;
  double c_tau = 0.5;
  double beta1 = 1.0 / 3.0;
  double beta2 = 0.0;

  void validate() const {
    if (!(c_tau > 0.0))
      throw std::domain_error("ThresholdSchedule: c_tau must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0))
      throw std::domain_error("ThresholdSchedule: beta1 must lie in [0,1)");
    if (!(beta2 >= 0.0))
      throw std::domain_error("ThresholdSchedule: beta2 must be >= 0");
  }

  static ThresholdSchedule constant(double tau) {
    return ThresholdSchedule{ThresholdFamily::Constant, tau, 0.0, 0.0};
  }
};

inline double tau_at(const ThresholdSchedule& s, std::int64_t i) {
  if (i < 1) throw std::domain_error("tau_at: index must be >= 1");
  switch (s.family) {
    case ThresholdFamily::Constant:
      return s.c_tau;
    case ThresholdFamily::TheoremForm: {
      const double logi = std::log(static_cast<double>(std::max<std::int64_t>(i, 3)));
      const double growth =
          std::pow(static_cast<double>(i), s.beta1) / std::pow(logi, s.beta2);
      return s.c_tau * std::max(1.0, growth);
    }
    case ThresholdFamily::ExperimentForm: {
      const double logi = std::log(static_cast<double>(std::max<std::int64_t>(i, 3)));
      const double growth =
          std::pow(static_cast<double>(i) / (logi * logi), s.beta1);
      return s.c_tau * std::max(1.0, growth);
    }
  }
  throw std::logic_error("tau_at: unknown family");
}

}  // namespace rope
