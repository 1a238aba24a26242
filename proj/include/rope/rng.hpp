#pragma once

#include <cmath>
#include <cstdint>

namespace rope {

// Inverse of the standard normal CDF (Wichura's PPND16 rational
// approximation, relative accuracy ~1e-16 over (0,1)).
double inverse_normal_cdf(double p);

namespace detail {

// SplitMix64 finalizer; full-avalanche 64-bit mix.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Derive a child seed from a parent seed and one or two labels.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                    std::uint64_t b = 0) {
  return detail::mix64(detail::mix64(detail::mix64(seed) ^ a) ^ b);
}

// Counter-based generator: the k-th draw of stream (seed, stream) is a pure
// function of (seed, stream, k). Streams keyed by a step index are therefore
// replayable without consuming any shared state.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : base_(detail::mix64(detail::mix64(seed) ^ stream)) {}

  std::uint64_t next_u64() { return detail::mix64(base_ ^ counter_++); }

  // Uniform on the open interval (0,1); never returns an endpoint.
  double u01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return inverse_normal_cdf(u01()); }

  double exponential() { return -std::log1p(-u01()); }

  double cauchy() {
    return std::tan(3.14159265358979323846 * (u01() - 0.5));
  }

  // Marsaglia-Tsang, with the alpha<1 boost G(a) = G(a+1) * U^(1/a).
  double gamma(double alpha, double scale = 1.0) {
    if (alpha < 1.0) {
      double u = u01();
      return gamma(alpha + 1.0, scale) * std::pow(u, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      double v = t * t * t;
      double u = u01();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v))
        return d * v * scale;
    }
  }

  // Student t via the normal / chi-square composition.
  double student_t(double df) {
    double z = normal();
    double chi2 = gamma(0.5 * df, 2.0);
    return z / std::sqrt(chi2 / df);
  }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

}  // namespace rope
