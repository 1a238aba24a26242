#include "rope/contamination.hpp"

#include <algorithm>
#include <cmath>

namespace rope {

namespace {
constexpr double kRateCap = 1.0 - 1e-12;
}

double RateSchedule::rate(std::int64_t n) const {
  switch (form) {
    case RateForm::Zero:
      return 0.0;
    case RateForm::InverseN:
      return std::min(1.0 / static_cast<double>(n), kRateCap);
    case RateForm::CSqrtInvN:
      return std::min(value / std::sqrt(static_cast<double>(n)), kRateCap);
    case RateForm::Constant:
      return value;
  }
  return 0.0;
}

void RateSchedule::validate() const {
  if (form == RateForm::Constant && !(value >= 0.0 && value < 1.0))
    throw ConfigError("outlier rate: constant must lie in [0,1)");
  if (form == RateForm::CSqrtInvN && !(value >= 0.0))
    throw ConfigError("outlier rate: coefficient must be >= 0");
}

RewardSampler::RewardSampler(const RewardChannel& channel) : channel_(channel) {
  channel_.outlier.rate.validate();
  if (channel_.noise.kind == NoiseKind::Normal && !(channel_.noise.param >= 0.0))
    throw ConfigError("noise: normal sigma must be >= 0");
  if (channel_.noise.kind == NoiseKind::StudentT && !(channel_.noise.param > 0.0))
    throw ConfigError("noise: student t degrees of freedom must be > 0");
  if (!(channel_.outlier.high >= channel_.outlier.low))
    throw ConfigError("outlier: high must be >= low");
}

RewardDraw RewardSampler::emit(double clean_reward, std::int64_t n) const {
  CounterRng rng(channel_.seed, static_cast<std::uint64_t>(n));
  const double alpha = channel_.outlier.rate.rate(n);
  if (alpha > 0.0 && rng.u01() < alpha) {
    const double u = rng.u01();
    return {channel_.outlier.low +
                (channel_.outlier.high - channel_.outlier.low) * u,
            true};
  }
  double noise = 0.0;
  switch (channel_.noise.kind) {
    case NoiseKind::None:
      break;
    case NoiseKind::Normal:
      noise = channel_.noise.param * rng.normal();
      break;
    case NoiseKind::StudentT:
      noise = rng.student_t(channel_.noise.param);
      break;
    case NoiseKind::Cauchy:
      noise = rng.cauchy();
      break;
  }
  return {clean_reward + noise, false};
}

}  // namespace rope
