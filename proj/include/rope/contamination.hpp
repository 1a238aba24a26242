#pragma once

#include <cstdint>

#include "rope/errors.hpp"
#include "rope/rng.hpp"

namespace rope {

enum class NoiseKind { None, Normal, StudentT, Cauchy };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::None;
  // Normal: standard deviation; StudentT: degrees of freedom. Unused otherwise.
  double param = 1.0;
};

enum class RateForm { Zero, InverseN, CSqrtInvN, Constant };

// Per-step outlier probability alpha_n.
struct RateSchedule {
  RateForm form = RateForm::Zero;
  double value = 0.0;  // c for CSqrtInvN, a for Constant

  double rate(std::int64_t n) const;
  void validate() const;
};

struct OutlierSpec {
  RateSchedule rate;
  double low = 0.0;
  double high = 100.0;
};

// Reward-channel configuration: additive noise plus replacement outliers.
struct RewardChannel {
  NoiseSpec noise;
  OutlierSpec outlier;
  std::uint64_t seed = 0;
};

struct RewardDraw {
  double b = 0.0;
  bool is_outlier = false;
};

// Draws the observed reward for step n. All randomness for step n is keyed
// by (seed, n) alone, so the outlier indicator stream is replayable and
// independent of the chain's generator.
class RewardSampler {
 public:
  explicit RewardSampler(const RewardChannel& channel);

  RewardDraw emit(double clean_reward, std::int64_t n) const;

  const RewardChannel& channel() const { return channel_; }

 private:
  RewardChannel channel_;
};

}  // namespace rope
