#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rope/contamination.hpp"

using namespace rope;

namespace {

double sample_median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

double sample_quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  return values[static_cast<std::size_t>(q * (values.size() - 1))];
}

}  // namespace

TEST_CASE("identity channel passes the clean reward through") {
  RewardChannel channel;  // no noise, no outliers
  channel.seed = 5;
  RewardSampler sampler(channel);
  const RewardDraw draw = sampler.emit(0.7, 1);
  CHECK(draw.b == 0.7);
  CHECK(!draw.is_outlier);
}

TEST_CASE("near-certain replacement draws Uniform[0,100]") {
  RewardChannel channel;
  channel.outlier.rate = {RateForm::Constant, 1.0 - 1e-12};
  channel.outlier.low = 0.0;
  channel.outlier.high = 100.0;
  channel.seed = 17;
  RewardSampler sampler(channel);
  double sum = 0.0;
  int outliers = 0;
  const int n = 100000;
  for (int i = 1; i <= n; ++i) {
    const RewardDraw draw = sampler.emit(-3.0, i);
    sum += draw.b;
    outliers += draw.is_outlier;
  }
  CHECK(outliers == n);
  CHECK(sum / n == doctest::Approx(50.0).epsilon(0.02));
}

TEST_CASE("Cauchy noise has median zero; mean is left alone") {
  RewardChannel channel;
  channel.noise = {NoiseKind::Cauchy, 0.0};
  channel.seed = 23;
  RewardSampler sampler(channel);
  std::vector<double> deltas;
  deltas.reserve(100000);
  for (int i = 1; i <= 100000; ++i)
    deltas.push_back(sampler.emit(2.5, i).b - 2.5);
  CHECK(std::fabs(sample_median(deltas)) <= 0.02);
}

TEST_CASE("inverse-n outlier schedule produces a harmonic number of outliers") {
  // E[count] over 1e4 steps = sum 1/n ~ ln(1e4) ~ 9.2; wide dispersion band.
  RewardChannel channel;
  channel.outlier.rate = {RateForm::InverseN, 0.0};
  channel.seed = 31;
  int total = 0;
  for (int seed = 0; seed < 10; ++seed) {
    channel.seed = 1000 + seed;
    RewardSampler sampler(channel);
    int count = 0;
    for (int i = 1; i <= 10000; ++i) count += sampler.emit(0.0, i).is_outlier;
    CHECK(count >= 2);
    CHECK(count <= 25);
    total += count;
  }
  CHECK(total >= 50);   // ~92 expected over ten streams
  CHECK(total <= 160);
}

TEST_CASE("outlier indicators are measurable from (seed, n) alone") {
  RewardChannel channel;
  channel.noise = {NoiseKind::StudentT, 1.5};
  channel.outlier.rate = {RateForm::CSqrtInvN, 0.5};
  channel.seed = 97;
  RewardSampler sampler(channel);

  // Reference pass in order.
  std::vector<RewardDraw> forward;
  for (int i = 1; i <= 500; ++i) forward.push_back(sampler.emit(1.0, i));
  // Replay out of order on a fresh sampler.
  RewardSampler replay(channel);
  for (int i = 500; i >= 1; --i) {
    const RewardDraw draw = replay.emit(1.0, i);
    CHECK(draw.b == forward[static_cast<std::size_t>(i - 1)].b);
    CHECK(draw.is_outlier == forward[static_cast<std::size_t>(i - 1)].is_outlier);
  }
}

TEST_CASE("heavy-tail samplers reproduce reference quantiles") {
  RewardChannel cauchy;
  cauchy.noise = {NoiseKind::Cauchy, 0.0};
  cauchy.seed = 41;
  RewardChannel t15;
  t15.noise = {NoiseKind::StudentT, 1.5};
  t15.seed = 43;
  RewardSampler cauchy_sampler(cauchy);
  RewardSampler t_sampler(t15);
  std::vector<double> abs_cauchy, abs_t;
  const int n = 1000000;
  abs_cauchy.reserve(n);
  abs_t.reserve(n);
  for (int i = 1; i <= n; ++i) {
    abs_cauchy.push_back(std::fabs(cauchy_sampler.emit(0.0, i).b));
    abs_t.push_back(std::fabs(t_sampler.emit(0.0, i).b));
  }
  // |Cauchy| 90th percentile = tan(0.45 pi) = 6.3138
  CHECK(sample_quantile(abs_cauchy, 0.9) ==
        doctest::Approx(6.313751514675043).epsilon(0.05));
  // |t_1.5| 90th percentile = 3.7052 (two-sided 0.95 quantile)
  CHECK(sample_quantile(abs_t, 0.9) ==
        doctest::Approx(3.705180820160004).epsilon(0.05));
}

TEST_CASE("rate schedules stay in [0,1) and reject bad parameters") {
  RateSchedule constant{RateForm::Constant, 0.3};
  CHECK(constant.rate(1) == 0.3);
  RateSchedule inv{RateForm::InverseN, 0.0};
  CHECK(inv.rate(1) < 1.0);
  CHECK(inv.rate(4) == doctest::Approx(0.25));
  RateSchedule sqrt_form{RateForm::CSqrtInvN, 0.05};
  CHECK(sqrt_form.rate(10000) == doctest::Approx(0.0005));
  CHECK(sqrt_form.rate(1) < 1.0);
  RateSchedule bad{RateForm::Constant, 1.0};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
