#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "rope/errors.hpp"
#include "rope/estimator.hpp"
#include "rope/mdp.hpp"
#include "test_support.hpp"

using namespace rope;

namespace {

Observation obs1(double x, double z, double b) {
  Observation o;
  o.x = Eigen::VectorXd::Constant(1, x);
  o.z = Eigen::VectorXd::Constant(1, z);
  o.b = b;
  return o;
}

std::vector<Observation> repeat_obs(const Observation& o, int count) {
  return std::vector<Observation>(count, o);
}

RopeConfig huge_tau_config(int n0) {
  RopeConfig cfg;
  cfg.schedule = ThresholdSchedule::constant(1e6);
  cfg.n0 = n0;
  return cfg;
}

}  // namespace

TEST_CASE("warm start solves the batch estimating equation") {
  SUBCASE("exact root of a consistent linear system") {
    auto result = warm_start(repeat_obs(obs1(1, 1, 1), 2), 1e6);
    CHECK(result.converged);
    CHECK(result.theta(0) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("hand solution of 0.75 theta = 1") {
    auto result = warm_start(repeat_obs(obs1(1, 0.75, 1), 8), 1e6);
    CHECK(result.converged);
    CHECK(result.theta(0) == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
  }
  SUBCASE("singular batch is rejected") {
    CHECK_THROWS_AS(warm_start(repeat_obs(obs1(1, 0, 1), 5), 10.0),
                    InitializationError);
  }
  SUBCASE("batch smaller than dimension is rejected") {
    Observation o;
    o.x = Eigen::VectorXd::Ones(3);
    o.z = Eigen::VectorXd::Ones(3);
    o.b = 1.0;
    CHECK_THROWS_AS(warm_start({o, o}, 10.0), InsufficientDataError);
  }
  SUBCASE("non-finite input is rejected") {
    auto batch = repeat_obs(obs1(1, 1, 1), 3);
    batch[1].b = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(warm_start(batch, 10.0), DataError);
  }
}

TEST_CASE("initialization from the warm-start batch") {
  SUBCASE("all-zero residuals give H = 1, G = 0 in d=1") {
    auto batch = repeat_obs(obs1(1, 1, 0), 10);
    RopeEstimator est(batch, Eigen::VectorXd::Zero(1), huge_tau_config(10));
    CHECK(est.information_inverse()(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(est.gradient_average()(0) == doctest::Approx(0.0));
    CHECK(est.estimate()(0) == 0.0);
    CHECK(est.steps_consumed() == 10);
  }
  SUBCASE("d=2 random batch: inverse agrees with direct inversion") {
    auto stream = test_support::synthetic_stream(3, 2, 40);
    RopeConfig cfg = huge_tau_config(40);
    RopeEstimator est(stream.observations, Eigen::VectorXd::Zero(2), cfg);
    test_support::ShadowInformation shadow(2);
    shadow.init(stream.observations, Eigen::VectorXd::Zero(2), cfg.initial_tau());
    CHECK(test_support::max_abs_diff(est.information_inverse(),
                                     shadow.direct_inverse()) <= 1e-10);
  }
  SUBCASE("one contaminated reward has bounded influence on G") {
    const double tau0 = 0.5;
    auto clean = repeat_obs(obs1(1, 1, 0), 20);
    auto dirty = clean;
    dirty[7].b = 1e6;
    RopeConfig cfg;
    cfg.schedule = ThresholdSchedule::constant(tau0);
    cfg.n0 = 20;
    RopeEstimator est_clean(clean, Eigen::VectorXd::Zero(1), cfg);
    RopeEstimator est_dirty(dirty, Eigen::VectorXd::Zero(1), cfg);
    const double shift = std::fabs(est_dirty.gradient_average()(0) -
                                   est_clean.gradient_average()(0));
    CHECK(shift <= tau0 / 20.0 + 1e-12);
  }
  SUBCASE("numerically singular information matrix is diagnosed") {
    CHECK_THROWS_AS(
        RopeEstimator(repeat_obs(obs1(1, 0, 1), 6), Eigen::VectorXd::Zero(1),
                      huge_tau_config(6)),
        InitializationError);
  }
}

TEST_CASE("step keeps the noiseless fixed point") {
  auto batch = repeat_obs(obs1(1, 1, 1), 10);
  RopeEstimator est(batch, huge_tau_config(10));
  CHECK(est.estimate()(0) == doctest::Approx(1.0).epsilon(1e-9));
  for (int i = 0; i < 50; ++i) {
    const StepInfo info = est.step(obs1(1, 1, 1));
    CHECK(std::fabs(info.g_val) <= 1e-8);
  }
  CHECK(est.estimate()(0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(est.gradient_average().norm() <= 1e-8);
}

TEST_CASE("Sherman-Morrison recursion equals the direct inverse") {
  // d=2, 500 mixed clean/outlier steps, max-entry error <= 1e-8 throughout.
  auto stream =
      test_support::synthetic_stream(11, 2, 540, 0.5, 1.0, 0.02, 1e4, 40);
  std::vector<Observation> batch(stream.observations.begin(),
                                 stream.observations.begin() + 40);
  RopeConfig cfg;
  cfg.schedule = ThresholdSchedule{ThresholdFamily::ExperimentForm, 0.5, 1.0 / 3.0, 0.0};
  cfg.n0 = 40;
  RopeEstimator est(batch, cfg);

  test_support::ShadowInformation shadow(2);
  shadow.init(batch, est.warm_start_result().theta, cfg.initial_tau());
  for (int i = 40; i < 540; ++i) {
    const Eigen::VectorXd theta_prev = est.estimate();
    const StepInfo info = est.step(stream.observations[i]);
    shadow.add(stream.observations[i], theta_prev, info.tau);
    CHECK(test_support::max_abs_diff(est.information_inverse(),
                                     shadow.direct_inverse()) <= 1e-8);
  }
}

TEST_CASE("theta_bar equals the shadow running mean") {
  auto stream = test_support::synthetic_stream(5, 3, 1040);
  std::vector<Observation> batch(stream.observations.begin(),
                                 stream.observations.begin() + 40);
  RopeConfig cfg;
  cfg.schedule = ThresholdSchedule{ThresholdFamily::ExperimentForm, 0.5, 1.0 / 3.0, 0.0};
  cfg.n0 = 40;
  RopeEstimator est(batch, cfg);

  // Warm start seeds theta_bar with weight n0.
  Eigen::VectorXd shadow_sum = 40.0 * est.estimate();
  double shadow_count = 40.0;
  for (int i = 40; i < 1040; ++i) {
    shadow_sum += est.estimate();
    shadow_count += 1.0;
    est.step(stream.observations[i]);
    CHECK((est.theta_average() - shadow_sum / shadow_count).norm() <= 1e-10);
  }
}

TEST_CASE("identical streams and configuration give bit-identical states") {
  auto stream = test_support::synthetic_stream(21, 4, 300);
  std::vector<Observation> batch(stream.observations.begin(),
                                 stream.observations.begin() + 60);
  RopeConfig cfg;
  cfg.schedule = ThresholdSchedule{ThresholdFamily::ExperimentForm, 0.5, 1.0 / 3.0, 0.0};
  cfg.n0 = 60;
  RopeEstimator a(batch, cfg);
  RopeEstimator b(batch, cfg);
  for (int i = 60; i < 300; ++i) {
    a.step(stream.observations[i]);
    b.step(stream.observations[i]);
  }
  CHECK(a.estimate() == b.estimate());
  CHECK(a.information_inverse() == b.information_inverse());
  CHECK(a.gradient_average() == b.gradient_average());
}

TEST_CASE("per-step gradient increments are bounded by ||x|| tau / (n+1)") {
  auto stream =
      test_support::synthetic_stream(31, 3, 400, 0.5, 1.0, 0.05, 1e9, 50);
  std::vector<Observation> batch(stream.observations.begin(),
                                 stream.observations.begin() + 50);
  RopeConfig cfg;
  cfg.schedule = ThresholdSchedule{ThresholdFamily::ExperimentForm, 0.5, 1.0 / 3.0, 0.0};
  cfg.n0 = 50;
  RopeEstimator est(batch, cfg);
  Eigen::VectorXd prev_g = est.gradient_average();
  for (int i = 50; i < 400; ++i) {
    const double n_before = static_cast<double>(est.steps_consumed());
    const StepInfo info = est.step(stream.observations[i]);
    const Eigen::VectorXd g = est.gradient_average();
    // increment = g_new - (n/(n+1)) g_old
    const Eigen::VectorXd inc = g - (n_before / (n_before + 1.0)) * prev_g;
    CHECK(inc.norm() <=
          stream.observations[i].x.norm() * info.tau / (n_before + 1.0) + 1e-12);
    prev_g = g;
  }
}

TEST_CASE("one huge outlier moves the thresholded estimator far less than an"
          " unthresholded one") {
  auto stream = test_support::synthetic_stream(41, 2, 220);
  std::vector<Observation> batch(stream.observations.begin(),
                                 stream.observations.begin() + 20);

  RopeConfig thresholded;
  thresholded.schedule = ThresholdSchedule::constant(2.0);
  thresholded.n0 = 20;
  RopeConfig unthresholded;
  unthresholded.schedule = ThresholdSchedule::constant(1e12);
  unthresholded.n0 = 20;

  RopeEstimator a(batch, thresholded);
  RopeEstimator b(batch, unthresholded);
  for (int i = 20; i < 200; ++i) {
    a.step(stream.observations[i]);
    b.step(stream.observations[i]);
  }
  Observation outlier = stream.observations[200];
  outlier.b = 1e9;
  const Eigen::VectorXd a_before = a.estimate();
  const Eigen::VectorXd b_before = b.estimate();
  a.step(outlier);
  b.step(outlier);
  const double a_move = (a.estimate() - a_before).norm();
  const double b_move = (b.estimate() - b_before).norm();
  CHECK(b_move > 100.0 * a_move);
}

TEST_CASE("estimate converges on streams with a known fixed point") {
  SUBCASE("noiseless d=1 stream reaches 4/3 within 1e-6") {
    auto batch = repeat_obs(obs1(1, 0.75, 1), 10);
    RopeEstimator est(batch, huge_tau_config(10));
    for (int i = 0; i < 200; ++i) est.step(obs1(1, 0.75, 1));
    CHECK(est.estimate()(0) == doctest::Approx(4.0 / 3.0).epsilon(1e-6));
  }
  SUBCASE("two-state chain with normal noise: within 0.05 in >= 95% of 100 seeds") {
    const MdpSpec spec = two_state_chain();
    int hits = 0;
    for (int rep = 0; rep < 100; ++rep) {
      RewardChannel channel;
      channel.noise = {NoiseKind::Normal, 1.0};
      channel.seed = derive_seed(909, rep, 2);
      StreamSampler sampler(spec, derive_seed(909, rep, 1), 0, channel);
      std::vector<Observation> batch;
      for (int i = 0; i < 100; ++i) batch.push_back(sampler.next());
      RopeConfig cfg;
      cfg.schedule = ThresholdSchedule{ThresholdFamily::ExperimentForm, 0.5, 1.0 / 3.0, 0.0};
      cfg.n0 = 100;
      RopeEstimator est(batch, cfg);
      for (int i = 100; i < 100000; ++i) est.step(sampler.next());
      if (std::fabs(est.estimate()(0) - 4.0 / 3.0) <= 0.05) ++hits;
    }
    CHECK(hits >= 95);
  }
}

TEST_CASE("dimension and finiteness guards on step") {
  auto batch = repeat_obs(obs1(1, 1, 1), 5);
  RopeEstimator est(batch, huge_tau_config(5));
  Observation bad;
  bad.x = Eigen::VectorXd::Ones(2);
  bad.z = Eigen::VectorXd::Ones(2);
  bad.b = 0.0;
  CHECK_THROWS_AS(est.step(bad), DataError);
  Observation nan_obs = obs1(1, 1, std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(est.step(nan_obs), DataError);
}
