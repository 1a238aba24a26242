#include "rope/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <thread>

#include "rope/csv.hpp"
#include "rope/errors.hpp"
#include "rope/lsa.hpp"

namespace rope {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point begin, Clock::time_point end) {
  return std::chrono::duration<double, std::milli>(end - begin).count();
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

ReplicateRow run_replicate(const ExperimentConfig& config, const MdpSpec& spec,
                           const OracleTarget& oracle, int replicate) {
  const std::uint64_t chain_seed = derive_seed(config.seeds, replicate, 1);
  const std::uint64_t channel_seed = derive_seed(config.seeds, replicate, 2);
  StreamSampler stream(spec, chain_seed, start_state_for(config),
                       config.channel(channel_seed));

  ReplicateRow row;
  row.replicate = replicate;
  row.method = config.method_name();
  row.env = config.env_name();
  row.noise = config.noise_name();
  row.alpha_form = config.alpha_form_name();
  row.n = config.n;
  if (config.method == MethodKind::Rope) {
    row.c = config.schedule.c_tau;
    row.beta = config.schedule.beta1;
  } else {
    row.c = config.alpha;
    row.beta = config.eta;
  }

  ConfidenceInterval ci;
  const auto begin = Clock::now();
  if (config.method == MethodKind::Rope) {
    std::vector<Observation> warm_batch;
    warm_batch.reserve(config.n0);
    for (int i = 0; i < config.n0; ++i) warm_batch.push_back(stream.next());

    RopeConfig rc;
    rc.schedule = config.schedule;
    rc.n0 = config.n0;
    rc.direct_refresh_period = config.refresh_period;
    RopeEstimator estimator(warm_batch, rc);
    LongRunCovariance cov(config.d, config.lambda);
    for (std::int64_t i = config.n0; i < config.n; ++i) {
      const Observation obs = stream.next();
      const StepInfo info = estimator.step(obs);
      cov.update(obs.x, info.g_val);
    }
    ci = confidence_interval(oracle.v, estimator.estimate(),
                             estimator.information_inverse(), cov,
                             estimator.steps_consumed(), config.xi);
  } else {
    LsaEstimator estimator(config.d,
                           config.lsa_config(derive_seed(config.seeds, replicate, 3)));
    for (std::int64_t i = 0; i < config.n; ++i) estimator.step(stream.next());
    ci = estimator.ci(oracle.v, config.xi);
  }
  const auto end = Clock::now();

  row.covered = ci.contains(oracle.truth) ? 1 : 0;
  row.ci_width = ci.width();
  row.abs_err = std::fabs(ci.center - oracle.truth);
  row.floored = ci.floored ? 1 : 0;
  row.runtime_ms = config.timing ? elapsed_ms(begin, end) : 0.0;
  row.finite = std::isfinite(ci.center) && std::isfinite(ci.half_width);
  return row;
}

CellAggregate aggregate_rows(const ExperimentConfig& config,
                             const std::vector<ReplicateRow>& rows) {
  CellAggregate agg;
  agg.method = config.method_name();
  agg.env = config.env_name();
  agg.noise = config.noise_name();
  agg.alpha_form = config.alpha_form_name();
  if (config.method == MethodKind::Rope) {
    agg.c = config.schedule.c_tau;
    agg.beta = config.schedule.beta1;
  } else {
    agg.c = config.alpha;
    agg.beta = config.eta;
  }
  agg.n = config.n;
  agg.m = static_cast<int>(rows.size());

  double covered = 0.0, width = 0.0, runtime = 0.0;
  int finite_count = 0;
  std::vector<double> errors;
  for (const ReplicateRow& row : rows) {
    runtime += row.runtime_ms;
    if (!row.finite) continue;
    ++finite_count;
    covered += row.covered;
    width += row.ci_width;
    errors.push_back(row.abs_err);
  }
  agg.coverage_rate = finite_count ? covered / finite_count
                                   : std::numeric_limits<double>::quiet_NaN();
  agg.mean_width = finite_count ? width / finite_count
                                : std::numeric_limits<double>::quiet_NaN();
  agg.median_abs_err = median(std::move(errors));
  agg.mean_runtime_ms = rows.empty() ? 0.0 : runtime / rows.size();
  return agg;
}

void dump_first_stream(const ExperimentConfig& config, const MdpSpec& spec) {
  const std::uint64_t chain_seed = derive_seed(config.seeds, 0, 1);
  const std::uint64_t channel_seed = derive_seed(config.seeds, 0, 2);
  StreamSampler stream(spec, chain_seed, start_state_for(config),
                       config.channel(channel_seed));
  std::vector<Observation> observations;
  std::vector<bool> outliers;
  observations.reserve(config.n);
  for (std::int64_t i = 0; i < config.n; ++i) {
    observations.push_back(stream.next());
    outliers.push_back(stream.last_was_outlier());
  }
  write_stream_csv(config.dump_stream, observations, &outliers);
}

}  // namespace

MdpSpec build_environment(const ExperimentConfig& config) {
  switch (config.env) {
    case EnvKind::TwoState:
      return two_state_chain();
    case EnvKind::RandomMdp:
      return random_mdp(config.env_seed, config.n_states, config.n_actions,
                        config.d, config.gamma);
    case EnvKind::Gridworld:
      return gridworld_8x8(config.env_seed, config.gridworld_config());
    case EnvKind::ExternalCsv:
      throw ConfigError("external_csv streams have no simulator environment");
  }
  throw ConfigError("unknown environment");
}

OracleTarget oracle_target(const ExperimentConfig& config, const MdpSpec& spec) {
  OracleTarget target;
  target.theta_star = true_theta(spec);
  if (config.target == TargetKind::Coordinate) {
    if (config.target_index >= spec.dim())
      throw ConfigError("target_index exceeds feature dimension");
    target.v = Eigen::VectorXd::Zero(spec.dim());
    target.v(config.target_index) = 1.0;
  } else {
    target.v = target_vector(spec, config.target_index);
  }
  target.truth = target.v.dot(target.theta_star);
  return target;
}

int start_state_for(const ExperimentConfig& config) {
  return config.env == EnvKind::Gridworld ? gridworld_start_state() : 0;
}

ExperimentReport run_cell(const ExperimentConfig& config) {
  ExperimentConfig cfg = config;
  cfg.validate();
  if (cfg.env == EnvKind::ExternalCsv)
    throw ConfigError("run_cell: use the estimate path for external streams");

  const MdpSpec spec = build_environment(cfg);
  cfg.d = spec.dim();
  const OracleTarget oracle = oracle_target(cfg, spec);
  if (!cfg.dump_stream.empty()) dump_first_stream(cfg, spec);

  const int m = cfg.replications;
  std::vector<ReplicateRow> rows(m);
  int n_threads = cfg.threads > 0
                      ? cfg.threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min(n_threads, m));

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= m) return;
      try {
        rows[static_cast<std::size_t>(r)] = run_replicate(cfg, spec, oracle, r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) workers.emplace_back(worker);
    for (auto& w : workers) w.join();
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentReport report;
  report.rows = std::move(rows);
  report.aggregates.push_back(aggregate_rows(cfg, report.rows));
  return report;
}

ExperimentReport run_sweep(const ExperimentConfig& config) {
  ExperimentConfig base = config;
  base.validate();

  const bool is_rope = base.method == MethodKind::Rope;
  std::vector<double> first_grid = is_rope ? base.sweep_c : base.sweep_alpha;
  std::vector<double> second_grid = is_rope ? base.sweep_beta : base.sweep_eta;
  std::vector<std::int64_t> n_grid = base.sweep_n;
  if (first_grid.empty())
    first_grid = {is_rope ? base.schedule.c_tau : base.alpha};
  if (second_grid.empty())
    second_grid = {is_rope ? base.schedule.beta1 : base.eta};
  if (n_grid.empty()) n_grid = {base.n};

  ExperimentReport report;
  for (double first : first_grid) {
    for (double second : second_grid) {
      for (std::int64_t n : n_grid) {
        ExperimentConfig point = base;
        point.dump_stream.clear();
        if (is_rope) {
          point.schedule.c_tau = first;
          point.schedule.beta1 = second;
        } else {
          point.alpha = first;
          point.eta = second;
        }
        point.n = n;
        try {
          ExperimentReport cell = run_cell(point);
          report.rows.insert(report.rows.end(), cell.rows.begin(),
                             cell.rows.end());
          report.aggregates.push_back(cell.aggregates.front());
        } catch (const std::exception& err) {
          CellAggregate failed;
          failed.method = point.method_name();
          failed.env = point.env_name();
          failed.noise = point.noise_name();
          failed.alpha_form = point.alpha_form_name();
          failed.c = first;
          failed.beta = second;
          failed.n = n;
          failed.m = 0;
          failed.coverage_rate = std::numeric_limits<double>::quiet_NaN();
          failed.mean_width = std::numeric_limits<double>::quiet_NaN();
          failed.median_abs_err = std::numeric_limits<double>::quiet_NaN();
          failed.mean_runtime_ms = 0.0;
          failed.note = err.what();
          report.aggregates.push_back(failed);
          std::cerr << "sweep point (" << first << ", " << second << ", n=" << n
                    << ") aborted: " << err.what() << "\n";
        }
      }
    }
  }
  return report;
}

EstimateResult estimate_from_csv(const ExperimentConfig& config) {
  if (config.csv.empty()) throw ConfigError("estimate: no csv path configured");
  if (config.target == TargetKind::StateValue)
    throw ConfigError("estimate: external streams support coordinate targets only");

  const StreamFile file = read_stream_csv(config.csv, config.d);
  const std::int64_t total = static_cast<std::int64_t>(file.observations.size());
  if (total <= config.n0)
    throw DataError("estimate: stream shorter than the warm-start length");
  const int d = static_cast<int>(file.observations.front().dim());
  if (config.target_index >= d)
    throw ConfigError("estimate: target_index exceeds stream dimension");

  std::vector<Observation> warm_batch(file.observations.begin(),
                                      file.observations.begin() + config.n0);
  RopeConfig rc;
  rc.schedule = config.schedule;
  rc.n0 = config.n0;
  rc.direct_refresh_period = config.refresh_period;
  RopeEstimator estimator(warm_batch, rc);
  LongRunCovariance cov(d, config.lambda);
  for (std::int64_t i = config.n0; i < total; ++i) {
    const Observation& obs = file.observations[static_cast<std::size_t>(i)];
    const StepInfo info = estimator.step(obs);
    cov.update(obs.x, info.g_val);
  }

  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  v(config.target_index) = 1.0;

  EstimateResult result;
  result.theta = estimator.estimate();
  result.sigma = cov.sigma();
  result.ci = confidence_interval(v, result.theta,
                                  estimator.information_inverse(), cov,
                                  estimator.steps_consumed(), config.xi);
  result.sigma_v = std::sqrt(
      std::max(result.ci.sigma_v_sq_raw, cov.variance_floor()));
  result.n_used = estimator.steps_consumed();
  result.warm_converged = estimator.warm_start_result().converged;
  return result;
}

void write_rows_csv(const ExperimentReport& report,
                    const ExperimentConfig& config, std::ostream& out) {
  out << "replicate,method,env,noise,alpha_form,C,beta,n,covered,ci_width,"
         "abs_err,floored,runtime_ms\n";
  for (const ReplicateRow& row : report.rows) {
    std::vector<std::string> cells = {
        std::to_string(row.replicate), row.method, row.env, row.noise,
        row.alpha_form, format_double(row.c), format_double(row.beta),
        std::to_string(row.n), std::to_string(row.covered),
        format_double(row.ci_width), format_double(row.abs_err),
        std::to_string(row.floored),
        format_double(config.timing ? row.runtime_ms : 0.0)};
    out << join_csv(cells) << '\n';
  }
}

void write_aggregates_csv(const ExperimentReport& report, std::ostream& out) {
  out << "method,env,noise,alpha_form,C,beta,n,M,coverage_rate,mean_width,"
         "median_abs_err,mean_runtime_ms\n";
  for (const CellAggregate& agg : report.aggregates) {
    std::vector<std::string> cells = {
        agg.method, agg.env, agg.noise, agg.alpha_form, format_double(agg.c),
        format_double(agg.beta), std::to_string(agg.n), std::to_string(agg.m),
        format_double(agg.coverage_rate), format_double(agg.mean_width),
        format_double(agg.median_abs_err), format_double(agg.mean_runtime_ms)};
    out << join_csv(cells) << '\n';
  }
}

void write_report(const ExperimentReport& report, const ExperimentConfig& config) {
  {
    std::ofstream out(config.output);
    if (!out) throw Error("cannot open '" + config.output + "' for writing");
    write_rows_csv(report, config, out);
  }
  {
    const std::string path = config.aggregate_path();
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    write_aggregates_csv(report, out);
  }
}

}  // namespace rope
