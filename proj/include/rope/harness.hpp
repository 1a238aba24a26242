#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rope/config.hpp"
#include "rope/estimator.hpp"
#include "rope/longrun_cov.hpp"

namespace rope {

struct ReplicateRow {
  int replicate = 0;
  std::string method, env, noise, alpha_form;
  // For method = lsa these two carry (alpha, eta).
  double c = 0.0, beta = 0.0;
  std::int64_t n = 0;
  int covered = 0;
  double ci_width = 0.0;
  double abs_err = 0.0;
  int floored = 0;
  double runtime_ms = 0.0;
  bool finite = true;
};

struct CellAggregate {
  std::string method, env, noise, alpha_form;
  double c = 0.0, beta = 0.0;
  std::int64_t n = 0;
  int m = 0;
  double coverage_rate = 0.0;
  double mean_width = 0.0;
  double median_abs_err = 0.0;
  double mean_runtime_ms = 0.0;
  std::string note;  // non-empty when a cell was aborted
};

struct ExperimentReport {
  std::vector<ReplicateRow> rows;
  std::vector<CellAggregate> aggregates;
};

// Run one experiment cell: shared environment, seeded replicates in
// parallel, one row per replicate plus a trailing aggregate.
ExperimentReport run_cell(const ExperimentConfig& config);

// Cartesian sweep over the configured grids; one aggregate row per point.
// Failed points are recorded and the sweep continues.
ExperimentReport run_sweep(const ExperimentConfig& config);

// Full pipeline on an externally supplied stream file.
struct EstimateResult {
  Eigen::VectorXd theta;
  Eigen::MatrixXd sigma;
  ConfidenceInterval ci;
  double sigma_v = 0.0;
  std::int64_t n_used = 0;
  bool warm_converged = true;
};

EstimateResult estimate_from_csv(const ExperimentConfig& config);

void write_report(const ExperimentReport& report, const ExperimentConfig& config);
void write_rows_csv(const ExperimentReport& report, const ExperimentConfig& config,
                    std::ostream& out);
void write_aggregates_csv(const ExperimentReport& report, std::ostream& out);

// Oracle target for a configured environment: the projection vector and
// the true projected value.
struct OracleTarget {
  Eigen::VectorXd v;
  double truth = 0.0;
  Eigen::VectorXd theta_star;
};

MdpSpec build_environment(const ExperimentConfig& config);
OracleTarget oracle_target(const ExperimentConfig& config, const MdpSpec& spec);
int start_state_for(const ExperimentConfig& config);

}  // namespace rope
