#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rope/contamination.hpp"
#include "rope/lsa.hpp"
#include "rope/mdp.hpp"
#include "rope/pseudo_huber.hpp"

namespace rope {

enum class EnvKind { TwoState, RandomMdp, Gridworld, ExternalCsv };
enum class MethodKind { Rope, Lsa };
enum class TargetKind { Coordinate, StateValue };

// Flat experiment configuration; file keys and CLI flags share these names.
struct ExperimentConfig {
  EnvKind env = EnvKind::TwoState;
  MethodKind method = MethodKind::Rope;
  std::int64_t n = 10000;  // total observations per replicate (incl. warm start)
  int n0 = 100;
  int replications = 100;

  ThresholdSchedule schedule;  // keys: schedule, C, beta, beta2

  NoiseSpec noise;          // keys: noise, noise_param
  RateSchedule alpha_rate;  // keys: alpha_form, alpha_c
  double outlier_low = 0.0;
  double outlier_high = 100.0;

  double lambda = 2.0;

  TargetKind target = TargetKind::Coordinate;
  int target_index = 0;  // coordinate index or state index (0-based)

  double xi = 0.05;
  std::uint64_t seeds = 12345;
  int threads = 0;  // 0 = hardware concurrency

  // Environment parameters.
  std::uint64_t env_seed = 777;
  int n_states = 50;
  int n_actions = 5;
  int d = 10;
  double gamma = 0.9;
  double slip_prob = 0.0;
  int q_episodes = 100000;
  double q_lr = 0.1;
  double q_epsilon = 0.1;
  double eval_epsilon = 0.1;
  std::string policy_file;

  // Method hyperparameters.
  double alpha = 0.5;
  double eta = 2.0 / 3.0;
  int b_boot = 200;
  std::int64_t refresh_period = 4096;

  // Sweep grids (empty = not swept).
  std::vector<double> sweep_c;
  std::vector<double> sweep_beta;
  std::vector<double> sweep_alpha;
  std::vector<double> sweep_eta;
  std::vector<std::int64_t> sweep_n;

  // I/O.
  std::string csv;  // input stream for env = external_csv
  std::string output = "rope_report.csv";
  std::string aggregate_output;  // default: output stem + "_agg.csv"
  std::string dump_stream;
  bool timing = true;  // when false, runtime_ms prints as 0

  void validate() const;

  std::string aggregate_path() const;
  std::string env_name() const;
  std::string method_name() const;
  std::string noise_name() const;
  std::string alpha_form_name() const;

  RewardChannel channel(std::uint64_t channel_seed) const;
  GridworldConfig gridworld_config() const;
  LsaConfig lsa_config(std::uint64_t lsa_seed) const;
};

// key = value lines; '#' starts a comment; unknown keys are rejected.
std::map<std::string, std::string> parse_key_value_file(const std::string& path);

ExperimentConfig make_config(const std::map<std::string, std::string>& file_values,
                             const std::map<std::string, std::string>& overrides);

// All recognized keys, for CLI flag generation.
const std::vector<std::string>& config_keys();

}  // namespace rope
