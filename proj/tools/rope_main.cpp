#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "rope/csv.hpp"
#include "rope/harness.hpp"
#include "rope/serialize.hpp"

namespace {

// Every config key doubles as a CLI flag; flags override file values.
void add_config_flags(CLI::App* cmd, std::map<std::string, std::string>& overrides) {
  for (const std::string& key : rope::config_keys()) {
    cmd->add_option_function<std::string>(
        "--" + key,
        [&overrides, key](const std::string& value) { overrides[key] = value; });
  }
}

rope::ExperimentConfig load_config(const std::string& config_path,
                                   const std::map<std::string, std::string>& overrides) {
  std::map<std::string, std::string> file_values;
  if (!config_path.empty())
    file_values = rope::parse_key_value_file(config_path);
  return rope::make_config(file_values, overrides);
}

void print_aggregates(const rope::ExperimentReport& report) {
  for (const auto& agg : report.aggregates) {
    std::cout << agg.method << " " << agg.env << " noise=" << agg.noise
              << " alpha=" << agg.alpha_form << " C=" << rope::format_double(agg.c)
              << " beta=" << rope::format_double(agg.beta) << " n=" << agg.n
              << " M=" << agg.m
              << " coverage=" << rope::format_double(agg.coverage_rate)
              << " width=" << rope::format_double(agg.mean_width)
              << " median_err=" << rope::format_double(agg.median_abs_err)
              << " runtime_ms=" << rope::format_double(agg.mean_runtime_ms);
    if (!agg.note.empty()) std::cout << "  [aborted: " << agg.note << "]";
    std::cout << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust online policy evaluation: streaming estimator, "
               "confidence intervals, and experiment harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::map<std::string, std::string> overrides;

  auto* simulate = app.add_subcommand("simulate", "Run one experiment cell");
  simulate->add_option("--config", config_path, "key = value config file");
  add_config_flags(simulate, overrides);

  auto* sweep = app.add_subcommand("sweep", "Run a hyperparameter grid");
  sweep->add_option("--config", config_path, "key = value config file");
  add_config_flags(sweep, overrides);

  auto* estimate = app.add_subcommand("estimate", "Estimate from a stream CSV");
  estimate->add_option("--config", config_path, "key = value config file");
  add_config_flags(estimate, overrides);

  auto* export_env = app.add_subcommand("export-env", "Serialize an environment");
  export_env->add_option("--config", config_path, "key = value config file");
  std::string env_out = "env.json";
  export_env->add_option("--out", env_out, "output JSON path");
  add_config_flags(export_env, overrides);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      const auto config = load_config(config_path, overrides);
      const auto report = rope::run_cell(config);
      rope::write_report(report, config);
      print_aggregates(report);
      std::cout << "rows: " << config.output
                << "\naggregates: " << config.aggregate_path() << "\n";
    } else if (sweep->parsed()) {
      const auto config = load_config(config_path, overrides);
      const auto report = rope::run_sweep(config);
      rope::write_report(report, config);
      print_aggregates(report);
      std::cout << "rows: " << config.output
                << "\naggregates: " << config.aggregate_path() << "\n";
    } else if (estimate->parsed()) {
      const auto config = load_config(config_path, overrides);
      const auto result = rope::estimate_from_csv(config);
      std::cout << "n_used: " << result.n_used << "\n";
      if (!result.warm_converged)
        std::cout << "warning: warm start did not converge\n";
      std::cout << "theta_hat:";
      for (Eigen::Index j = 0; j < result.theta.size(); ++j)
        std::cout << " " << rope::format_double(result.theta(j));
      std::cout << "\nsigma_v: " << rope::format_double(result.sigma_v)
                << (result.ci.floored ? " (floored)" : "") << "\n";
      std::cout << "ci: [" << rope::format_double(result.ci.lower()) << ", "
                << rope::format_double(result.ci.upper()) << "] at level "
                << rope::format_double(result.ci.level) << "\n";
    } else if (export_env->parsed()) {
      const auto config = load_config(config_path, overrides);
      const auto spec = rope::build_environment(config);
      rope::save_mdp(spec, env_out);
      std::cout << "environment written to " << env_out << "\n";
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
