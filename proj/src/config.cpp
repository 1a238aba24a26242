#include "rope/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "rope/errors.hpp"

namespace rope {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" +
                      value + "'");
  }
}

std::int64_t to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long parsed = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects an integer, got '" +
                      value + "'");
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config: key '" + key + "' expects a boolean, got '" +
                    value + "'");
}

template <typename T, typename Parse>
std::vector<T> to_list(const std::string& key, const std::string& value,
                       Parse parse) {
  std::vector<T> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse(key, item));
  }
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  schedule.validate();
  alpha_rate.validate();
  if (n <= 0) throw ConfigError("config: n must be > 0");
  if (n0 < 1) throw ConfigError("config: n0 must be >= 1");
  if (method == MethodKind::Rope && env != EnvKind::ExternalCsv && n <= n0)
    throw ConfigError("config: n must exceed n0");
  if (replications < 1) throw ConfigError("config: replications must be >= 1");
  if (!(xi > 0.0 && xi < 1.0)) throw ConfigError("config: xi must lie in (0,1)");
  if (!(lambda > 0.0)) throw ConfigError("config: lambda must be > 0");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw ConfigError("config: gamma must lie in [0,1)");
  if (target_index < 0) throw ConfigError("config: target_index must be >= 0");
  if (env == EnvKind::ExternalCsv && csv.empty())
    throw ConfigError("config: env external_csv requires key 'csv'");
  if (!(outlier_high >= outlier_low))
    throw ConfigError("config: outlier_high must be >= outlier_low");
}

std::string ExperimentConfig::aggregate_path() const {
  if (!aggregate_output.empty()) return aggregate_output;
  const auto dot = output.rfind(".csv");
  if (dot != std::string::npos && dot == output.size() - 4)
    return output.substr(0, dot) + "_agg.csv";
  return output + "_agg.csv";
}

std::string ExperimentConfig::env_name() const {
  switch (env) {
    case EnvKind::TwoState: return "two_state";
    case EnvKind::RandomMdp: return "random_mdp";
    case EnvKind::Gridworld: return "gridworld";
    case EnvKind::ExternalCsv: return "external_csv";
  }
  return "?";
}

std::string ExperimentConfig::method_name() const {
  return method == MethodKind::Rope ? "rope" : "lsa";
}

std::string ExperimentConfig::noise_name() const {
  switch (noise.kind) {
    case NoiseKind::None: return "none";
    case NoiseKind::Normal: return "normal";
    case NoiseKind::StudentT: return "student_t";
    case NoiseKind::Cauchy: return "cauchy";
  }
  return "?";
}

std::string ExperimentConfig::alpha_form_name() const {
  switch (alpha_rate.form) {
    case RateForm::Zero: return "zero";
    case RateForm::InverseN: return "inverse_n";
    case RateForm::CSqrtInvN: return "c_sqrt_inv_n";
    case RateForm::Constant: return "constant";
  }
  return "?";
}

RewardChannel ExperimentConfig::channel(std::uint64_t channel_seed) const {
  RewardChannel ch;
  ch.noise = noise;
  ch.outlier.rate = alpha_rate;
  ch.outlier.low = outlier_low;
  ch.outlier.high = outlier_high;
  ch.seed = channel_seed;
  return ch;
}

GridworldConfig ExperimentConfig::gridworld_config() const {
  GridworldConfig g;
  g.gamma = gamma;
  g.d = d;
  g.slip_prob = slip_prob;
  g.q_episodes = q_episodes;
  g.q_learning_rate = q_lr;
  g.q_epsilon = q_epsilon;
  g.eval_epsilon = eval_epsilon;
  g.policy_file = policy_file;
  return g;
}

LsaConfig ExperimentConfig::lsa_config(std::uint64_t lsa_seed) const {
  LsaConfig l;
  l.alpha = alpha;
  l.eta = eta;
  l.b_boot = b_boot;
  l.seed = lsa_seed;
  return l;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "env", "method", "n", "n0", "replications",
      "schedule", "C", "beta", "beta2",
      "noise", "noise_param", "alpha_form", "alpha_c",
      "outlier_low", "outlier_high",
      "lambda", "target", "target_index", "xi", "seeds", "threads",
      "env_seed", "n_states", "n_actions", "d", "gamma",
      "slip_prob", "q_episodes", "q_lr", "q_epsilon", "eval_epsilon", "policy_file",
      "alpha", "eta", "b_boot", "refresh_period",
      "sweep_c", "sweep_beta", "sweep_alpha", "sweep_eta", "sweep_n",
      "csv", "output", "aggregate_output", "dump_stream", "timing"};
  return keys;
}

std::map<std::string, std::string> parse_key_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << "config file line " << line_no << ": expected key = value";
      throw ConfigError(msg.str());
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      std::ostringstream msg;
      msg << "config file line " << line_no << ": empty key";
      throw ConfigError(msg.str());
    }
    values[key] = value;
  }
  return values;
}

namespace {

void apply_one(ExperimentConfig& cfg, const std::string& key,
               const std::string& value) {
  if (key == "env") {
    if (value == "two_state") cfg.env = EnvKind::TwoState;
    else if (value == "random_mdp") cfg.env = EnvKind::RandomMdp;
    else if (value == "gridworld") cfg.env = EnvKind::Gridworld;
    else if (value == "external_csv") cfg.env = EnvKind::ExternalCsv;
    else throw ConfigError("config: unknown env '" + value + "'");
  } else if (key == "method") {
    if (value == "rope") cfg.method = MethodKind::Rope;
    else if (value == "lsa") cfg.method = MethodKind::Lsa;
    else throw ConfigError("config: unknown method '" + value + "'");
  } else if (key == "n") {
    cfg.n = to_int(key, value);
  } else if (key == "n0") {
    cfg.n0 = static_cast<int>(to_int(key, value));
  } else if (key == "replications") {
    cfg.replications = static_cast<int>(to_int(key, value));
  } else if (key == "schedule") {
    if (value == "experiment") cfg.schedule.family = ThresholdFamily::ExperimentForm;
    else if (value == "theorem") cfg.schedule.family = ThresholdFamily::TheoremForm;
    else if (value == "constant") cfg.schedule.family = ThresholdFamily::Constant;
    else throw ConfigError("config: unknown schedule '" + value + "'");
  } else if (key == "C") {
    cfg.schedule.c_tau = to_double(key, value);
  } else if (key == "beta") {
    cfg.schedule.beta1 = to_double(key, value);
  } else if (key == "beta2") {
    cfg.schedule.beta2 = to_double(key, value);
  } else if (key == "noise") {
    if (value == "none") cfg.noise.kind = NoiseKind::None;
    else if (value == "normal") cfg.noise.kind = NoiseKind::Normal;
    else if (value == "student_t") cfg.noise.kind = NoiseKind::StudentT;
    else if (value == "cauchy") cfg.noise.kind = NoiseKind::Cauchy;
    else throw ConfigError("config: unknown noise '" + value + "'");
  } else if (key == "noise_param") {
    cfg.noise.param = to_double(key, value);
  } else if (key == "alpha_form") {
    if (value == "zero") cfg.alpha_rate.form = RateForm::Zero;
    else if (value == "inverse_n") cfg.alpha_rate.form = RateForm::InverseN;
    else if (value == "c_sqrt_inv_n") cfg.alpha_rate.form = RateForm::CSqrtInvN;
    else if (value == "constant") cfg.alpha_rate.form = RateForm::Constant;
    else throw ConfigError("config: unknown alpha_form '" + value + "'");
  } else if (key == "alpha_c") {
    cfg.alpha_rate.value = to_double(key, value);
  } else if (key == "outlier_low") {
    cfg.outlier_low = to_double(key, value);
  } else if (key == "outlier_high") {
    cfg.outlier_high = to_double(key, value);
  } else if (key == "lambda") {
    cfg.lambda = to_double(key, value);
  } else if (key == "target") {
    if (value == "coordinate") cfg.target = TargetKind::Coordinate;
    else if (value == "state_value") cfg.target = TargetKind::StateValue;
    else throw ConfigError("config: unknown target '" + value + "'");
  } else if (key == "target_index") {
    cfg.target_index = static_cast<int>(to_int(key, value));
  } else if (key == "xi") {
    cfg.xi = to_double(key, value);
  } else if (key == "seeds") {
    cfg.seeds = static_cast<std::uint64_t>(to_int(key, value));
  } else if (key == "threads") {
    cfg.threads = static_cast<int>(to_int(key, value));
  } else if (key == "env_seed") {
    cfg.env_seed = static_cast<std::uint64_t>(to_int(key, value));
  } else if (key == "n_states") {
    cfg.n_states = static_cast<int>(to_int(key, value));
  } else if (key == "n_actions") {
    cfg.n_actions = static_cast<int>(to_int(key, value));
  } else if (key == "d") {
    cfg.d = static_cast<int>(to_int(key, value));
  } else if (key == "gamma") {
    cfg.gamma = to_double(key, value);
  } else if (key == "slip_prob") {
    cfg.slip_prob = to_double(key, value);
  } else if (key == "q_episodes") {
    cfg.q_episodes = static_cast<int>(to_int(key, value));
  } else if (key == "q_lr") {
    cfg.q_lr = to_double(key, value);
  } else if (key == "q_epsilon") {
    cfg.q_epsilon = to_double(key, value);
  } else if (key == "eval_epsilon") {
    cfg.eval_epsilon = to_double(key, value);
  } else if (key == "policy_file") {
    cfg.policy_file = value;
  } else if (key == "alpha") {
    cfg.alpha = to_double(key, value);
  } else if (key == "eta") {
    cfg.eta = to_double(key, value);
  } else if (key == "b_boot") {
    cfg.b_boot = static_cast<int>(to_int(key, value));
  } else if (key == "refresh_period") {
    cfg.refresh_period = to_int(key, value);
  } else if (key == "sweep_c") {
    cfg.sweep_c = to_list<double>(key, value, to_double);
  } else if (key == "sweep_beta") {
    cfg.sweep_beta = to_list<double>(key, value, to_double);
  } else if (key == "sweep_alpha") {
    cfg.sweep_alpha = to_list<double>(key, value, to_double);
  } else if (key == "sweep_eta") {
    cfg.sweep_eta = to_list<double>(key, value, to_double);
  } else if (key == "sweep_n") {
    cfg.sweep_n = to_list<std::int64_t>(key, value, to_int);
  } else if (key == "csv") {
    cfg.csv = value;
  } else if (key == "output") {
    cfg.output = value;
  } else if (key == "aggregate_output") {
    cfg.aggregate_output = value;
  } else if (key == "dump_stream") {
    cfg.dump_stream = value;
  } else if (key == "timing") {
    cfg.timing = to_bool(key, value);
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

}  // namespace

ExperimentConfig make_config(const std::map<std::string, std::string>& file_values,
                             const std::map<std::string, std::string>& overrides) {
  ExperimentConfig cfg;
  for (const auto& [key, value] : file_values) apply_one(cfg, key, value);
  for (const auto& [key, value] : overrides) apply_one(cfg, key, value);
  cfg.validate();
  return cfg;
}

}  // namespace rope
