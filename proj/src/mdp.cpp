#include "rope/mdp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>
#include <utility>

#include <json.hpp>

namespace rope {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr double kConditionLimit = 1e12;

Eigen::MatrixXd orthonormal_features(CounterRng& rng, int n_states, int d) {
  for (int attempt = 0; attempt < 10; ++attempt) {
    Eigen::MatrixXd raw(n_states, d);
    for (int i = 0; i < n_states; ++i)
      for (int j = 0; j < d; ++j) raw(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n_states, d);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> rank_check(q);
    if (rank_check.rank() == d) return q;
  }
  throw ConstructionError("feature matrix rank-deficient after 10 redraws");
}

// Dirichlet(1,...,1) row: normalized exponentials.
Eigen::RowVectorXd stochastic_row(CounterRng& rng, int size) {
  Eigen::RowVectorXd row(size);
  double total = 0.0;
  for (int j = 0; j < size; ++j) {
    row(j) = rng.exponential();
    total += row(j);
  }
  return row / total;
}

}  // namespace

void MdpSpec::validate() const {
  const int n = n_states();
  const int d = dim();
  if (n < 1 || d < 1 || p.cols() != n || r.size() != n || phi.rows() != n)
    throw ConstructionError("MdpSpec: inconsistent shapes");
  // gamma = 0 is admitted as the degenerate no-discount limit (z = x).
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw ConstructionError("MdpSpec: gamma must lie in [0,1)");
  if (!p.allFinite() || !r.allFinite() || !phi.allFinite())
    throw ConstructionError("MdpSpec: non-finite entries");
  for (int i = 0; i < n; ++i) {
    if (p.row(i).minCoeff() < 0.0)
      throw ConstructionError("MdpSpec: negative transition probability");
    if (std::fabs(p.row(i).sum() - 1.0) > kRowSumTol) {
      std::ostringstream msg;
      msg << "MdpSpec: row " << i << " sums to " << p.row(i).sum();
      throw ConstructionError(msg.str());
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi);
  if (qr.rank() != d)
    throw ConstructionError("MdpSpec: feature matrix not full column rank");
}

MdpSpec two_state_chain() {
  MdpSpec spec;
  spec.p.resize(2, 2);
  spec.p << 0.5, 0.5, 0.5, 0.5;
  spec.r.resize(2);
  spec.r << 1.0, 0.0;
  spec.phi.resize(2, 1);
  spec.phi << 1.0, 0.0;
  spec.gamma = 0.5;
  return spec;
}

MdpSpec random_mdp(std::uint64_t seed, int n_states, int n_actions, int d,
                   double gamma) {
  if (d > n_states)
    throw ConstructionError("random_mdp: d must not exceed n_states");
  if (n_actions < 1) throw ConstructionError("random_mdp: need >= 1 action");

  CounterRng kernel_rng(seed, 1);
  CounterRng policy_rng(seed, 2);
  CounterRng feature_rng(seed, 3);
  CounterRng value_rng(seed, 4);

  // Policy-averaged kernel over per-action Dirichlet rows.
  std::vector<Eigen::MatrixXd> kernels(n_actions);
  for (int a = 0; a < n_actions; ++a) {
    kernels[a].resize(n_states, n_states);
    for (int s = 0; s < n_states; ++s)
      kernels[a].row(s) = stochastic_row(kernel_rng, n_states);
  }
  Eigen::MatrixXd policy(n_states, n_actions);
  for (int s = 0; s < n_states; ++s)
    policy.row(s) = stochastic_row(policy_rng, n_actions);

  MdpSpec spec;
  spec.gamma = gamma;
  spec.p.setZero(n_states, n_states);
  for (int a = 0; a < n_actions; ++a)
    for (int s = 0; s < n_states; ++s)
      spec.p.row(s) += policy(s, a) * kernels[a].row(s);

  spec.phi = orthonormal_features(feature_rng, n_states, d);

  // Draw a target value function and back the rewards out of the Bellman
  // equation, so the state values are known exactly.
  Eigen::VectorXd j_target(n_states);
  for (int s = 0; s < n_states; ++s) j_target(s) = value_rng.u01();
  spec.r = j_target - gamma * spec.p * j_target;

  spec.validate();
  return spec;
}

namespace {

// Standard 8x8 lake map: S start, F frozen, H hole, G goal.
constexpr std::array<const char*, 8> kLakeMap = {
    "SFFFFFFF", "FFFFFFFF", "FFFHFFFF", "FFFFFHFF",
    "FFFHFFFF", "FHHFFFHF", "FHFFHFHF", "FFFHFFFG"};
constexpr int kGridSide = 8;
constexpr int kGridStates = kGridSide * kGridSide;
constexpr int kStartState = 0;
constexpr int kGoalState = kGridStates - 1;

bool is_hole(int s) {
  return kLakeMap[s / kGridSide][s % kGridSide] == 'H';
}

bool is_absorbing(int s) { return is_hole(s) || s == kGoalState; }

// Actions: 0 left, 1 down, 2 right, 3 up. Moves into walls stay put.
int move_from(int s, int action) {
  int row = s / kGridSide, col = s % kGridSide;
  switch (action) {
    case 0: col = std::max(col - 1, 0); break;
    case 1: row = std::min(row + 1, kGridSide - 1); break;
    case 2: col = std::min(col + 1, kGridSide - 1); break;
    case 3: row = std::max(row - 1, 0); break;
    default: break;
  }
  return row * kGridSide + col;
}

// Per-action next-state distribution (before the restart conversion).
std::vector<std::pair<int, double>> action_transition(int s, int action,
                                                      double slip) {
  if (slip <= 0.0) return {{move_from(s, action), 1.0}};
  const int left = (action + 3) % 4;
  const int right = (action + 1) % 4;
  return {{move_from(s, action), 1.0 - slip},
          {move_from(s, left), slip / 2.0},
          {move_from(s, right), slip / 2.0}};
}

std::vector<int> greedy_actions(const Eigen::MatrixXd& q, int s) {
  std::vector<int> best;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < 4; ++a) {
    if (q(s, a) > best_val + 1e-12) {
      best_val = q(s, a);
      best = {a};
    } else if (q(s, a) > best_val - 1e-12) {
      best.push_back(a);
    }
  }
  return best;
}

Eigen::MatrixXd load_gridworld_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConstructionError("gridworld: cannot open policy file '" +
                                   path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
    const auto rows = doc.at("policy").get<std::vector<std::vector<double>>>();
    if (rows.size() != kGridStates)
      throw ConstructionError("gridworld: policy file must have one row per state");
    Eigen::MatrixXd policy(kGridStates, 4);
    for (int s = 0; s < kGridStates; ++s) {
      if (rows[s].size() != 4)
        throw ConstructionError("gridworld: policy rows must have 4 actions");
      double total = 0.0;
      for (int a = 0; a < 4; ++a) {
        if (rows[s][a] < 0.0)
          throw ConstructionError("gridworld: negative action probability");
        policy(s, a) = rows[s][a];
        total += rows[s][a];
      }
      if (std::fabs(total - 1.0) > 1e-9)
        throw ConstructionError("gridworld: policy row does not sum to 1");
    }
    return policy;
  } catch (const nlohmann::json::exception& err) {
    throw ConstructionError(std::string("gridworld: bad policy file: ") +
                            err.what());
  }
}

Eigen::MatrixXd q_learn_policy(std::uint64_t seed, const GridworldConfig& cfg) {
  CounterRng rng(seed, 11);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(kGridStates, 4);
  for (int episode = 0; episode < cfg.q_episodes; ++episode) {
    int s = kStartState;
    for (int t = 0; t < cfg.episode_cap && !is_absorbing(s); ++t) {
      int a;
      if (rng.u01() < cfg.q_epsilon) {
        a = static_cast<int>(rng.u01() * 4.0);
        a = std::min(a, 3);
      } else {
        const auto best = greedy_actions(q, s);
        a = best[static_cast<std::size_t>(rng.u01() * best.size()) %
                 best.size()];
      }
      // Sample the (possibly slippery) move.
      const auto dist = action_transition(s, a, cfg.slip_prob);
      double u = rng.u01();
      int next = dist.back().first;
      for (const auto& [state, prob] : dist) {
        if (u < prob) {
          next = state;
          break;
        }
        u -= prob;
      }
      const double reward = (next == kGoalState) ? 1.0 : 0.0;
      const double target =
          is_absorbing(next)
              ? reward
              : reward + cfg.gamma * q.row(next).maxCoeff();
      q(s, a) += cfg.q_learning_rate * (target - q(s, a));
      s = next;
    }
  }
  return q;
}

}  // namespace

int gridworld_start_state() { return kStartState; }
int gridworld_goal_state() { return kGoalState; }

MdpSpec gridworld_8x8(std::uint64_t seed, const GridworldConfig& config) {
  if (config.d < 1 || config.d > kGridStates)
    throw ConstructionError("gridworld: invalid feature dimension");

  Eigen::MatrixXd policy;
  if (!config.policy_file.empty()) {
    policy = load_gridworld_policy(config.policy_file);
  } else {
    const Eigen::MatrixXd q = q_learn_policy(seed, config);
    // epsilon-greedy mixture of the learned policy.
    policy = Eigen::MatrixXd::Zero(kGridStates, 4);
    for (int s = 0; s < kGridStates; ++s) {
      const auto best = greedy_actions(q, s);
      for (int a = 0; a < 4; ++a) policy(s, a) = config.eval_epsilon / 4.0;
      for (int a : best)
        policy(s, a) += (1.0 - config.eval_epsilon) / best.size();
    }
  }

  MdpSpec spec;
  spec.gamma = config.gamma;
  spec.p.setZero(kGridStates, kGridStates);
  for (int s = 0; s < kGridStates; ++s) {
    if (is_absorbing(s)) {
      // Episodic-to-ergodic conversion: restart at the start tile.
      spec.p(s, kStartState) = 1.0;
      continue;
    }
    for (int a = 0; a < 4; ++a) {
      if (policy(s, a) == 0.0) continue;
      for (const auto& [next, prob] : action_transition(s, a, config.slip_prob))
        spec.p(s, next) += policy(s, a) * prob;
    }
  }

  spec.r = Eigen::VectorXd::Zero(kGridStates);
  spec.r(kGoalState) = 1.0;

  CounterRng feature_rng(seed, 12);
  spec.phi = orthonormal_features(feature_rng, kGridStates, config.d);
  spec.validate();

  // The learned policy must actually reach the goal from the start tile.
  std::vector<bool> reachable(kGridStates, false);
  std::queue<int> frontier;
  frontier.push(kStartState);
  reachable[kStartState] = true;
  while (!frontier.empty()) {
    const int s = frontier.front();
    frontier.pop();
    for (int t = 0; t < kGridStates; ++t) {
      if (spec.p(s, t) > 0.0 && !reachable[t]) {
        reachable[t] = true;
        frontier.push(t);
      }
    }
  }
  if (!reachable[kGoalState])
    throw ConstructionError(
        "gridworld: learned policy never reaches the goal from the start "
        "tile (goal-reach probability 0)");
  return spec;
}

Eigen::VectorXd stationary_distribution(const MdpSpec& spec) {
  const int n = spec.n_states();

  // Reject kernels without a unique recurrent class. A state is recurrent
  // iff every state reachable from it can reach it back.
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (int s = 0; s < n; ++s) {
    std::queue<int> frontier;
    frontier.push(s);
    reach[s][s] = true;
    while (!frontier.empty()) {
      const int u = frontier.front();
      frontier.pop();
      for (int v = 0; v < n; ++v) {
        if (spec.p(u, v) > 0.0 && !reach[s][v]) {
          reach[s][v] = true;
          frontier.push(v);
        }
      }
    }
  }
  int recurrent_rep = -1;
  int n_classes = 0;
  std::vector<bool> seen(n, false);
  for (int s = 0; s < n; ++s) {
    bool recurrent = true;
    for (int t = 0; t < n && recurrent; ++t)
      if (reach[s][t] && !reach[t][s]) recurrent = false;
    if (!recurrent || seen[s]) continue;
    ++n_classes;
    recurrent_rep = s;
    for (int t = 0; t < n; ++t)
      if (reach[s][t] && reach[t][s]) seen[t] = true;
  }
  if (n_classes != 1) {
    std::ostringstream msg;
    msg << "stationary distribution: kernel has " << n_classes
        << " recurrent classes (reducible)";
    throw NumericError(msg.str());
  }
  (void)recurrent_rep;

  // Lazy power iteration; the half-identity mixing removes periodicity
  // without changing the stationary distribution.
  Eigen::VectorXd mu = Eigen::VectorXd::Constant(n, 1.0 / n);
  constexpr double kTol = 1e-12;
  constexpr int kMaxIter = 1000000;
  double gap = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kMaxIter; ++it) {
    Eigen::VectorXd next = 0.5 * (mu + spec.p.transpose() * mu);
    next /= next.sum();
    gap = (next - mu).lpNorm<1>();
    mu = std::move(next);
    if (gap <= kTol) break;
  }
  const double residual = (spec.p.transpose() * mu - mu).lpNorm<1>();
  if (residual > 1e-10) {
    std::ostringstream msg;
    msg << "stationary distribution: power iteration did not converge "
        << "(|mu'P - mu'|_1 = " << residual << ", last step " << gap << ")";
    throw NumericError(msg.str());
  }
  return mu;
}

Eigen::VectorXd true_theta(const MdpSpec& spec) {
  const Eigen::VectorXd mu = stationary_distribution(spec);
  const Eigen::MatrixXd weighted = mu.asDiagonal() * spec.phi;  // D * Phi
  const Eigen::MatrixXd h =
      spec.phi.transpose() *
      (mu.asDiagonal() * (spec.phi - spec.gamma * spec.p * spec.phi));
  const Eigen::VectorXd rhs = weighted.transpose() * spec.r;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(h);
  if (!(lu.rcond() > 1.0 / kConditionLimit))
    throw NumericError("true_theta: projected system ill-conditioned");
  Eigen::VectorXd theta = lu.solve(rhs);

  const double residual = (h * theta - rhs).norm();
  if (!(residual <= 1e-10)) {
    std::ostringstream msg;
    msg << "true_theta: fixed-point residual " << residual;
    throw NumericError(msg.str());
  }
  return theta;
}

Eigen::VectorXd target_vector(const MdpSpec& spec, int state) {
  if (state < 0 || state >= spec.n_states())
    throw DataError("target_vector: invalid state index");
  return spec.feature(state);
}

double true_value(const MdpSpec& spec, int state) {
  return target_vector(spec, state).dot(true_theta(spec));
}

StreamSampler::StreamSampler(const MdpSpec& spec, std::uint64_t seed,
                             int start_state, const RewardChannel& channel)
    : spec_(spec), seed_(seed), state_(start_state), reward_(channel) {
  if (start_state < 0 || start_state >= spec.n_states())
    throw DataError("stream: invalid start state");
}

int StreamSampler::draw_next_state(int from, std::int64_t t) {
  CounterRng rng(seed_, static_cast<std::uint64_t>(t));
  double u = rng.u01();
  const int n = spec_.n_states();
  for (int s = 0; s < n; ++s) {
    const double prob = spec_.p(from, s);
    if (u < prob) return s;
    u -= prob;
  }
  return n - 1;  // guard against accumulated rounding
}

Observation StreamSampler::next() {
  const int s = state_;
  const int next = draw_next_state(s, count_);
  const RewardDraw draw = reward_.emit(spec_.r(s), count_ + 1);
  last_outlier_ = draw.is_outlier;

  Observation obs;
  obs.x = spec_.feature(s);
  obs.z = obs.x - spec_.gamma * spec_.feature(next);
  obs.b = draw.b;

  state_ = next;
  ++count_;
  return obs;
}

}  // namespace rope
