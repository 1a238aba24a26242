#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "rope/contamination.hpp"
#include "rope/observation.hpp"

namespace rope {

// Finite MDP under a fixed policy: the policy-induced transition kernel,
// expected state rewards, feature matrix and discount.
struct MdpSpec {
  Eigen::MatrixXd p;    // N x N, row-stochastic
  Eigen::VectorXd r;    // N
  Eigen::MatrixXd phi;  // N x d, full column rank
  double gamma = 0.9;

  int n_states() const { return static_cast<int>(p.rows()); }
  int dim() const { return static_cast<int>(phi.cols()); }
  Eigen::VectorXd feature(int state) const { return phi.row(state); }

  // Row-stochasticity, rank and range checks; throws ConstructionError.
  void validate() const;
};

// The canonical two-state chain: p = [[.5,.5],[.5,.5]], phi = (1,0)',
// r = (1,0), gamma = 1/2; its value parameter is exactly 4/3.
MdpSpec two_state_chain();

// Randomly generated environment: per-action Dirichlet kernels averaged
// under a random stochastic policy, orthonormalized Gaussian features, and
// rewards backed out of the Bellman equation for a uniform target value.
MdpSpec random_mdp(std::uint64_t seed, int n_states = 50, int n_actions = 5,
                   int d = 10, double gamma = 0.9);

struct GridworldConfig {
  double gamma = 0.95;
  int d = 4;
  double slip_prob = 0.0;  // probability of moving perpendicular
  int q_episodes = 100000;
  double q_learning_rate = 0.1;
  double q_epsilon = 0.1;
  // Exploration retained in the evaluated policy; 0 = greedy.
  double eval_epsilon = 0.1;
  int episode_cap = 1000;
  // Optional pre-trained policy: JSON {"policy": [n_states][n_actions]}
  // of action probabilities; skips Q-learning and eval_epsilon mixing.
  std::string policy_file;
};

// 8x8 lake-crossing gridworld with an absorbing goal; the policy is learned
// by tabular Q-learning on the true dynamics and the chain restarts at the
// start tile upon absorption so a stationary distribution exists.
MdpSpec gridworld_8x8(std::uint64_t seed, const GridworldConfig& config = {});

int gridworld_start_state();
int gridworld_goal_state();

// Stationary distribution by (lazy) power iteration. Requires a unique
// recurrent class; reducible kernels such as the identity are rejected.
Eigen::VectorXd stationary_distribution(const MdpSpec& spec);

// The unique solution of the projected fixed-point equations under the
// stationary law; the exact inferential target.
Eigen::VectorXd true_theta(const MdpSpec& spec);

Eigen::VectorXd target_vector(const MdpSpec& spec, int state);
double true_value(const MdpSpec& spec, int state);

// Seeded trajectory generator: walks the kernel with a counter-based
// generator and emits observations whose rewards pass through the
// contamination channel. Single-owner iterator.
class StreamSampler {
 public:
  StreamSampler(const MdpSpec& spec, std::uint64_t seed, int start_state,
                const RewardChannel& channel);

  Observation next();

  bool last_was_outlier() const { return last_outlier_; }
  int current_state() const { return state_; }
  std::int64_t emitted() const { return count_; }
  const MdpSpec& spec() const { return spec_; }

 private:
  int draw_next_state(int from, std::int64_t t);

  MdpSpec spec_;
  std::uint64_t seed_;
  int state_;
  std::int64_t count_ = 0;
  RewardSampler reward_;
  bool last_outlier_ = false;
};

}  // namespace rope
