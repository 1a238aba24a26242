#pragma once

#include <Eigen/Core>

#include "rope/errors.hpp"

namespace rope {

// One streaming tuple built from consecutive states:
//   x = phi(s_i), z = phi(s_i) - gamma * phi(s_{i+1}), b = observed reward.
struct Observation {
  Eigen::VectorXd x;
  Eigen::VectorXd z;
  double b = 0.0;

  Eigen::Index dim() const { return x.size(); }
};

inline void check_observation(const Observation& obs, Eigen::Index expected_dim) {
  if (obs.x.size() != expected_dim || obs.z.size() != expected_dim)
    throw DataError("observation dimension mismatch");
  if (!obs.x.allFinite() || !obs.z.allFinite() || !std::isfinite(obs.b))
    throw DataError("observation contains non-finite entries");
}

}  // namespace rope
