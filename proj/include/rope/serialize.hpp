#pragma once

#include <string>

#include "rope/mdp.hpp"

namespace rope {

// JSON layout: {"n_states": N, "d": d, "gamma": g,
//               "p": [N*N row-major], "r": [N], "phi": [N*d row-major]}
std::string mdp_to_json(const MdpSpec& spec);
MdpSpec mdp_from_json(const std::string& text);

void save_mdp(const MdpSpec& spec, const std::string& path);
MdpSpec load_mdp(const std::string& path);

}  // namespace rope
