#pragma once

#include <string>

#include "xpi/mdp.hpp"

namespace xpi {

/// JSON document with keys gamma, n_states, n_actions, rewards[s][a],
/// transitions[s][a][s']. Loading enforces all MDP invariants and reports
/// offending state/action indices.
Mdp load_mdp(const std::string& path);
void save_mdp(const Mdp& mdp, const std::string& path);

/// JSON array of n_states probabilities.
StateDistribution load_distribution(const std::string& path, int n_states);
void save_distribution(const StateDistribution& dist, const std::string& path);

}  // namespace xpi
