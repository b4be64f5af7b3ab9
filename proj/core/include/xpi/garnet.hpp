#pragma once

#include "xpi/mdp.hpp"

namespace xpi {

/// Random-MDP benchmark family: every (s,a) reaches `branching` successor
/// states with probabilities cut uniformly; rewards are uniform on [0,1] on a
/// sparse subset of pairs and zero elsewhere. Fully determined by the seed.
struct GarnetSpec {
    int n_states;
    int n_actions;
    int branching;
    double reward_sparsity = 0.5;  // fraction of (s,a) pairs with zero reward
    unsigned long seed = 0;
    double gamma = 0.9;

    /// The two-parameter family used throughout the experiment suites:
    /// branching = ceil(n_states / 2), default sparsity and gamma.
    static GarnetSpec standard(int n_states, int n_actions, unsigned long seed,
                               double gamma = 0.9);
};

Mdp generate_garnet(const GarnetSpec& spec);

}  // namespace xpi
