#include "xpi/garnet.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "xpi/rng.hpp"

namespace xpi {

GarnetSpec GarnetSpec::standard(int n_states, int n_actions, unsigned long seed, double gamma) {
    GarnetSpec spec;
    spec.n_states = n_states;
    spec.n_actions = n_actions;
    spec.branching = (n_states + 1) / 2;
    spec.seed = seed;
    spec.gamma = gamma;
    return spec;
}

Mdp generate_garnet(const GarnetSpec& spec) {
    if (spec.n_states < 1 || spec.n_actions < 1)
        throw std::invalid_argument("generate_garnet: counts must be positive");
    if (spec.branching < 1 || spec.branching > spec.n_states)
        throw std::invalid_argument("generate_garnet: branching must be in [1, n_states]");
    if (spec.reward_sparsity < 0.0 || spec.reward_sparsity >= 1.0)
        throw std::invalid_argument("generate_garnet: reward_sparsity must be in [0,1)");

    Rng rng(spec.seed);
    std::vector<Eigen::MatrixXd> p(static_cast<std::size_t>(spec.n_actions),
                                   Eigen::MatrixXd::Zero(spec.n_states, spec.n_states));
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(spec.n_states, spec.n_actions);

    std::vector<int> all_states(static_cast<std::size_t>(spec.n_states));
    std::iota(all_states.begin(), all_states.end(), 0);

    for (int s = 0; s < spec.n_states; ++s) {
        for (int a = 0; a < spec.n_actions; ++a) {
            // Successors without replacement.
            std::vector<int> pool = all_states;
            rng.shuffle(pool);
            pool.resize(static_cast<std::size_t>(spec.branching));

            // Probabilities from sorted uniform cuts of [0,1].
            std::vector<double> cuts(static_cast<std::size_t>(spec.branching) + 1);
            cuts.front() = 0.0;
            cuts.back() = 1.0;
            for (int i = 1; i < spec.branching; ++i) cuts[static_cast<std::size_t>(i)] = rng.uniform();
            std::sort(cuts.begin(), cuts.end());
            for (int i = 0; i < spec.branching; ++i)
                p[static_cast<std::size_t>(a)](s, pool[static_cast<std::size_t>(i)]) +=
                    cuts[static_cast<std::size_t>(i) + 1] - cuts[static_cast<std::size_t>(i)];

            double gate = rng.uniform();
            double value = rng.uniform();
            if (gate >= spec.reward_sparsity) r(s, a) = value;
        }
    }
    return Mdp::make(spec.n_states, spec.n_actions, std::move(p), std::move(r), spec.gamma);
}

}  // namespace xpi
