#pragma once

// Independent reference computations for the test suite. Everything here
// deliberately avoids the library's solver paths: policy values come from
// truncated power series, optima from exhaustive policy enumeration, and
// surrogate solutions from a plain fixed-sweep value iteration.

#include <cmath>
#include <vector>

#include "xpi/mdp.hpp"
#include "xpi/rng.hpp"

namespace oracles {

/// v^pi by truncated Neumann series sum_{t<=T} gamma^t (P^pi)^t r^pi.
inline xpi::ValueFunction series_value(const xpi::Mdp& mdp, const xpi::Policy& pi, int terms = 500) {
    Eigen::MatrixXd kernel = mdp.policy_kernel(pi);
    Eigen::VectorXd reward = mdp.policy_reward(pi);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(mdp.n_states);
    Eigen::VectorXd term = reward;
    double w = 1.0;
    for (int t = 0; t <= terms; ++t) {
        v += w * term;
        term = kernel * term;
        w *= mdp.gamma;
    }
    return v;
}

/// All deterministic policies of an MDP (n_actions^n_states of them).
inline std::vector<xpi::Policy> all_deterministic_policies(const xpi::Mdp& mdp) {
    std::vector<xpi::Policy> out;
    long total = 1;
    for (int s = 0; s < mdp.n_states; ++s) total *= mdp.n_actions;
    for (long code = 0; code < total; ++code) {
        long rest = code;
        std::vector<int> actions(static_cast<std::size_t>(mdp.n_states));
        for (int s = 0; s < mdp.n_states; ++s) {
            actions[static_cast<std::size_t>(s)] = static_cast<int>(rest % mdp.n_actions);
            rest /= mdp.n_actions;
        }
        out.push_back(xpi::Policy::from_actions(actions, mdp.n_actions));
    }
    return out;
}

/// Optimal value by exhaustive enumeration: the dominating deterministic policy.
inline std::pair<xpi::ValueFunction, xpi::Policy> enumerate_optimal(const xpi::Mdp& mdp,
                                                                    int terms = 2000) {
    std::vector<xpi::Policy> policies = all_deterministic_policies(mdp);
    xpi::ValueFunction best = series_value(mdp, policies.front(), terms);
    xpi::Policy best_pi = policies.front();
    for (std::size_t i = 1; i < policies.size(); ++i) {
        xpi::ValueFunction v = series_value(mdp, policies[i], terms);
        if ((v.array() > best.array() + 1e-12).any() && (v.array() >= best.array() - 1e-12).all()) {
            best = v;
            best_pi = policies[i];
        }
    }
    return {best, best_pi};
}

/// Plain q-value iteration on explicitly shaped rewards, fixed sweep count.
inline xpi::QFunction surrogate_q_vi(const xpi::Mdp& mdp, const xpi::ValueFunction& v, double kappa,
                                     int sweeps = 10000) {
    Eigen::MatrixXd shaped(mdp.n_states, mdp.n_actions);
    for (int a = 0; a < mdp.n_actions; ++a)
        shaped.col(a) = mdp.rewards.col(a) +
                        (1.0 - kappa) * mdp.gamma * mdp.transitions[static_cast<std::size_t>(a)] * v;
    double discount = kappa * mdp.gamma;
    xpi::QFunction q = xpi::QFunction::Zero(mdp.n_states, mdp.n_actions);
    for (int it = 0; it < sweeps; ++it) {
        Eigen::VectorXd best = q.rowwise().maxCoeff();
        for (int a = 0; a < mdp.n_actions; ++a)
            q.col(a) = shaped.col(a) + discount * mdp.transitions[static_cast<std::size_t>(a)] * best;
        if (discount == 0.0) break;
    }
    return q;
}

inline xpi::Mdp random_mdp(xpi::Rng& rng, int n_states, int n_actions, double gamma) {
    std::vector<Eigen::MatrixXd> p(static_cast<std::size_t>(n_actions),
                                   Eigen::MatrixXd::Zero(n_states, n_states));
    for (int a = 0; a < n_actions; ++a)
        for (int s = 0; s < n_states; ++s) {
            double total = 0.0;
            for (int s2 = 0; s2 < n_states; ++s2) {
                double w = rng.uniform() + 1e-3;
                p[static_cast<std::size_t>(a)](s, s2) = w;
                total += w;
            }
            p[static_cast<std::size_t>(a)].row(s) /= total;
        }
    Eigen::MatrixXd r(n_states, n_actions);
    for (int s = 0; s < n_states; ++s)
        for (int a = 0; a < n_actions; ++a) r(s, a) = rng.uniform(-1.0, 1.0);
    return xpi::Mdp::make(n_states, n_actions, std::move(p), std::move(r), gamma);
}

inline xpi::Policy random_policy(xpi::Rng& rng, int n_states, int n_actions) {
    xpi::Policy pi;
    pi.probs = Eigen::MatrixXd(n_states, n_actions);
    for (int s = 0; s < n_states; ++s) {
        double total = 0.0;
        for (int a = 0; a < n_actions; ++a) {
            double w = rng.uniform() + 1e-3;
            pi.probs(s, a) = w;
            total += w;
        }
        pi.probs.row(s) /= total;
    }
    return pi;
}

inline xpi::ValueFunction random_value(xpi::Rng& rng, int n_states, double scale = 10.0) {
    xpi::ValueFunction v(n_states);
    for (int s = 0; s < n_states; ++s) v(s) = rng.uniform(-scale, scale);
    return v;
}

inline xpi::StateDistribution random_distribution(xpi::Rng& rng, int n_states) {
    xpi::StateDistribution d;
    d.p = Eigen::VectorXd(n_states);
    double total = 0.0;
    for (int s = 0; s < n_states; ++s) {
        double w = rng.uniform() + 1e-3;
        d.p(s) = w;
        total += w;
    }
    d.p /= total;
    return d;
}

inline xpi::Policy hesitant() { return xpi::Policy::from_actions({0, 0, 0, 0}, 2); }

inline double inf_norm(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace oracles
