#pragma once

#include <optional>
#include <vector>

#include "xpi/mdp.hpp"

namespace xpi {

/// Contraction factor of the kappa-weighted operators:
/// xi = gamma (1 - kappa) / (1 - gamma kappa), in [0, gamma].
double xi(double gamma, double kappa);

/// kappa together with its derived contraction factor.
struct KappaContext {
    double kappa;
    double gamma;
    double xi;

    static KappaContext make(double gamma, double kappa);
};

/// The kappa*gamma-discounted problem with reward shaped by a value function:
/// r_shaped(s,a) = r(s,a) + (1-kappa) gamma sum_{s'} P(s'|s,a) v(s').
/// Transitions are those of the base MDP; discount may be zero (bandit case).
struct SurrogateMdp {
    Mdp mdp;
    double kappa;
    ValueFunction shaping_value;
};

SurrogateMdp build_surrogate(const Mdp& mdp, const ValueFunction& v, double kappa);

/// Linear solve of (I - kappa gamma P^pi) x = r^pi + (1-kappa) gamma P^pi v.
ValueFunction apply_t_kappa_pi(const Mdp& mdp, const Policy& pi, double kappa,
                               const ValueFunction& v);

/// Optimal kappa-weighted backup: solves the surrogate to accuracy tol and
/// returns its optimal value together with a deterministic optimal policy
/// (lowest action index on ties).
std::pair<ValueFunction, Policy> apply_t_kappa(const Mdp& mdp, double kappa,
                                               const ValueFunction& v, double tol);

/// The policy half of apply_t_kappa.
Policy kappa_greedy_policy(const Mdp& mdp, const ValueFunction& v, double kappa,
                           double tol = 1e-10);

/// Optimal q-function of the surrogate built from v^pi; the greedy policy
/// w.r.t. the result is a kappa-greedy policy w.r.t. v^pi.
QFunction q_kappa(const Mdp& mdp, const Policy& pi, double kappa, double tol = 1e-10);

/// 1-step greedy policy w.r.t. T^{h-1} v, computed by h-1 exact optimal backups.
Policy h_greedy_policy(const Mdp& mdp, const ValueFunction& v, int h);

struct IterationRecord {
    int iteration;
    double value_change_inf;                 // ||v^{pi_k} - v^{pi_{k-1}}||_inf
    std::optional<double> optimality_gap;    // ||v_star - v^{pi_k}||_inf when v_star given
};

struct KappaPiResult {
    Policy policy;
    std::vector<IterationRecord> iterations;
    bool truncated = false;  // max_iters exhausted before the stop rule fired
};

/// Exact kappa policy iteration: alternate the kappa-greedy step with exact
/// policy evaluation until the value stops moving by more than tol.
KappaPiResult exact_kappa_pi(const Mdp& mdp, double kappa, double tol, int max_iters,
                             const std::optional<ValueFunction>& v_star = std::nullopt);

}  // namespace xpi
