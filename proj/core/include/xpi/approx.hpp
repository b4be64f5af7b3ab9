#pragma once

#include <optional>
#include <vector>

#include "xpi/mdp.hpp"
#include "xpi/rng.hpp"

namespace xpi {

enum class CorruptionMode { none, worst_state_swap, random_swap };

/// Configuration of the controlled-error greedy oracle. delta is the allowed
/// nu-weighted shortfall of the returned policy's kappa-weighted backup
/// against the optimal one.
struct GreedyOracleConfig {
    double delta = 0.0;
    StateDistribution nu;
    CorruptionMode corruption_mode = CorruptionMode::none;
    unsigned long seed = 0;
};

/// Controlled-error greedy step. Starts from the exact kappa-greedy policy and,
/// when corruption is requested, swaps per-state actions to the runner-up of
/// the surrogate q for as long as the measured slack nu (T_kappa v - T^pi_kappa v)
/// stays within delta. Returns the policy and the slack it actually achieved.
std::pair<Policy, double> approx_kappa_greedy(const Mdp& mdp, const ValueFunction& v,
                                              double kappa, const GreedyOracleConfig& cfg,
                                              Rng& rng);

struct ApiIteration {
    int iteration;
    Policy policy;
    ValueFunction value;       // exact value tracked by the algorithm at this iteration
    double loss;               // mu (v* - value)
    double achieved_slack;     // slack reported by the oracle call
};

struct ApiTrace {
    std::vector<ApiIteration> iterations;
};

/// Hard-update approximate policy iteration: each iteration takes the oracle
/// policy w.r.t. the previous exact policy value.
ApiTrace kappa_api(const Mdp& mdp, double kappa, const GreedyOracleConfig& cfg,
                   const StateDistribution& mu, int k, const Policy& pi0);

/// Ordered stage policies plus the geometric switching rate; the value is the
/// composition of kappa-weighted backups applied to v^{pi_0}.
struct NonStationaryPolicy {
    std::vector<Policy> stages;  // stage 1 first; all deterministic
    double kappa = 0.0;
    Policy base_policy;
};

/// Policy-search variant: the tracked value moves by one kappa-weighted backup
/// per iteration and the stage list grows by the oracle policy.
std::pair<NonStationaryPolicy, ApiTrace> kappa_psdp(const Mdp& mdp, double kappa,
                                                    const GreedyOracleConfig& cfg,
                                                    const StateDistribution& mu, int k,
                                                    const Policy& pi0);

/// Exact value of the non-stationary policy: v^{pi_0} pushed through the stage
/// backups in order.
ValueFunction eval_sigma(const Mdp& mdp, const NonStationaryPolicy& sigma);

/// Monte-Carlo rollout of the non-stationary policy from s0. Each stage, newest
/// to oldest, runs for 1 + Geometric(1-kappa) steps (one mandatory step, then a
/// geometric number of extra ones); the base policy then runs until the horizon.
double rollout_sigma(const Mdp& mdp, const NonStationaryPolicy& sigma, int s0, int horizon,
                     Rng& rng);

/// mu-weighted loss mu . (v_star - v).
double loss(const StateDistribution& mu, const ValueFunction& v_star, const ValueFunction& v);

enum class BoundKind { api_fixed, api_kstar, psdp_fixed, psdp_kstar };

/// Concentrability inputs of the performance bounds; any entry may be +infinity.
struct BoundInputs {
    double kappa = 0.0;
    double gamma = 0.0;
    double delta = 0.0;
    int k = 0;  // iteration index for the fixed-k bounds
    double r_max = 0.0;
    double c0 = 1.0;              // c(0)
    double C1 = 1.0;              // C^(1)(mu,nu)
    double C2 = 1.0;              // C^(2)(mu,nu)
    double C2k = 1.0;             // C^(2,k)(mu,nu) evaluated at the k actually used
    double C_pi_star_1 = 1.0;     // C^{pi*(1)}(mu,nu)
    double C_pi_star_kappa = 1.0; // C^{pi*}_kappa(mu,nu)
    double g_kappa = 1.0;         // heuristic cap unless a caller supplies one
    bool g_kappa_is_default = true;
};

/// Iteration count that drives the geometric term below delta.
int kstar(double kappa, double gamma, double delta, double r_max);

/// Evaluates the loss bound of the requested kind. The *_kstar kinds use
/// kstar(...) internally and require delta > 0.
double performance_bound(BoundKind kind, const BoundInputs& in);

}  // namespace xpi
