#include "xpi/approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "xpi/kappa.hpp"

namespace xpi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Product treating a structural zero weight as absorbing, so 0 * inf = 0.
double mul0(double a, double b) {
    if (a == 0.0 || b == 0.0) return 0.0;
    return a * b;
}

struct SwapCandidate {
    int state;
    int runner_up;
    double cost;  // nu(s) * surrogate q gap
};

double measured_slack(const Mdp& mdp, const ValueFunction& v, double kappa,
                      const StateDistribution& nu, const ValueFunction& t_kappa_v,
                      const Policy& pi) {
    ValueFunction backed = apply_t_kappa_pi(mdp, pi, kappa, v);
    return nu.p.dot(t_kappa_v - backed);
}

}  // namespace

std::pair<Policy, double> approx_kappa_greedy(const Mdp& mdp, const ValueFunction& v,
                                              double kappa, const GreedyOracleConfig& cfg,
                                              Rng& rng) {
    if (cfg.delta < 0.0) throw std::invalid_argument("approx_kappa_greedy: delta must be >= 0");
    cfg.nu.validate();
    mdp.check_distribution(cfg.nu);

    SurrogateMdp sur = build_surrogate(mdp, v, kappa);
    auto [u, exact] = solve_optimal(sur.mdp, 1e-12);

    // Optimal q of the surrogate; per-state gaps rank the candidate swaps.
    QFunction q_u(mdp.n_states, mdp.n_actions);
    for (int a = 0; a < mdp.n_actions; ++a)
        q_u.col(a) = sur.mdp.rewards.col(a) +
                     sur.mdp.gamma * sur.mdp.transitions[static_cast<std::size_t>(a)] * u;

    Policy pi = exact;
    if (cfg.corruption_mode != CorruptionMode::none && cfg.delta > 0.0 && mdp.n_actions > 1) {
        std::vector<SwapCandidate> candidates;
        for (int s = 0; s < mdp.n_states; ++s) {
            int best = exact.action(s);
            int runner = -1;
            double runner_q = -kInf;
            for (int a = 0; a < mdp.n_actions; ++a) {
                if (a == best) continue;
                if (q_u(s, a) > runner_q) {
                    runner_q = q_u(s, a);
                    runner = a;
                }
            }
            double gap = q_u(s, best) - runner_q;
            if (runner >= 0 && gap > 0.0)
                candidates.push_back({s, runner, cfg.nu.p(s) * gap});
        }
        if (cfg.corruption_mode == CorruptionMode::worst_state_swap) {
            std::stable_sort(candidates.begin(), candidates.end(),
                             [](const SwapCandidate& a, const SwapCandidate& b) { return a.cost > b.cost; });
        } else {
            rng.shuffle(candidates);
        }

        for (const SwapCandidate& cand : candidates) {
            Policy tentative = pi;
            tentative.probs.row(cand.state).setZero();
            tentative.probs(cand.state, cand.runner_up) = 1.0;
            if (measured_slack(mdp, v, kappa, cfg.nu, u, tentative) <= cfg.delta) pi = tentative;
        }
    }

    double slack = std::max(0.0, measured_slack(mdp, v, kappa, cfg.nu, u, pi));
    return {pi, slack};
}

ApiTrace kappa_api(const Mdp& mdp, double kappa, const GreedyOracleConfig& cfg,
                   const StateDistribution& mu, int k, const Policy& pi0) {
    if (k < 1) throw std::invalid_argument("kappa_api: k must be >= 1");
    mdp.check_policy(pi0);
    mdp.check_distribution(mu);

    auto [v_star, pi_star] = solve_optimal(mdp, 1e-10);
    ValueFunction v = evaluate_policy(mdp, pi0);

    ApiTrace trace;
    for (int it = 1; it <= k; ++it) {
        Rng rng(cfg.seed * 0x9e3779b97f4a7c15ULL + static_cast<unsigned long>(it));
        auto [pi, slack] = approx_kappa_greedy(mdp, v, kappa, cfg, rng);
        v = evaluate_policy(mdp, pi);
        trace.iterations.push_back({it, pi, v, loss(mu, v_star, v), slack});
    }
    return trace;
}

std::pair<NonStationaryPolicy, ApiTrace> kappa_psdp(const Mdp& mdp, double kappa,
                                                    const GreedyOracleConfig& cfg,
                                                    const StateDistribution& mu, int k,
                                                    const Policy& pi0) {
    if (k < 1) throw std::invalid_argument("kappa_psdp: k must be >= 1");
    mdp.check_policy(pi0);
    mdp.check_distribution(mu);

    auto [v_star, pi_star] = solve_optimal(mdp, 1e-10);

    NonStationaryPolicy sigma;
    sigma.kappa = kappa;
    sigma.base_policy = pi0;

    // The tracked value is by construction the exact value of the growing
    // non-stationary policy.
    ValueFunction v = evaluate_policy(mdp, pi0);

    ApiTrace trace;
    for (int it = 1; it <= k; ++it) {
        Rng rng(cfg.seed * 0x9e3779b97f4a7c15ULL + static_cast<unsigned long>(it));
        auto [pi, slack] = approx_kappa_greedy(mdp, v, kappa, cfg, rng);
        v = apply_t_kappa_pi(mdp, pi, kappa, v);
        sigma.stages.push_back(pi);
        trace.iterations.push_back({it, pi, v, loss(mu, v_star, v), slack});
    }
    return {sigma, trace};
}

ValueFunction eval_sigma(const Mdp& mdp, const NonStationaryPolicy& sigma) {
    ValueFunction v = evaluate_policy(mdp, sigma.base_policy);
    for (const Policy& stage : sigma.stages) v = apply_t_kappa_pi(mdp, stage, sigma.kappa, v);
    return v;
}

double rollout_sigma(const Mdp& mdp, const NonStationaryPolicy& sigma, int s0, int horizon,
                     Rng& rng) {
    if (horizon < 1) throw std::invalid_argument("rollout_sigma: horizon must be >= 1");
    if (s0 < 0 || s0 >= mdp.n_states) throw std::invalid_argument("rollout_sigma: s0 out of range");

    int s = s0;
    double ret = 0.0;
    double disc = 1.0;
    long t = 0;

    auto step_with = [&](int a) {
        ret += disc * mdp.reward(s, a);
        Eigen::VectorXd row = mdp.transitions[static_cast<std::size_t>(a)].row(s);
        s = rng.sample_index({row.data(), static_cast<std::size_t>(row.size())});
        disc *= mdp.gamma;
        ++t;
    };

    // Newest stage first. Each stage takes one mandatory step plus a
    // Geometric(1-kappa) number of extra ones; kappa = 1 never hands over.
    for (auto it = sigma.stages.rbegin(); it != sigma.stages.rend() && t < horizon; ++it) {
        long extra = sigma.kappa >= 1.0 ? horizon : rng.geometric(1.0 - sigma.kappa);
        long len = 1 + extra;
        for (long i = 0; i < len && t < horizon; ++i) step_with(it->action(s));
    }
    while (t < horizon) {
        Eigen::VectorXd row = sigma.base_policy.probs.row(s);
        int a = rng.sample_index({row.data(), static_cast<std::size_t>(row.size())});
        step_with(a);
    }
    return ret;
}

double loss(const StateDistribution& mu, const ValueFunction& v_star, const ValueFunction& v) {
    if (mu.p.size() != v_star.size() || v_star.size() != v.size())
        throw std::invalid_argument("loss: shape mismatch");
    return mu.p.dot(v_star - v);
}

int kstar(double kappa, double gamma, double delta, double r_max) {
    if (delta <= 0.0) throw std::invalid_argument("kstar: delta must be positive");
    double x = xi(gamma, kappa);
    double numer = std::log(r_max / (delta * (1.0 - gamma)));
    int k = static_cast<int>(std::ceil(numer / (1.0 - x)));
    return std::max(k, 1);
}

double performance_bound(BoundKind kind, const BoundInputs& in) {
    double x = xi(in.gamma, in.kappa);
    double one_minus_gamma = 1.0 - in.gamma;
    // C^{pi*(1)}_kappa = (xi/gamma) C^{pi*(1)} + (1-xi) kappa c(0)
    double c_ps1_kappa =
        mul0(x / in.gamma, in.C_pi_star_1) + mul0((1.0 - x) * in.kappa, in.c0);

    switch (kind) {
        case BoundKind::api_fixed: {
            double c_api = mul0((1.0 - in.kappa) * (1.0 - in.kappa), in.C2) +
                           mul0(one_minus_gamma * in.kappa,
                                mul0(1.0 - in.kappa, in.C1) +
                                    mul0(1.0 - in.gamma * in.kappa, c_ps1_kappa));
            return mul0(c_api / (one_minus_gamma * one_minus_gamma), in.delta) +
                   std::pow(x, in.k) * in.r_max / one_minus_gamma;
        }
        case BoundKind::psdp_fixed: {
            return mul0(c_ps1_kappa / (1.0 - x), in.delta) +
                   std::pow(x, in.k) * in.r_max / one_minus_gamma;
        }
        case BoundKind::api_kstar: {
            int kk = kstar(in.kappa, in.gamma, in.delta, in.r_max);
            double one_minus_kg = 1.0 - in.kappa * in.gamma;
            double ck1 = mul0(one_minus_kg, mul0(in.kappa * one_minus_kg, in.C_pi_star_kappa) +
                                                mul0((1.0 - in.kappa) * (1.0 - in.kappa), in.C1));
            double ck2 = mul0((1.0 - in.kappa) * in.kappa,
                              mul0(one_minus_gamma, in.C1) +
                                  mul0(in.g_kappa * (1.0 - in.kappa) * std::pow(in.gamma, kk), in.C2k));
            double log_term = std::max(0.0, std::log(in.r_max / (one_minus_gamma * in.delta)));
            return mul0(ck1 / (one_minus_gamma * one_minus_gamma) * log_term, in.delta) +
                   mul0(ck2 / (one_minus_gamma * one_minus_gamma), in.delta) + in.delta;
        }
        case BoundKind::psdp_kstar: {
            if (in.delta <= 0.0)
                throw std::invalid_argument("performance_bound: delta must be positive for kstar kinds");
            double log_term = std::max(0.0, std::log(in.r_max / (one_minus_gamma * in.delta)));
            return mul0(in.C_pi_star_kappa / ((1.0 - x) * (1.0 - x)) * log_term, in.delta) + in.delta;
        }
    }
    throw std::logic_error("performance_bound: unknown kind");
}

}  // namespace xpi
