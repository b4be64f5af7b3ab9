#pragma once

#include <vector>

#include "xpi/mdp.hpp"
#include "xpi/rng.hpp"

namespace xpi {

/// Decaying stepsizes mu_f(n) = n^{-fast_exponent}, mu_s(n) = (n+1)^{-slow_exponent}.
/// 0.5 < fast < slow <= 1 keeps both schedules square-summable-but-not-summable
/// and drives mu_s/mu_f -> 0. The slow schedule is offset by one so its first
/// step stays strictly below 1: a unit step would collapse the policy row to a
/// vertex on the first visit, and with actions drawn from the policy the
/// remaining actions could then never be sampled again.
struct StepSchedule {
    double fast_exponent = 0.6;
    double slow_exponent = 1.0;

    void validate() const;
    double fast(long n) const;
    double slow(long n) const;
};

/// One generative-model sample.
struct Transition {
    int s;
    int a;
    double r;
    int s_next;
};

/// Coupled learner state: two fast q-tables, the slowly updated policy, and
/// the visitation counters that index the stepsizes.
struct OnlineState {
    QFunction q;
    QFunction q_kappa;
    Policy pi;
    std::vector<long> state_counts;               // nu_n(s)
    std::vector<std::vector<long>> sa_counts;     // phi_n(s,a)
    long step = 0;

    static OnlineState initial(const Mdp& mdp);
};

struct OnlineSnapshot {
    long step;
    double q_err_inf;            // ||q_n - q*||_inf
    double qk_err_inf;           // ||q_{kappa,n} - q*||_inf
    double policy_match_frac;    // fraction of states where greedy(q_n) == pi*
};

struct OnlineTrace {
    std::vector<OnlineSnapshot> snapshots;
};

/// Draws s ~ nu, a ~ pi(s), s' ~ P(.|s,a); the reward is the deterministic
/// table entry r(s,a). nu must be strictly positive.
Transition sample_step(const Mdp& mdp, const StateDistribution& nu, const Policy& pi, Rng& rng);

/// Cautious improvement target at state s: the argmax of q_kappa when the
/// plain q certifies it does not degrade on the current policy value,
/// otherwise the argmax of q. Ties break to the lowest action index.
int cautious_action(int s, const QFunction& q, const QFunction& q_kappa, const Policy& pi);

/// One coupled step: counters first, the two fast temporal-difference updates,
/// then the slow convex policy move toward the cautious action.
OnlineState online_update(OnlineState state, const Mdp& mdp, const Transition& t,
                          const StepSchedule& sched, double kappa);

/// Exact expectation of the coupled fast update target: first component
/// (s,a) -> r(s,a) + gamma E[q(s',a^pi)], second
/// (s,a) -> r(s,a) + gamma(1-kappa) E[q(s',a^pi)] + kappa gamma E[max_a' q_kappa(s',a')].
std::pair<QFunction, QFunction> apply_h(const Mdp& mdp, const Policy& pi, double kappa,
                                        const QFunction& q, const QFunction& q_kappa);

/// Runs the full loop for n_steps samples; deterministic given the seed.
/// Snapshots are taken every snapshot_stride steps against solve_optimal's q*.
std::pair<OnlineState, OnlineTrace> run_online(const Mdp& mdp, const StateDistribution& nu,
                                               double kappa, const StepSchedule& sched,
                                               long n_steps, unsigned long seed,
                                               long snapshot_stride);

}  // namespace xpi
