#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace xpi {

/// Value function over states, in units of discounted return.
using ValueFunction = Eigen::VectorXd;

/// State-action value table, n_states x n_actions.
using QFunction = Eigen::MatrixXd;

/// Row-stochastic state -> action matrix. Deterministic policies are one-hot rows.
struct Policy {
    Eigen::MatrixXd probs;  // n_states x n_actions

    int n_states() const { return static_cast<int>(probs.rows()); }
    int n_actions() const { return static_cast<int>(probs.cols()); }

    /// Every row is one-hot.
    bool deterministic() const;

    /// Action of a deterministic policy at state s (argmax of the row).
    int action(int s) const;

    /// Throws std::invalid_argument unless rows are stochastic within 1e-12.
    void validate() const;

    static Policy uniform(int n_states, int n_actions);
    static Policy from_actions(const std::vector<int>& actions, int n_actions);
};

/// Probability vector over states. Roles: sampling measure nu, loss measure mu.
struct StateDistribution {
    Eigen::VectorXd p;

    int n_states() const { return static_cast<int>(p.size()); }
    bool strictly_positive() const { return (p.array() > 0.0).all(); }

    /// Throws std::invalid_argument unless entries are >= 0 and sum to 1 within 1e-12.
    void validate() const;

    static StateDistribution uniform(int n_states);
    static StateDistribution point_mass(int n_states, int s);
};

/// Finite MDP: states, actions, transition tensor, reward table, discount.
///
/// transitions[a] is the n_states x n_states kernel of action a, row s being
/// P(. | s, a). r_max = max |rewards| is cached at construction and reused by
/// every performance bound.
struct Mdp {
    int n_states = 0;
    int n_actions = 0;
    std::vector<Eigen::MatrixXd> transitions;  // per action, n_states x n_states
    Eigen::MatrixXd rewards;                   // n_states x n_actions
    double gamma = 0.0;
    double r_max = 0.0;

    /// Builds and validates a plain MDP (gamma strictly inside (0,1)).
    static Mdp make(int n_states, int n_actions, std::vector<Eigen::MatrixXd> transitions,
                    Eigen::MatrixXd rewards, double gamma);

    /// Same checks with gamma in [0,1); used for surrogate problems whose
    /// discount kappa*gamma may legitimately be zero.
    static Mdp make_relaxed(int n_states, int n_actions, std::vector<Eigen::MatrixXd> transitions,
                            Eigen::MatrixXd rewards, double gamma);

    double transition(int s, int a, int s_next) const { return transitions[static_cast<std::size_t>(a)](s, s_next); }
    double reward(int s, int a) const { return rewards(s, a); }

    /// Induced state kernel P^pi, (s,s') = sum_a pi(a|s) P(s'|s,a).
    Eigen::MatrixXd policy_kernel(const Policy& pi) const;

    /// Induced reward r^pi, (s) = sum_a pi(a|s) r(s,a).
    Eigen::VectorXd policy_reward(const Policy& pi) const;

    void check_policy(const Policy& pi) const;
    void check_value(const ValueFunction& v) const;
    void check_distribution(const StateDistribution& d) const;

  private:
    void validate(bool allow_zero_gamma) const;
};

/// v^pi as the unique solution of (I - gamma P^pi) v = r^pi (direct solve).
ValueFunction evaluate_policy(const Mdp& mdp, const Policy& pi);

/// q^pi(s,a) = r(s,a) + gamma sum_{s'} P(s'|s,a) v^pi(s').
QFunction q_of_policy(const Mdp& mdp, const Policy& pi);

/// One application of the policy Bellman operator: r^pi + gamma P^pi v.
ValueFunction apply_bellman(const Mdp& mdp, const Policy& pi, const ValueFunction& v);

/// One application of the optimal Bellman operator. Returns (T v, greedy policy),
/// ties broken toward the lowest action index.
std::pair<ValueFunction, Policy> apply_optimal_bellman(const Mdp& mdp, const ValueFunction& v);

/// Reference optimal solver: value iteration run until the returned value is
/// within tol of v* in the max norm; the policy is greedy w.r.t. the final value.
std::pair<ValueFunction, Policy> solve_optimal(const Mdp& mdp, double tol);

/// Row-wise convex combination (1-alpha) p1 + alpha p2.
Policy mix_policies(const Policy& p1, const Policy& p2, double alpha);

}  // namespace xpi
