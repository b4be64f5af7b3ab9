#include "xpi/mdp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace xpi {

namespace {

constexpr double kRowSumTol = 1e-12;

void check_row_stochastic(const Eigen::VectorXd& row, const std::string& what) {
    if ((row.array() < 0.0).any())
        throw std::invalid_argument(what + " has a negative entry");
    double sum = row.sum();
    if (std::abs(sum - 1.0) > kRowSumTol)
        throw std::invalid_argument(what + " sums to " + std::to_string(sum) + ", expected 1");
}

}  // namespace

bool Policy::deterministic() const {
    for (Eigen::Index s = 0; s < probs.rows(); ++s) {
        for (Eigen::Index a = 0; a < probs.cols(); ++a) {
            double p = probs(s, a);
            if (p != 0.0 && p != 1.0) return false;
        }
    }
    return true;
}

int Policy::action(int s) const {
    Eigen::Index best = 0;
    probs.row(s).maxCoeff(&best);
    return static_cast<int>(best);
}

void Policy::validate() const {
    if (probs.rows() == 0 || probs.cols() == 0)
        throw std::invalid_argument("policy must have at least one state and one action");
    for (Eigen::Index s = 0; s < probs.rows(); ++s)
        check_row_stochastic(probs.row(s), "policy row (s=" + std::to_string(s) + ")");
}

Policy Policy::uniform(int n_states, int n_actions) {
    Policy p;
    p.probs = Eigen::MatrixXd::Constant(n_states, n_actions, 1.0 / n_actions);
    return p;
}

Policy Policy::from_actions(const std::vector<int>& actions, int n_actions) {
    Policy p;
    p.probs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(actions.size()), n_actions);
    for (std::size_t s = 0; s < actions.size(); ++s) {
        if (actions[s] < 0 || actions[s] >= n_actions)
            throw std::invalid_argument("action index out of range at state " + std::to_string(s));
        p.probs(static_cast<Eigen::Index>(s), actions[s]) = 1.0;
    }
    return p;
}

void StateDistribution::validate() const {
    if (p.size() == 0) throw std::invalid_argument("distribution must be non-empty");
    check_row_stochastic(p, "state distribution");
}

StateDistribution StateDistribution::uniform(int n_states) {
    StateDistribution d;
    d.p = Eigen::VectorXd::Constant(n_states, 1.0 / n_states);
    return d;
}

StateDistribution StateDistribution::point_mass(int n_states, int s) {
    StateDistribution d;
    d.p = Eigen::VectorXd::Zero(n_states);
    d.p(s) = 1.0;
    return d;
}

void Mdp::validate(bool allow_zero_gamma) const {
    if (n_states <= 0 || n_actions <= 0)
        throw std::invalid_argument("MDP needs positive state and action counts");
    bool gamma_ok = allow_zero_gamma ? (gamma >= 0.0 && gamma < 1.0) : (gamma > 0.0 && gamma < 1.0);
    if (!gamma_ok) throw std::invalid_argument("gamma out of range");
    if (static_cast<int>(transitions.size()) != n_actions)
        throw std::invalid_argument("transition tensor has wrong action count");
    if (rewards.rows() != n_states || rewards.cols() != n_actions)
        throw std::invalid_argument("reward table has wrong shape");
    if (!rewards.allFinite()) throw std::invalid_argument("rewards must be finite");
    for (int a = 0; a < n_actions; ++a) {
        const Eigen::MatrixXd& pa = transitions[static_cast<std::size_t>(a)];
        if (pa.rows() != n_states || pa.cols() != n_states)
            throw std::invalid_argument("transition matrix for action " + std::to_string(a) +
                                        " has wrong shape");
        for (int s = 0; s < n_states; ++s)
            check_row_stochastic(pa.row(s),
                                 "transition row (s=" + std::to_string(s) + ",a=" + std::to_string(a) + ")");
    }
}

Mdp Mdp::make(int n_states, int n_actions, std::vector<Eigen::MatrixXd> transitions,
              Eigen::MatrixXd rewards, double gamma) {
    Mdp m;
    m.n_states = n_states;
    m.n_actions = n_actions;
    m.transitions = std::move(transitions);
    m.rewards = std::move(rewards);
    m.gamma = gamma;
    m.validate(/*allow_zero_gamma=*/false);
    m.r_max = m.rewards.cwiseAbs().maxCoeff();
    return m;
}

Mdp Mdp::make_relaxed(int n_states, int n_actions, std::vector<Eigen::MatrixXd> transitions,
                      Eigen::MatrixXd rewards, double gamma) {
    Mdp m;
    m.n_states = n_states;
    m.n_actions = n_actions;
    m.transitions = std::move(transitions);
    m.rewards = std::move(rewards);
    m.gamma = gamma;
    m.validate(/*allow_zero_gamma=*/true);
    m.r_max = m.rewards.cwiseAbs().maxCoeff();
    return m;
}

Eigen::MatrixXd Mdp::policy_kernel(const Policy& pi) const {
    check_policy(pi);
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n_states, n_states);
    for (int a = 0; a < n_actions; ++a)
        k.noalias() += pi.probs.col(a).asDiagonal() * transitions[static_cast<std::size_t>(a)];
    return k;
}

Eigen::VectorXd Mdp::policy_reward(const Policy& pi) const {
    check_policy(pi);
    return (pi.probs.array() * rewards.array()).rowwise().sum();
}

void Mdp::check_policy(const Policy& pi) const {
    if (pi.n_states() != n_states || pi.n_actions() != n_actions)
        throw std::invalid_argument("policy shape does not match MDP");
}

void Mdp::check_value(const ValueFunction& v) const {
    if (static_cast<int>(v.size()) != n_states)
        throw std::invalid_argument("value function length does not match MDP");
}

void Mdp::check_distribution(const StateDistribution& d) const {
    if (d.n_states() != n_states)
        throw std::invalid_argument("state distribution length does not match MDP");
}

ValueFunction evaluate_policy(const Mdp& mdp, const Policy& pi) {
    mdp.check_policy(pi);
    Eigen::MatrixXd a =
        Eigen::MatrixXd::Identity(mdp.n_states, mdp.n_states) - mdp.gamma * mdp.policy_kernel(pi);
    return a.partialPivLu().solve(mdp.policy_reward(pi));
}

QFunction q_of_policy(const Mdp& mdp, const Policy& pi) {
    ValueFunction v = evaluate_policy(mdp, pi);
    QFunction q(mdp.n_states, mdp.n_actions);
    for (int a = 0; a < mdp.n_actions; ++a)
        q.col(a) = mdp.rewards.col(a) + mdp.gamma * mdp.transitions[static_cast<std::size_t>(a)] * v;
    return q;
}

ValueFunction apply_bellman(const Mdp& mdp, const Policy& pi, const ValueFunction& v) {
    mdp.check_policy(pi);
    mdp.check_value(v);
    return mdp.policy_reward(pi) + mdp.gamma * mdp.policy_kernel(pi) * v;
}

std::pair<ValueFunction, Policy> apply_optimal_bellman(const Mdp& mdp, const ValueFunction& v) {
    mdp.check_value(v);
    ValueFunction out(mdp.n_states);
    std::vector<int> greedy(static_cast<std::size_t>(mdp.n_states), 0);
    for (int s = 0; s < mdp.n_states; ++s) {
        double best = -std::numeric_limits<double>::infinity();
        int best_a = 0;
        for (int a = 0; a < mdp.n_actions; ++a) {
            double q = mdp.rewards(s, a) +
                       mdp.gamma * mdp.transitions[static_cast<std::size_t>(a)].row(s).dot(v);
            if (q > best) {
                best = q;
                best_a = a;
            }
        }
        out(s) = best;
        greedy[static_cast<std::size_t>(s)] = best_a;
    }
    return {out, Policy::from_actions(greedy, mdp.n_actions)};
}

std::pair<ValueFunction, Policy> solve_optimal(const Mdp& mdp, double tol) {
    if (tol <= 0.0) throw std::invalid_argument("solve_optimal: tol must be positive");
    // Stopping rule tol*(1-gamma)/(2*gamma); returning the post-sweep iterate
    // gives ||v - v*|| <= gamma/(1-gamma) * residual <= tol/2. A zero-discount
    // surrogate is exact after a single sweep.
    double threshold = mdp.gamma > 0.0
                           ? tol * (1.0 - mdp.gamma) / (2.0 * mdp.gamma)
                           : std::numeric_limits<double>::infinity();
    ValueFunction v = ValueFunction::Zero(mdp.n_states);
    // gamma^k * 2*r_max/(1-gamma) <= threshold bounds the sweep count.
    long max_sweeps = 1;
    if (mdp.gamma > 0.0 && mdp.r_max > 0.0) {
        double span = 2.0 * mdp.r_max / (1.0 - mdp.gamma);
        if (span > threshold)
            max_sweeps = static_cast<long>(std::ceil(std::log(threshold / span) / std::log(mdp.gamma))) + 2;
    }
    for (long it = 0; it < max_sweeps; ++it) {
        auto [next, greedy] = apply_optimal_bellman(mdp, v);
        double change = (next - v).cwiseAbs().maxCoeff();
        v = next;
        if (change <= threshold) return {v, greedy};
    }
    auto [next, greedy] = apply_optimal_bellman(mdp, v);
    return {next, greedy};
}

Policy mix_policies(const Policy& p1, const Policy& p2, double alpha) {
    if (alpha < 0.0 || alpha > 1.0)
        throw std::invalid_argument("mix_policies: alpha must be in [0,1]");
    if (p1.probs.rows() != p2.probs.rows() || p1.probs.cols() != p2.probs.cols())
        throw std::invalid_argument("mix_policies: shape mismatch");
    Policy out;
    out.probs = (1.0 - alpha) * p1.probs + alpha * p2.probs;
    return out;
}

}  // namespace xpi
