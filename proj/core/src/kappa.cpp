#include "xpi/kappa.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace xpi {

namespace {

void check_kappa(double kappa) {
    if (kappa < 0.0 || kappa > 1.0) throw std::invalid_argument("kappa must be in [0,1]");
}

/// Residual threshold making a post-sweep value-iteration result tol-accurate.
double vi_threshold(double discount, double tol) {
    if (discount <= 0.0) return std::numeric_limits<double>::infinity();
    return tol * (1.0 - discount) / (2.0 * discount);
}

}  // namespace

double xi(double gamma, double kappa) {
    if (gamma <= 0.0 || gamma >= 1.0) throw std::invalid_argument("gamma must be in (0,1)");
    check_kappa(kappa);
    return gamma * (1.0 - kappa) / (1.0 - gamma * kappa);
}

KappaContext KappaContext::make(double gamma, double kappa) {
    return KappaContext{kappa, gamma, ::xpi::xi(gamma, kappa)};
}

SurrogateMdp build_surrogate(const Mdp& mdp, const ValueFunction& v, double kappa) {
    check_kappa(kappa);
    mdp.check_value(v);
    Eigen::MatrixXd shaped(mdp.n_states, mdp.n_actions);
    for (int a = 0; a < mdp.n_actions; ++a)
        shaped.col(a) = mdp.rewards.col(a) +
                        (1.0 - kappa) * mdp.gamma * mdp.transitions[static_cast<std::size_t>(a)] * v;
    SurrogateMdp s;
    s.mdp = Mdp::make_relaxed(mdp.n_states, mdp.n_actions, mdp.transitions, std::move(shaped),
                              kappa * mdp.gamma);
    s.kappa = kappa;
    s.shaping_value = v;
    return s;
}

ValueFunction apply_t_kappa_pi(const Mdp& mdp, const Policy& pi, double kappa,
                               const ValueFunction& v) {
    check_kappa(kappa);
    mdp.check_policy(pi);
    mdp.check_value(v);
    Eigen::MatrixXd kernel = mdp.policy_kernel(pi);
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(mdp.n_states, mdp.n_states) -
                        kappa * mdp.gamma * kernel;
    Eigen::VectorXd rhs = mdp.policy_reward(pi) + (1.0 - kappa) * mdp.gamma * kernel * v;
    return a.partialPivLu().solve(rhs);
}

std::pair<ValueFunction, Policy> apply_t_kappa(const Mdp& mdp, double kappa,
                                               const ValueFunction& v, double tol) {
    if (tol <= 0.0) throw std::invalid_argument("apply_t_kappa: tol must be positive");
    SurrogateMdp s = build_surrogate(mdp, v, kappa);
    return solve_optimal(s.mdp, tol);
}

Policy kappa_greedy_policy(const Mdp& mdp, const ValueFunction& v, double kappa, double tol) {
    return apply_t_kappa(mdp, kappa, v, tol).second;
}

QFunction q_kappa(const Mdp& mdp, const Policy& pi, double kappa, double tol) {
    if (tol <= 0.0) throw std::invalid_argument("q_kappa: tol must be positive");
    ValueFunction v_pi = evaluate_policy(mdp, pi);
    SurrogateMdp s = build_surrogate(mdp, v_pi, kappa);
    const Mdp& sur = s.mdp;

    double threshold = vi_threshold(sur.gamma, tol);
    QFunction q = QFunction::Zero(sur.n_states, sur.n_actions);
    long max_sweeps = 1;
    if (sur.gamma > 0.0 && sur.r_max > 0.0) {
        double span = 2.0 * sur.r_max / (1.0 - sur.gamma);
        if (span > threshold)
            max_sweeps = static_cast<long>(std::ceil(std::log(threshold / span) / std::log(sur.gamma))) + 2;
    }
    for (long it = 0; it <= max_sweeps; ++it) {
        Eigen::VectorXd best = q.rowwise().maxCoeff();
        QFunction next(sur.n_states, sur.n_actions);
        for (int a = 0; a < sur.n_actions; ++a)
            next.col(a) = sur.rewards.col(a) + sur.gamma * sur.transitions[static_cast<std::size_t>(a)] * best;
        double change = (next - q).cwiseAbs().maxCoeff();
        q = next;
        if (change <= threshold) break;
    }
    return q;
}

Policy h_greedy_policy(const Mdp& mdp, const ValueFunction& v, int h) {
    if (h < 1) throw std::invalid_argument("h_greedy_policy: h must be >= 1");
    mdp.check_value(v);
    ValueFunction cur = v;
    for (int i = 0; i < h - 1; ++i) cur = apply_optimal_bellman(mdp, cur).first;
    return apply_optimal_bellman(mdp, cur).second;
}

KappaPiResult exact_kappa_pi(const Mdp& mdp, double kappa, double tol, int max_iters,
                             const std::optional<ValueFunction>& v_star) {
    if (tol <= 0.0) throw std::invalid_argument("exact_kappa_pi: tol must be positive");
    check_kappa(kappa);

    KappaPiResult result;
    Policy pi = Policy::uniform(mdp.n_states, mdp.n_actions);
    ValueFunction v = evaluate_policy(mdp, pi);

    for (int k = 1; k <= max_iters; ++k) {
        pi = kappa_greedy_policy(mdp, v, kappa, tol * 1e-2);
        ValueFunction v_next = evaluate_policy(mdp, pi);
        IterationRecord rec;
        rec.iteration = k;
        rec.value_change_inf = (v_next - v).cwiseAbs().maxCoeff();
        if (v_star) rec.optimality_gap = (*v_star - v_next).cwiseAbs().maxCoeff();
        result.iterations.push_back(rec);
        v = v_next;
        if (rec.value_change_inf <= tol) {
            result.policy = pi;
            return result;
        }
    }
    result.policy = pi;
    result.truncated = true;
    return result;
}

}  // namespace xpi
