#include "xpi/mixture.hpp"

#include <stdexcept>

#include "xpi/kappa.hpp"

namespace xpi {

Mdp tightrope_mdp(double c, double gamma) {
    if (c <= 0.0) throw std::invalid_argument("tightrope_mdp: c must be positive");
    if (gamma <= 0.0 || gamma >= 1.0) throw std::invalid_argument("tightrope_mdp: gamma must be in (0,1)");
    const int n = 4;
    std::vector<Eigen::MatrixXd> p(2, Eigen::MatrixXd::Zero(n, n));
    // a0: hesitate / fall side
    p[0](0, 0) = 1.0;  // stay at the approach
    p[0](1, 3) = 1.0;  // fall
    p[0](2, 2) = 1.0;
    p[0](3, 3) = 1.0;
    // a1: step forward
    p[1](0, 1) = 1.0;
    p[1](1, 2) = 1.0;
    p[1](2, 2) = 1.0;
    p[1](3, 3) = 1.0;

    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, 2);
    r(2, 0) = r(2, 1) = 1.0;
    r(3, 0) = r(3, 1) = -c;
    return Mdp::make(n, 2, std::move(p), std::move(r), gamma);
}

std::pair<double, double> tightrope_bounds(double alpha, double kappa) {
    if (alpha <= 0.0 || alpha >= 1.0) throw std::invalid_argument("tightrope_bounds: alpha must be in (0,1)");
    if (kappa <= 0.0 || kappa > 1.0) throw std::invalid_argument("tightrope_bounds: kappa must be in (0,1]");
    double c_low = alpha / (1.0 - alpha);
    double c_high = kappa == 1.0 ? std::numeric_limits<double>::infinity() : kappa / (1.0 - kappa);
    return {c_low, c_high};
}

std::pair<double, double> closed_form_mixture_value(double c, double gamma, double alpha) {
    if (c <= 0.0 || gamma <= 0.0 || gamma >= 1.0 || alpha < 0.0 || alpha > 1.0)
        throw std::invalid_argument("closed_form_mixture_value: parameter out of range");
    double v_s1 = gamma * (-c * (1.0 - alpha) + alpha) / (1.0 - gamma);
    double v_s0 = gamma * alpha / (1.0 - gamma * (1.0 - alpha)) * v_s1;
    return {v_s0, v_s1};
}

ImprovementReport improvement_report(const Mdp& mdp, const Policy& pi, double alpha,
                                     const GreedyMode& mode, double tol) {
    if (alpha <= 0.0 || alpha > 1.0)
        throw std::invalid_argument("improvement_report: alpha must be in (0,1]");
    mdp.check_policy(pi);

    ValueFunction v_pi = evaluate_policy(mdp, pi);
    Policy greedy = std::visit(
        [&](const auto& m) -> Policy {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, KappaMode>) {
                if (m.kappa < 0.0 || m.kappa > 1.0)
                    throw std::invalid_argument("improvement_report: kappa must be in [0,1]");
                return kappa_greedy_policy(mdp, v_pi, m.kappa, tol);
            } else {
                return h_greedy_policy(mdp, v_pi, m.h);
            }
        },
        mode);

    Policy mixed = mix_policies(pi, greedy, alpha);
    ValueFunction v_mix = evaluate_policy(mdp, mixed);

    ImprovementReport report;
    report.delta_vector = v_mix - v_pi;
    report.improved_everywhere = report.delta_vector.minCoeff() >= -1e-9;
    report.strict_somewhere = report.delta_vector.maxCoeff() > 1e-9;
    report.alpha = alpha;
    report.mode = mode;
    return report;
}

}  // namespace xpi
