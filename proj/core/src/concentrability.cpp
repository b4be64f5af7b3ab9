#include "xpi/concentrability.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "xpi/kappa.hpp"

namespace xpi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMassEps = 1e-15;  // delivered mass below this is treated as zero

CoefficientEntry ratio_entry(const Eigen::VectorXd& mass, const Eigen::VectorXd& nu) {
    double raw = 0.0;
    for (Eigen::Index s = 0; s < mass.size(); ++s) {
        if (nu(s) > 0.0) {
            raw = std::max(raw, mass(s) / nu(s));
        } else if (mass(s) > kMassEps) {
            raw = kInf;
            break;
        }
    }
    CoefficientEntry e;
    e.raw = raw;
    e.value = std::max(raw, 1.0);
    e.floored = raw < 1.0 - 1e-12;
    return e;
}

}  // namespace

std::vector<CoefficientEntry> c_seq(const Mdp& mdp, const StateDistribution& mu,
                                    const StateDistribution& nu, int i_max) {
    if (i_max < 0) throw std::invalid_argument("c_seq: i_max must be >= 0");
    mdp.check_distribution(mu);
    mdp.check_distribution(nu);

    std::vector<CoefficientEntry> out(static_cast<std::size_t>(i_max) + 1);
    out[0] = ratio_entry(mu.p, nu.p);

    // For each target state, w(s) is the largest probability of landing on the
    // target in exactly j steps over per-step, per-state action choices; one
    // backward sweep extends j by one.
    Eigen::VectorXd best_mass = Eigen::VectorXd::Zero(mdp.n_states);
    std::vector<Eigen::VectorXd> w(static_cast<std::size_t>(mdp.n_states));
    for (int target = 0; target < mdp.n_states; ++target)
        w[static_cast<std::size_t>(target)] = Eigen::VectorXd::Unit(mdp.n_states, target);

    for (int i = 1; i <= i_max; ++i) {
        for (int target = 0; target < mdp.n_states; ++target) {
            Eigen::VectorXd& wt = w[static_cast<std::size_t>(target)];
            Eigen::VectorXd next(mdp.n_states);
            for (int s = 0; s < mdp.n_states; ++s) {
                double best = -kInf;
                for (int a = 0; a < mdp.n_actions; ++a)
                    best = std::max(best, mdp.transitions[static_cast<std::size_t>(a)].row(s).dot(wt));
                next(s) = best;
            }
            wt = next;
            best_mass(target) = mu.p.dot(wt);
        }
        out[static_cast<std::size_t>(i)] = ratio_entry(best_mass, nu.p);
    }
    return out;
}

std::vector<CoefficientEntry> c_pi_star_seq(const Mdp& mdp, const Policy& pi_star,
                                            const StateDistribution& mu,
                                            const StateDistribution& nu, int i_max) {
    if (i_max < 0) throw std::invalid_argument("c_pi_star_seq: i_max must be >= 0");
    mdp.check_policy(pi_star);
    mdp.check_distribution(mu);
    mdp.check_distribution(nu);

    Eigen::MatrixXd kernel = mdp.policy_kernel(pi_star);
    std::vector<CoefficientEntry> out(static_cast<std::size_t>(i_max) + 1);
    Eigen::RowVectorXd pushed = mu.p.transpose();
    out[0] = ratio_entry(pushed.transpose(), nu.p);
    for (int i = 1; i <= i_max; ++i) {
        pushed = pushed * kernel;
        out[static_cast<std::size_t>(i)] = ratio_entry(pushed.transpose(), nu.p);
    }
    return out;
}

SeriesCoefficients series_coefficients(const std::vector<CoefficientEntry>& c,
                                       const std::vector<CoefficientEntry>& c_pi_star,
                                       double gamma, const std::vector<int>& k_list, double tol) {
    if (c.empty() || c_pi_star.empty()) throw std::invalid_argument("series_coefficients: empty sequence");
    if (tol <= 0.0) throw std::invalid_argument("series_coefficients: tol must be positive");
    if (gamma <= 0.0 || gamma >= 1.0) throw std::invalid_argument("series_coefficients: gamma out of range");

    int last = static_cast<int>(c.size()) - 1;

    double c_max = 0.0;
    bool nonincreasing_tail = true;
    int burn_in = std::min(last, std::max(1, last / 4));
    for (int i = 0; i <= last; ++i) {
        c_max = std::max(c_max, c[static_cast<std::size_t>(i)].value);
        if (i > burn_in &&
            c[static_cast<std::size_t>(i)].value > c[static_cast<std::size_t>(i - 1)].value + tol)
            nonincreasing_tail = false;
    }

    SeriesCoefficients out;
    out.truncation_index = last;
    out.heuristic_truncation = !nonincreasing_tail || c_max == kInf;

    auto weighted_sum = [&](auto value_at, double normalizer, auto weight_at) {
        double sum = 0.0;
        for (int i = 0; i <= last; ++i) {
            double v = value_at(i);
            if (v == kInf) return kInf;
            sum += weight_at(i) * v;
        }
        return normalizer * sum;
    };

    double one_minus_gamma = 1.0 - gamma;
    out.C1 = weighted_sum([&](int i) { return c[static_cast<std::size_t>(i)].value; }, one_minus_gamma,
                          [&](int i) { return std::pow(gamma, i); });
    out.C_pi_star_1 =
        weighted_sum([&](int i) { return c_pi_star[static_cast<std::size_t>(i)].value; },
                     one_minus_gamma, [&](int i) { return std::pow(gamma, i); });

    // C^{(2,k)} = (1-gamma)^2 sum_m (m+1) gamma^m c(m+k), truncated at m+k <= last.
    auto c2_at = [&](int k) {
        double sum = 0.0;
        for (int m = 0; m + k <= last; ++m) {
            double v = c[static_cast<std::size_t>(m + k)].value;
            if (v == kInf) return kInf;
            sum += (m + 1) * std::pow(gamma, m) * v;
        }
        return one_minus_gamma * one_minus_gamma * sum;
    };
    out.C2 = c2_at(0);
    for (int k : k_list) {
        if (k < 0) throw std::invalid_argument("series_coefficients: k must be >= 0");
        out.C2k[k] = c2_at(k);
    }

    // Tail estimates with c_max as the majorant. For the linear sums the tail
    // is gamma^{last+1} c_max; for the quadratic one it picks up the (m+1) factor.
    double tail_c1 = std::pow(gamma, last + 1) * c_max;
    double tail_c2 =
        std::pow(gamma, last + 1) * ((last + 2) - (last + 1) * gamma) * c_max;
    out.truncation_bound = c_max == kInf ? kInf : std::max(tail_c1, tail_c2);
    return out;
}

Eigen::MatrixXd d_kappa_matrix(const Mdp& mdp, const Policy& pi, double kappa) {
    if (kappa < 0.0 || kappa > 1.0) throw std::invalid_argument("d_kappa_matrix: kappa must be in [0,1]");
    mdp.check_policy(pi);
    double kg = kappa * mdp.gamma;
    Eigen::MatrixXd a =
        Eigen::MatrixXd::Identity(mdp.n_states, mdp.n_states) - kg * mdp.policy_kernel(pi);
    return (1.0 - kg) * a.partialPivLu().solve(Eigen::MatrixXd::Identity(mdp.n_states, mdp.n_states));
}

Eigen::VectorXd d_kappa_mu(const Mdp& mdp, const Policy& pi_star, double kappa,
                           const StateDistribution& mu) {
    mdp.check_distribution(mu);
    double x = xi(mdp.gamma, kappa);
    Eigen::MatrixXd core = d_kappa_matrix(mdp, pi_star, kappa) * mdp.policy_kernel(pi_star);
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(mdp.n_states, mdp.n_states) - x * core;
    // Row-vector solve: d (I - xi D P) = (1-xi) mu  <=>  (I - xi D P)^T d^T = (1-xi) mu^T.
    Eigen::VectorXd d = a.transpose().partialPivLu().solve((1.0 - x) * mu.p);
    return d;
}

CoefficientEntry c_pi_star_kappa(const Mdp& mdp, const Policy& pi_star, double kappa,
                                 const StateDistribution& mu, const StateDistribution& nu) {
    mdp.check_distribution(nu);
    Eigen::VectorXd d = d_kappa_mu(mdp, pi_star, kappa, mu);
    if (std::abs(d.sum() - 1.0) > 1e-10)
        throw std::runtime_error("c_pi_star_kappa: smoothed future distribution does not sum to 1");
    return ratio_entry(d, nu.p);
}

double c_pi_star_1_kappa(double C_pi_star_1, double c0, double kappa, double gamma) {
    double x = xi(gamma, kappa);
    double first = x == 0.0 ? 0.0 : x / gamma * C_pi_star_1;
    double second = kappa == 0.0 ? 0.0 : (1.0 - x) * kappa * c0;
    return first + second;
}

MonotonicityReport check_coefficient_monotonicity(const Mdp& mdp, const Policy& pi_star,
                                                  const StateDistribution& mu,
                                                  const StateDistribution& nu, double kappa,
                                                  double kappa_prime) {
    if (!(kappa_prime > kappa))
        throw std::invalid_argument("check_coefficient_monotonicity: kappa_prime must exceed kappa");

    CoefficientEntry base = c_pi_star_kappa(mdp, pi_star, kappa, mu, nu);

    MonotonicityReport rep;
    rep.coeff_kappa = base.value;
    if (base.value == kInf) {
        rep.coeff_kappa_prime = kInf;
        rep.alpha_star = 0.0;
        rep.holds = true;
        rep.strict = false;
        return rep;
    }

    double xi_kappa = xi(mdp.gamma, kappa);
    rep.alpha_star =
        1.0 / (1.0 + (1.0 - kappa_prime) / ((1.0 - xi_kappa) * (kappa_prime - kappa)) * base.value);

    StateDistribution blended;
    blended.p = (1.0 - rep.alpha_star) * nu.p + rep.alpha_star * mu.p;
    blended.validate();

    rep.coeff_kappa_prime = c_pi_star_kappa(mdp, pi_star, kappa_prime, mu, blended).value;
    rep.holds = rep.coeff_kappa_prime <= rep.coeff_kappa + 1e-9;
    rep.strict = rep.coeff_kappa_prime < rep.coeff_kappa - 1e-12;
    return rep;
}

CoefficientReport compute_coefficient_report(const Mdp& mdp, const Policy& pi_star,
                                             const StateDistribution& mu,
                                             const StateDistribution& nu, double kappa,
                                             int i_max, const std::vector<int>& k_list) {
    CoefficientReport rep;
    rep.kappa = kappa;
    rep.c = c_seq(mdp, mu, nu, i_max);
    rep.c_pi_star = c_pi_star_seq(mdp, pi_star, mu, nu, i_max);
    rep.series = series_coefficients(rep.c, rep.c_pi_star, mdp.gamma, k_list, 1e-12);
    rep.C_pi_star_kappa = c_pi_star_kappa(mdp, pi_star, kappa, mu, nu);
    rep.C_pi_star_1_kappa =
        c_pi_star_1_kappa(rep.series.C_pi_star_1, rep.c[0].value, kappa, mdp.gamma);
    rep.C_pi_star = c_pi_star_kappa(mdp, pi_star, 0.0, mu, nu).value;
    rep.ordering_first_link_ok = rep.C_pi_star <= rep.series.C_pi_star_1 + 1e-9;
    rep.ordering_chain_ok = rep.ordering_first_link_ok &&
                            rep.series.C_pi_star_1 <= rep.series.C1 + 1e-9 &&
                            rep.series.C1 <= rep.series.C2 + 1e-9;
    return rep;
}

}  // namespace xpi
