#pragma once

#include <map>
#include <vector>

#include "xpi/mdp.hpp"

namespace xpi {

/// One entry of a concentrability sequence: the floored sup-ratio together
/// with the raw value it came from (the definitions constrain the codomain to
/// [1, inf) + {inf}; sub-1 raw ratios are floored and flagged).
struct CoefficientEntry {
    double value = 1.0;  // max(raw, 1), or +inf
    double raw = 1.0;
    bool floored = false;
};

/// c(i): worst-case ratio (mu pushed i steps by the most adversarial sequence
/// of deterministic policies)(s') / nu(s'), computed per target state by a
/// backward dynamic program over per-step, per-state action choices.
std::vector<CoefficientEntry> c_seq(const Mdp& mdp, const StateDistribution& mu,
                                    const StateDistribution& nu, int i_max);

/// c^{pi*}(i): the same ratio for powers of the single kernel P^{pi*}.
std::vector<CoefficientEntry> c_pi_star_seq(const Mdp& mdp, const Policy& pi_star,
                                            const StateDistribution& mu,
                                            const StateDistribution& nu, int i_max);

/// Discounted aggregates of the ratio sequences, truncated at the sequence
/// length. The tail bound treats the largest observed entry as a majorant,
/// which is only a certificate when the sequence is non-increasing past a
/// burn-in; otherwise the truncation is flagged heuristic.
struct SeriesCoefficients {
    double C1;                   // (1-gamma) sum_i gamma^i c(i)
    double C2;                   // C^{(2,0)}
    std::map<int, double> C2k;   // (1-gamma)^2 sum_{i,j} gamma^{i+j} c(i+j+k)
    double C_pi_star_1;          // (1-gamma) sum_i gamma^i c^{pi*}(i)
    int truncation_index;
    double truncation_bound;     // worst tail estimate across the sums
    bool heuristic_truncation;   // tail majorant not certified by monotonicity
};

SeriesCoefficients series_coefficients(const std::vector<CoefficientEntry>& c,
                                       const std::vector<CoefficientEntry>& c_pi_star,
                                       double gamma, const std::vector<int>& k_list, double tol);

/// The kappa-smoothed kernel (1 - kappa gamma)(I - kappa gamma P^pi)^{-1};
/// row-stochastic for every kappa in [0,1].
Eigen::MatrixXd d_kappa_matrix(const Mdp& mdp, const Policy& pi, double kappa);

/// The smoothed future distribution (1-xi) mu (I - xi D^{pi*}_kappa P^{pi*})^{-1}.
Eigen::VectorXd d_kappa_mu(const Mdp& mdp, const Policy& pi_star, double kappa,
                           const StateDistribution& mu);

/// C^{pi*}_kappa(mu, nu): sup-ratio of the smoothed future distribution over nu.
CoefficientEntry c_pi_star_kappa(const Mdp& mdp, const Policy& pi_star, double kappa,
                                 const StateDistribution& mu, const StateDistribution& nu);

/// C^{pi*(1)}_kappa = (xi/gamma) C^{pi*(1)} + (1-xi) kappa c(0).
double c_pi_star_1_kappa(double C_pi_star_1, double c0, double kappa, double gamma);

/// Blending construction: with alpha_star chosen from the kappa coefficient,
/// the kappa' coefficient against the blended measure (1-alpha) nu + alpha mu
/// does not exceed the kappa one.
struct MonotonicityReport {
    double coeff_kappa;        // C^{pi*}_kappa(mu, nu)
    double coeff_kappa_prime;  // C^{pi*}_{kappa'}(mu, nu(alpha_star))
    double alpha_star;
    bool holds;                // coeff_kappa_prime <= coeff_kappa + 1e-9
    bool strict;               // strictly smaller (expected when coeff_kappa > 1)
};

MonotonicityReport check_coefficient_monotonicity(const Mdp& mdp, const Policy& pi_star,
                                                  const StateDistribution& mu,
                                                  const StateDistribution& nu, double kappa,
                                                  double kappa_prime);

/// Everything the bound evaluators need, with truncation metadata.
struct CoefficientReport {
    std::vector<CoefficientEntry> c;
    std::vector<CoefficientEntry> c_pi_star;
    SeriesCoefficients series;
    CoefficientEntry C_pi_star_kappa;
    double C_pi_star_1_kappa;
    double kappa;
    /// Per-instance ordering C^{pi*} <= C^{pi*(1)} <= C^{(1)} <= C^{(2)}; only
    /// the first link is a theorem for the computed quantities, the rest are
    /// reported for inspection.
    double C_pi_star;  // C^{pi*}_{kappa=0}
    bool ordering_first_link_ok;
    bool ordering_chain_ok;
};

CoefficientReport compute_coefficient_report(const Mdp& mdp, const Policy& pi_star,
                                             const StateDistribution& mu,
                                             const StateDistribution& nu, double kappa,
                                             int i_max, const std::vector<int>& k_list);

}  // namespace xpi
