#pragma once

#include <limits>
#include <variant>

#include "xpi/mdp.hpp"

namespace xpi {

/// Four-state rope-walking MDP, parameterized by the fall penalty c > 0.
/// s0: a0 self-loop (r=0), a1 -> s1 (r=0); s1: a0 -> s3 (r=0), a1 -> s2 (r=0);
/// s2 absorbing with r=1; s3 absorbing with r=-c. Absorbing states expose both
/// action indices with identical effect so the action count stays rectangular.
Mdp tightrope_mdp(double c, double gamma);

/// Penalty window in which a soft update with stepsize alpha fails to improve
/// while the kappa-greedy policy is still the confident one:
/// c_low = alpha/(1-alpha), c_high = kappa/(1-kappa) (infinity at kappa=1).
/// A counterexample penalty exists iff c_low < c_high, i.e. alpha < kappa.
std::pair<double, double> tightrope_bounds(double alpha, double kappa);

/// Closed-form value of the mixture (1-alpha) hesitant + alpha confident on the
/// rope MDP: v(s1) = gamma(-c(1-alpha)+alpha)/(1-gamma), v(s0) scaled from it.
/// Returns (v_s0, v_s1).
std::pair<double, double> closed_form_mixture_value(double c, double gamma, double alpha);

/// Improvement mode of a soft update: mix toward the kappa-greedy or the
/// h-greedy policy w.r.t. v^pi.
struct KappaMode {
    double kappa;
};
struct HorizonMode {
    int h;
};
using GreedyMode = std::variant<KappaMode, HorizonMode>;

struct ImprovementReport {
    bool improved_everywhere = false;  // min(delta) >= -1e-9
    bool strict_somewhere = false;     // max(delta) > 1e-9
    Eigen::VectorXd delta_vector;      // v^{mix} - v^{pi}
    double alpha = 0.0;
    GreedyMode mode;
};

/// Forms the mixture (1-alpha) pi + alpha pi_greedy, evaluates both policies
/// exactly, and reports the entrywise comparison.
ImprovementReport improvement_report(const Mdp& mdp, const Policy& pi, double alpha,
                                     const GreedyMode& mode, double tol = 1e-10);

}  // namespace xpi
