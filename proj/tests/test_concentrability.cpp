#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "xpi/concentrability.hpp"
#include "xpi/garnet.hpp"
#include "xpi/kappa.hpp"

using namespace xpi;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<CoefficientEntry> synthetic_seq(const std::vector<double>& values) {
    std::vector<CoefficientEntry> out;
    for (double v : values) out.push_back({std::max(v, 1.0), v, v < 1.0 - 1e-12});
    return out;
}

}  // namespace

TEST_CASE("worst-case ratio sequence") {
    SUBCASE("matching measures start at 1") {
        Rng rng(3);
        Mdp mdp = oracles::random_mdp(rng, 4, 2, 0.9);
        StateDistribution mu = oracles::random_distribution(rng, 4);
        std::vector<CoefficientEntry> c = c_seq(mdp, mu, mu, 2);
        CHECK(c[0].value == doctest::Approx(1.0));
    }
    SUBCASE("single action collapses to plain kernel powers") {
        Rng rng(5);
        Mdp mdp = oracles::random_mdp(rng, 4, 1, 0.9);
        StateDistribution mu = oracles::random_distribution(rng, 4);
        StateDistribution nu = oracles::random_distribution(rng, 4);
        std::vector<CoefficientEntry> c = c_seq(mdp, mu, nu, 4);
        std::vector<CoefficientEntry> cps =
            c_pi_star_seq(mdp, Policy::uniform(4, 1), mu, nu, 4);
        for (int i = 0; i <= 4; ++i)
            CHECK(c[static_cast<std::size_t>(i)].value ==
                  doctest::Approx(cps[static_cast<std::size_t>(i)].value));
    }
    SUBCASE("matches exhaustive sequence enumeration on small instances") {
        Rng rng(7);
        for (int inst = 0; inst < 5; ++inst) {
            Mdp mdp = oracles::random_mdp(rng, 3, 2, 0.9);
            StateDistribution mu = oracles::random_distribution(rng, 3);
            StateDistribution nu = oracles::random_distribution(rng, 3);
            std::vector<CoefficientEntry> dp = c_seq(mdp, mu, nu, 2);

            std::vector<Policy> policies;
            for (int a0 = 0; a0 < 2; ++a0)
                for (int a1 = 0; a1 < 2; ++a1)
                    for (int a2 = 0; a2 < 2; ++a2)
                        policies.push_back(Policy::from_actions({a0, a1, a2}, 2));

            // i = 2: all ordered pairs of deterministic policies.
            double best = 0.0;
            for (const Policy& p1 : policies)
                for (const Policy& p2 : policies) {
                    Eigen::RowVectorXd mass =
                        mu.p.transpose() * mdp.policy_kernel(p1) * mdp.policy_kernel(p2);
                    for (int s = 0; s < 3; ++s) best = std::max(best, mass(s) / nu.p(s));
                }
            CHECK(dp[2].value == doctest::Approx(std::max(best, 1.0)).epsilon(1e-12));
        }
    }
    SUBCASE("unreachable support under nu yields infinity") {
        // Two states, everything flows into state 0; nu puts zero mass there.
        std::vector<Eigen::MatrixXd> p{(Eigen::MatrixXd(2, 2) << 1, 0, 1, 0).finished()};
        Mdp mdp = Mdp::make(2, 1, std::move(p), Eigen::MatrixXd::Zero(2, 1), 0.9);
        StateDistribution mu = StateDistribution::uniform(2);
        StateDistribution nu = StateDistribution::point_mass(2, 1);
        std::vector<CoefficientEntry> c = c_seq(mdp, mu, nu, 1);
        CHECK(c[0].value == kInf);  // mu itself has mass where nu does not
        CHECK(c[1].value == kInf);
    }
}

TEST_CASE("optimal-policy ratio sequence") {
    SUBCASE("hand-computed two-state absorbing chain") {
        // State 1 is absorbing; state 0 moves to 1 with probability 1.
        std::vector<Eigen::MatrixXd> p{(Eigen::MatrixXd(2, 2) << 0, 1, 0, 1).finished()};
        Mdp mdp = Mdp::make(2, 1, std::move(p), Eigen::MatrixXd::Zero(2, 1), 0.9);
        Policy only = Policy::uniform(2, 1);
        StateDistribution mu = StateDistribution::uniform(2);
        StateDistribution nu = StateDistribution::uniform(2);
        std::vector<CoefficientEntry> c = c_pi_star_seq(mdp, only, mu, nu, 2);
        CHECK(c[0].value == doctest::Approx(1.0));
        CHECK(c[1].value == doctest::Approx(2.0));  // all mass on the absorbing state
        CHECK(c[2].value == doctest::Approx(2.0));
    }
    SUBCASE("never exceeds the adversarial sequence ratio") {
        Rng rng(11);
        for (int inst = 0; inst < 10; ++inst) {
            Mdp mdp = oracles::random_mdp(rng, 4, 2, 0.9);
            auto [v_star, pi_star] = solve_optimal(mdp, 1e-11);
            StateDistribution mu = oracles::random_distribution(rng, 4);
            StateDistribution nu = oracles::random_distribution(rng, 4);
            std::vector<CoefficientEntry> c = c_seq(mdp, mu, nu, 5);
            std::vector<CoefficientEntry> cps = c_pi_star_seq(mdp, pi_star, mu, nu, 5);
            for (int i = 0; i <= 5; ++i)
                CHECK(cps[static_cast<std::size_t>(i)].value <=
                      c[static_cast<std::size_t>(i)].value + 1e-12);
        }
    }
}

TEST_CASE("discounted series aggregation") {
    SUBCASE("constant ones normalize to one") {
        std::vector<CoefficientEntry> ones = synthetic_seq(std::vector<double>(400, 1.0));
        SeriesCoefficients s = series_coefficients(ones, ones, 0.9, {0, 3}, 1e-12);
        CHECK(s.C1 == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(s.C2 == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(s.C2k.at(3) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(s.C_pi_star_1 == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("an infinite entry poisons the affected sums") {
        std::vector<double> vals(50, 1.0);
        vals[10] = kInf;
        SeriesCoefficients s =
            series_coefficients(synthetic_seq(vals), synthetic_seq({1.0, 1.0}), 0.9, {}, 1e-12);
        CHECK(std::isinf(s.C1));
        CHECK(std::isinf(s.C2));
        CHECK(s.C_pi_star_1 < kInf);
    }
    SUBCASE("geometric-plus-floor sequence matches the closed form") {
        double rho = 0.6, gamma = 0.9;
        std::vector<double> vals;
        for (int i = 0; i < 600; ++i) vals.push_back(1.0 + std::pow(rho, i));
        SeriesCoefficients s = series_coefficients(synthetic_seq(vals), synthetic_seq(vals), gamma,
                                                   {}, 1e-12);
        double want_c1 = 1.0 + (1.0 - gamma) / (1.0 - gamma * rho);
        CHECK(s.C1 == doctest::Approx(want_c1).epsilon(1e-10));
        // C2 = (1-g)^2 sum (m+1) g^m (1 + rho^m) = 1 + ((1-g)/(1-g rho))^2.
        double want_c2 = 1.0 + std::pow((1.0 - gamma) / (1.0 - gamma * rho), 2);
        CHECK(s.C2 == doctest::Approx(want_c2).epsilon(1e-8));
        CHECK_FALSE(s.heuristic_truncation);
    }
    SUBCASE("shifted quadratic sums are ordered when the sequence decays") {
        std::vector<double> vals;
        for (int i = 0; i < 300; ++i) vals.push_back(1.0 + 2.0 * std::pow(0.8, i));
        SeriesCoefficients s = series_coefficients(synthetic_seq(vals), synthetic_seq(vals), 0.9,
                                                   {0, 1, 2, 4}, 1e-12);
        CHECK(s.C2k.at(4) <= s.C2k.at(2) + 1e-12);
        CHECK(s.C2k.at(2) <= s.C2k.at(1) + 1e-12);
        CHECK(s.C2k.at(1) <= s.C2k.at(0) + 1e-12);
    }
    SUBCASE("rejects empty input") {
        CHECK_THROWS_AS(series_coefficients({}, {}, 0.9, {}, 1e-12), std::invalid_argument);
    }
}

TEST_CASE("smoothed kernel matrix") {
    Rng rng(13);
    Mdp mdp = oracles::random_mdp(rng, 5, 2, 0.9);
    Policy pi = oracles::random_policy(rng, 5, 2);

    SUBCASE("kappa=0 gives the identity") {
        Eigen::MatrixXd d = d_kappa_matrix(mdp, pi, 0.0);
        CHECK((d - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("rows are stochastic for every kappa") {
        for (double kappa : {0.25, 0.5, 0.75, 1.0}) {
            Eigen::MatrixXd d = d_kappa_matrix(mdp, pi, kappa);
            CHECK((d.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-10);
            CHECK(d.minCoeff() >= -1e-12);
        }
    }
    SUBCASE("agrees with the truncated resolvent series") {
        double kappa = 0.7;
        double kg = kappa * mdp.gamma;
        Eigen::MatrixXd kernel = mdp.policy_kernel(pi);
        Eigen::MatrixXd series = Eigen::MatrixXd::Zero(5, 5);
        Eigen::MatrixXd pow = Eigen::MatrixXd::Identity(5, 5);
        double w = 1.0;
        for (int t = 0; t < 2000; ++t) {
            series += w * pow;
            pow = pow * kernel;
            w *= kg;
        }
        Eigen::MatrixXd want = (1.0 - kg) * series;
        CHECK((d_kappa_matrix(mdp, pi, kappa) - want).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("smoothed future-distribution coefficient") {
    Rng rng(17);
    Mdp mdp = oracles::random_mdp(rng, 5, 2, 0.9);
    auto [v_star, pi_star] = solve_optimal(mdp, 1e-11);
    StateDistribution mu = oracles::random_distribution(rng, 5);

    SUBCASE("the smoothed distribution dominates itself") {
        Eigen::VectorXd d = d_kappa_mu(mdp, pi_star, 0.6, mu);
        StateDistribution as_nu;
        as_nu.p = d;
        CHECK(c_pi_star_kappa(mdp, pi_star, 0.6, mu, as_nu).value == doctest::Approx(1.0));
    }
    SUBCASE("kappa=0 reduces to the plain discounted occupancy ratio") {
        StateDistribution nu = oracles::random_distribution(rng, 5);
        Eigen::MatrixXd a = Eigen::MatrixXd::Identity(5, 5) -
                            mdp.gamma * mdp.policy_kernel(pi_star);
        Eigen::VectorXd occ = a.transpose().partialPivLu().solve((1.0 - mdp.gamma) * mu.p);
        double want = 0.0;
        for (int s = 0; s < 5; ++s) want = std::max(want, occ(s) / nu.p(s));
        CHECK(c_pi_star_kappa(mdp, pi_star, 0.0, mu, nu).value ==
              doctest::Approx(std::max(want, 1.0)).epsilon(1e-10));
    }
    SUBCASE("kappa=1 reduces to the start-measure ratio") {
        StateDistribution nu = oracles::random_distribution(rng, 5);
        double c0 = (mu.p.array() / nu.p.array()).maxCoeff();
        CHECK(c_pi_star_kappa(mdp, pi_star, 1.0, mu, nu).value ==
              doctest::Approx(std::max(c0, 1.0)).epsilon(1e-10));
    }
}

TEST_CASE("blended coefficient formula") {
    CHECK(c_pi_star_1_kappa(1.7, 1.3, 0.0, 0.9) == doctest::Approx(1.7));
    CHECK(c_pi_star_1_kappa(1.7, 1.3, 1.0, 0.9) == doctest::Approx(1.3));
    CHECK(c_pi_star_1_kappa(1.0, 1.0, 0.37, 0.9) == doctest::Approx(1.0));
}

TEST_CASE("coefficient monotonicity under measure blending") {
    SUBCASE("matching measures decrease along the kappa grid") {
        for (unsigned long seed = 900; seed < 910; ++seed) {
            Mdp mdp = generate_garnet(GarnetSpec::standard(6, 2, seed));
            auto [v_star, pi_star] = solve_optimal(mdp, 1e-10);
            StateDistribution nu = StateDistribution::uniform(6);
            double prev = kInf;
            for (double kappa : {0.0, 0.25, 0.5, 0.75, 1.0}) {
                double v = c_pi_star_kappa(mdp, pi_star, kappa, nu, nu).value;
                CHECK(v <= prev + 1e-9);
                prev = v;
            }
        }
    }
    SUBCASE("single-state problems sit at the coefficient floor") {
        std::vector<Eigen::MatrixXd> p{Eigen::MatrixXd::Ones(1, 1)};
        Mdp mdp = Mdp::make(1, 1, std::move(p), Eigen::MatrixXd::Ones(1, 1), 0.9);
        Policy only = Policy::uniform(1, 1);
        StateDistribution nu = StateDistribution::uniform(1);
        MonotonicityReport rep = check_coefficient_monotonicity(mdp, only, nu, nu, 0.2, 0.8);
        CHECK(rep.coeff_kappa == doctest::Approx(1.0));
        CHECK(rep.coeff_kappa_prime == doctest::Approx(1.0));
        CHECK(rep.holds);
        CHECK_FALSE(rep.strict);
    }
    SUBCASE("blending inequality on random instances") {
        Rng rng(19);
        for (unsigned long seed = 920; seed < 940; ++seed) {
            Mdp mdp = generate_garnet(GarnetSpec::standard(6, 2, seed));
            auto [v_star, pi_star] = solve_optimal(mdp, 1e-10);
            StateDistribution mu = oracles::random_distribution(rng, 6);
            StateDistribution nu = StateDistribution::uniform(6);
            MonotonicityReport rep = check_coefficient_monotonicity(mdp, pi_star, mu, nu, 0.2, 0.8);
            CHECK(rep.holds);
            CHECK(rep.alpha_star > 0.0);
            CHECK(rep.alpha_star < 1.0);
        }
    }
    SUBCASE("requires kappa_prime above kappa") {
        Mdp mdp = generate_garnet(GarnetSpec::standard(4, 2, 1));
        auto [v_star, pi_star] = solve_optimal(mdp, 1e-10);
        StateDistribution nu = StateDistribution::uniform(4);
        CHECK_THROWS_AS(check_coefficient_monotonicity(mdp, pi_star, nu, nu, 0.8, 0.8),
                        std::invalid_argument);
    }
}

TEST_CASE("full coefficient report and ordering chain") {
    Mdp mdp = generate_garnet(GarnetSpec::standard(6, 2, 77));
    auto [v_star, pi_star] = solve_optimal(mdp, 1e-10);
    StateDistribution uniform = StateDistribution::uniform(6);
    Rng rng(23);
    StateDistribution mu = oracles::random_distribution(rng, 6);

    CoefficientReport rep = compute_coefficient_report(mdp, pi_star, mu, uniform, 0.5, 200, {0, 5});
    CHECK(rep.ordering_first_link_ok);  // the only asserted link
    if (!rep.ordering_chain_ok)
        MESSAGE("reported ordering chain violated: C_pi_star_1=", rep.series.C_pi_star_1,
                " C1=", rep.series.C1, " C2=", rep.series.C2);
    CHECK(rep.C_pi_star_kappa.value >= 1.0);
    CHECK(rep.series.C1 >= 1.0 - 1e-12);
    CHECK(rep.C_pi_star_1_kappa ==
          doctest::Approx(c_pi_star_1_kappa(rep.series.C_pi_star_1, rep.c[0].value, 0.5, mdp.gamma)));
}
