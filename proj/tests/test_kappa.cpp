#include <doctest.h>

#include "support/oracles.hpp"
#include "xpi/garnet.hpp"
#include "xpi/kappa.hpp"
#include "xpi/mixture.hpp"

using namespace xpi;

TEST_CASE("contraction factor endpoints and monotonicity") {
    CHECK(xi(0.9, 0.0) == doctest::Approx(0.9));
    CHECK(xi(0.9, 1.0) == doctest::Approx(0.0));
    CHECK(xi(0.9, 0.5) == doctest::Approx(0.45 / 0.55));

    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        double gamma = rng.uniform(0.05, 0.99);
        double k1 = rng.uniform();
        double k2 = rng.uniform();
        if (k1 > k2) std::swap(k1, k2);
        double x1 = xi(gamma, k1);
        double x2 = xi(gamma, k2);
        CHECK(x1 >= 0.0);
        CHECK(x1 <= gamma + 1e-15);
        if (k2 > k1 + 1e-12) CHECK(x2 < x1 + 1e-15);
    }

    KappaContext ctx = KappaContext::make(0.9, 0.5);
    CHECK(ctx.xi == doctest::Approx(xi(0.9, 0.5)));
    CHECK_THROWS_AS(xi(0.9, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(xi(1.0, 0.5), std::invalid_argument);
}

TEST_CASE("surrogate construction") {
    Rng rng(5);
    Mdp mdp = oracles::random_mdp(rng, 4, 2, 0.9);
    ValueFunction v = oracles::random_value(rng, 4);

    SUBCASE("kappa=1 leaves rewards untouched at full discount") {
        SurrogateMdp s = build_surrogate(mdp, v, 1.0);
        CHECK(oracles::inf_norm((s.mdp.rewards - mdp.rewards).reshaped()) < 1e-12);
        CHECK(s.mdp.gamma == doctest::Approx(mdp.gamma));
    }
    SUBCASE("zero shaping value leaves rewards untouched at reduced discount") {
        SurrogateMdp s = build_surrogate(mdp, ValueFunction::Zero(4), 0.4);
        CHECK(oracles::inf_norm((s.mdp.rewards - mdp.rewards).reshaped()) < 1e-12);
        CHECK(s.mdp.gamma == doctest::Approx(0.4 * mdp.gamma));
    }
    SUBCASE("kappa=0 surrogate optimum is the 1-step greedy policy") {
        SurrogateMdp s = build_surrogate(mdp, v, 0.0);
        CHECK(s.mdp.gamma == 0.0);
        auto [u, greedy_surrogate] = solve_optimal(s.mdp, 1e-12);
        auto [tv, greedy_direct] = apply_optimal_bellman(mdp, v);
        for (int st = 0; st < 4; ++st) CHECK(greedy_surrogate.action(st) == greedy_direct.action(st));
    }
    SUBCASE("shape mismatch throws") {
        CHECK_THROWS_AS(build_surrogate(mdp, ValueFunction::Zero(3), 0.5), std::invalid_argument);
    }
}

TEST_CASE("policy-side kappa backup") {
    Rng rng(7);
    Mdp mdp = oracles::random_mdp(rng, 5, 3, 0.9);
    Policy pi = oracles::random_policy(rng, 5, 3);
    ValueFunction v = oracles::random_value(rng, 5);

    SUBCASE("kappa=0 is the plain policy backup") {
        CHECK(oracles::inf_norm(apply_t_kappa_pi(mdp, pi, 0.0, v) - apply_bellman(mdp, pi, v)) <
              1e-12);
    }
    SUBCASE("the policy value is a fixed point for every kappa") {
        ValueFunction v_pi = evaluate_policy(mdp, pi);
        for (double kappa : {0.0, 0.3, 0.7, 1.0})
            CHECK(oracles::inf_norm(apply_t_kappa_pi(mdp, pi, kappa, v_pi) - v_pi) < 1e-9);
    }
    SUBCASE("kappa=1 ignores the input value entirely") {
        ValueFunction v_pi = evaluate_policy(mdp, pi);
        CHECK(oracles::inf_norm(apply_t_kappa_pi(mdp, pi, 1.0, v) - v_pi) < 1e-9);
    }
}

TEST_CASE("optimal kappa backup") {
    Mdp rope = tightrope_mdp(2.0, 0.9);
    ValueFunction v0 = evaluate_policy(rope, oracles::hesitant());

    SUBCASE("kappa=0 matches the optimal Bellman operator") {
        Rng rng(11);
        Mdp mdp = oracles::random_mdp(rng, 4, 2, 0.85);
        ValueFunction v = oracles::random_value(rng, 4);
        auto [u, pi_u] = apply_t_kappa(mdp, 0.0, v, 1e-11);
        CHECK(oracles::inf_norm(u - apply_optimal_bellman(mdp, v).first) < 1e-10);
    }
    SUBCASE("v* is the fixed point for any kappa") {
        auto [v_star, pi_star] = solve_optimal(rope, 1e-11);
        for (double kappa : {0.0, 0.5, 1.0}) {
            auto [u, pi_u] = apply_t_kappa(rope, kappa, v_star, 1e-11);
            CHECK(oracles::inf_norm(u - v_star) < 1e-8);
        }
    }
    SUBCASE("kappa=1 on the hesitant value returns the confident policy") {
        auto [u, pi_u] = apply_t_kappa(rope, 1.0, v0, 1e-11);
        CHECK(pi_u.action(0) == 1);
        CHECK(pi_u.action(1) == 1);
    }
    SUBCASE("the returned policy attains the optimal backup within tol everywhere") {
        Rng rng(13);
        for (int trial = 0; trial < 20; ++trial) {
            Mdp mdp = oracles::random_mdp(rng, 4, 3, 0.9);
            ValueFunction v = oracles::random_value(rng, 4);
            double kappa = rng.uniform();
            double tol = 1e-9;
            auto [u, pi_u] = apply_t_kappa(mdp, kappa, v, tol);
            ValueFunction attained = apply_t_kappa_pi(mdp, pi_u, kappa, v);
            CHECK((attained.array() >= u.array() - tol).all());
        }
    }
}

TEST_CASE("greedy policy extraction") {
    SUBCASE("kappa=0 on a policy value is the 1-step greedy policy") {
        Rng rng(17);
        Mdp mdp = oracles::random_mdp(rng, 5, 2, 0.9);
        Policy pi = oracles::random_policy(rng, 5, 2);
        ValueFunction v_pi = evaluate_policy(mdp, pi);
        Policy greedy = kappa_greedy_policy(mdp, v_pi, 0.0);
        Policy direct = apply_optimal_bellman(mdp, v_pi).second;
        for (int s = 0; s < 5; ++s) CHECK(greedy.action(s) == direct.action(s));
    }
    SUBCASE("kappa=1 recovers an optimal policy from any value") {
        Rng rng(19);
        Mdp mdp = oracles::random_mdp(rng, 4, 2, 0.9);
        ValueFunction v = oracles::random_value(rng, 4);
        Policy greedy = kappa_greedy_policy(mdp, v, 1.0);
        auto [v_brute, pi_brute] = oracles::enumerate_optimal(mdp);
        CHECK(oracles::inf_norm(evaluate_policy(mdp, greedy) - v_brute) < 1e-7);
    }
    SUBCASE("a small penalty keeps the confident policy greedy at kappa=0.5") {
        // c below kappa/(1-kappa) = 1 makes the confident policy the greedy one.
        Mdp rope = tightrope_mdp(0.1, 0.9);
        ValueFunction v0 = evaluate_policy(rope, oracles::hesitant());
        Policy greedy = kappa_greedy_policy(rope, v0, 0.5);
        CHECK(greedy.action(0) == 1);
        CHECK(greedy.action(1) == 1);

        // Cross-check by enumerating all policies on the surrogate.
        SurrogateMdp s = build_surrogate(rope, v0, 0.5);
        auto [u_brute, pi_brute] = oracles::enumerate_optimal(s.mdp);
        CHECK(pi_brute.action(0) == 1);
        CHECK(pi_brute.action(1) == 1);
    }
}

TEST_CASE("surrogate q function") {
    SUBCASE("kappa=0 reduces to the plain q function") {
        Rng rng(23);
        Mdp mdp = oracles::random_mdp(rng, 4, 2, 0.9);
        Policy pi = oracles::random_policy(rng, 4, 2);
        CHECK(oracles::inf_norm((q_kappa(mdp, pi, 0.0, 1e-12) - q_of_policy(mdp, pi)).reshaped()) <
              1e-10);
    }
    SUBCASE("at the optimal policy it equals q* for every kappa") {
        Rng rng(29);
        Mdp mdp = oracles::random_mdp(rng, 4, 2, 0.9);
        auto [v_star, pi_star] = solve_optimal(mdp, 1e-12);
        QFunction q_star(4, 2);
        for (int a = 0; a < 2; ++a)
            q_star.col(a) = mdp.rewards.col(a) + mdp.gamma * mdp.transitions[a] * v_star;
        for (double kappa : {0.0, 0.5, 1.0})
            CHECK(oracles::inf_norm((q_kappa(mdp, pi_star, kappa, 1e-12) - q_star).reshaped()) <
                  1e-7);
    }
    SUBCASE("matches brute-force value iteration on an explicit surrogate") {
        Rng rng(31);
        Mdp mdp = oracles::random_mdp(rng, 3, 2, 0.9);
        Policy pi = oracles::random_policy(rng, 3, 2);
        ValueFunction v_pi = evaluate_policy(mdp, pi);
        QFunction got = q_kappa(mdp, pi, 0.5, 1e-12);
        QFunction want = oracles::surrogate_q_vi(mdp, v_pi, 0.5);
        CHECK(oracles::inf_norm((got - want).reshaped()) < 1e-9);
    }
}

TEST_CASE("multi-horizon greedy policy") {
    SUBCASE("h=1 is the 1-step greedy policy") {
        Rng rng(37);
        Mdp mdp = oracles::random_mdp(rng, 4, 2, 0.9);
        ValueFunction v = oracles::random_value(rng, 4);
        Policy h1 = h_greedy_policy(mdp, v, 1);
        Policy direct = apply_optimal_bellman(mdp, v).second;
        for (int s = 0; s < 4; ++s) CHECK(h1.action(s) == direct.action(s));
    }
    SUBCASE("two-step lookahead fixes the rope at large penalty") {
        Mdp rope = tightrope_mdp(5.0, 0.9);
        ValueFunction v0 = evaluate_policy(rope, oracles::hesitant());
        Policy h2 = h_greedy_policy(rope, v0, 2);
        CHECK(h2.action(0) == 1);
        CHECK(h2.action(1) == 1);

        // Two-horizon tree expansion oracle: max over (a0, a1) pairs.
        auto backup2 = [&](int s, int a) {
            double best = -1e18;
            for (int a2 = 0; a2 < 2; ++a2) {
                double val = 0.0;
                for (int s1 = 0; s1 < 4; ++s1) {
                    double inner = rope.reward(s1, a2);
                    for (int s2 = 0; s2 < 4; ++s2)
                        inner += rope.gamma * rope.transition(s1, a2, s2) * v0(s2);
                    val += rope.transition(s, a, s1) * inner;
                }
                best = std::max(best, val);
            }
            return rope.reward(s, a) + rope.gamma * best;
        };
        for (int s = 0; s < 2; ++s) {
            int want = backup2(s, 1) > backup2(s, 0) ? 1 : 0;
            CHECK(h2.action(s) == want);
        }
    }
    SUBCASE("any horizon is optimal at v*") {
        Rng rng(41);
        Mdp mdp = oracles::random_mdp(rng, 4, 2, 0.9);
        auto [v_star, pi_star] = solve_optimal(mdp, 1e-12);
        auto [v_brute, pi_brute] = oracles::enumerate_optimal(mdp);
        for (int h : {1, 2, 5}) {
            Policy ph = h_greedy_policy(mdp, v_star, h);
            CHECK(oracles::inf_norm(evaluate_policy(mdp, ph) - v_brute) < 1e-7);
        }
    }
    SUBCASE("h must be positive") {
        Mdp rope = tightrope_mdp(2.0, 0.9);
        CHECK_THROWS_AS(h_greedy_policy(rope, ValueFunction::Zero(4), 0), std::invalid_argument);
    }
}

TEST_CASE("greedy improvement is strict away from the optimum") {
    Rng rng(43);
    for (int trial = 0; trial < 15; ++trial) {
        Mdp mdp = oracles::random_mdp(rng, 4, 2, 0.9);
        Policy pi = oracles::random_policy(rng, 4, 2);
        ValueFunction v_pi = evaluate_policy(mdp, pi);
        auto [v_star, pi_star] = solve_optimal(mdp, 1e-11);
        if (oracles::inf_norm(v_star - v_pi) < 1e-6) continue;

        double kappa = rng.uniform();
        for (const Policy& improved :
             {kappa_greedy_policy(mdp, v_pi, kappa), h_greedy_policy(mdp, v_pi, 2)}) {
            ValueFunction v_new = evaluate_policy(mdp, improved);
            CHECK((v_new.array() >= v_pi.array() - 1e-9).all());
            CHECK(v_new.maxCoeff() > v_pi.maxCoeff() - 1e-9);
            CHECK((v_new - v_pi).maxCoeff() > 1e-9);
        }
    }
}

TEST_CASE("exact multi-step policy iteration") {
    SUBCASE("kappa=1 converges in a single improvement step") {
        Rng rng(47);
        Mdp mdp = oracles::random_mdp(rng, 5, 3, 0.9);
        auto [v_star, pi_star] = solve_optimal(mdp, 1e-11);
        KappaPiResult res = exact_kappa_pi(mdp, 1.0, 1e-9, 10, v_star);
        REQUIRE(!res.iterations.empty());
        CHECK(res.iterations.front().optimality_gap.value() < 1e-7);
        CHECK_FALSE(res.truncated);
    }
    SUBCASE("kappa=0 reproduces the classical policy iteration trace") {
        Rng rng(53);
        Mdp mdp = oracles::random_mdp(rng, 4, 2, 0.9);
        KappaPiResult res = exact_kappa_pi(mdp, 0.0, 1e-10, 50);

        // Classical policy iteration from the same uniform start.
        Policy pi = Policy::uniform(4, 2);
        ValueFunction v = evaluate_policy(mdp, pi);
        for (const IterationRecord& rec : res.iterations) {
            pi = apply_optimal_bellman(mdp, v).second;
            ValueFunction v_next = evaluate_policy(mdp, pi);
            CHECK(rec.value_change_inf == doctest::Approx(oracles::inf_norm(v_next - v)).epsilon(1e-9));
            v = v_next;
        }
    }
    SUBCASE("error decays at the advertised rate on a benchmark instance") {
        Mdp mdp = generate_garnet(GarnetSpec::standard(6, 3, 7));
        auto [v_star, pi_star] = solve_optimal(mdp, 1e-12);
        KappaPiResult res = exact_kappa_pi(mdp, 0.5, 1e-11, 60, v_star);
        double rate = xi(mdp.gamma, 0.5) + 0.05;
        for (std::size_t i = 1; i < res.iterations.size(); ++i) {
            double prev = res.iterations[i - 1].optimality_gap.value();
            double cur = res.iterations[i].optimality_gap.value();
            if (prev < 1e-9) break;
            CHECK(cur <= rate * prev + 1e-9);
        }
    }
    SUBCASE("iteration cap sets the truncation flag") {
        Mdp mdp = generate_garnet(GarnetSpec::standard(6, 3, 7));
        KappaPiResult res = exact_kappa_pi(mdp, 0.0, 1e-13, 1);
        CHECK(res.truncated);
        CHECK(res.iterations.size() == 1);
    }
}

TEST_CASE("kappa value-difference identity on random draws") {
    Rng rng(59);
    for (int trial = 0; trial < 50; ++trial) {
        int n_s = 2 + rng.uniform_int(4);
        Mdp mdp = oracles::random_mdp(rng, n_s, 2, rng.uniform(0.4, 0.95));
        Policy pi = oracles::random_policy(rng, n_s, 2);
        ValueFunction v = oracles::random_value(rng, n_s);
        double kappa = rng.uniform();

        ValueFunction lhs = apply_t_kappa_pi(mdp, pi, kappa, v) - v;
        Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n_s, n_s) -
                            kappa * mdp.gamma * mdp.policy_kernel(pi);
        ValueFunction rhs = a.partialPivLu().solve(apply_bellman(mdp, pi, v) - v);
        CHECK(oracles::inf_norm(lhs - rhs) < 1e-9);
    }
}
