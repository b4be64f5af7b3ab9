#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "csv.hpp"
#include "parallel.hpp"
#include "xpi/approx.hpp"
#include "xpi/concentrability.hpp"
#include "xpi/garnet.hpp"
#include "xpi/io.hpp"
#include "xpi/kappa.hpp"
#include "xpi/mdp.hpp"
#include "xpi/mixture.hpp"
#include "xpi/online.hpp"
#include "xpi/verify.hpp"
#include "xpi/version.hpp"

namespace {

using xpi::cli::CsvWriter;

xpi::StateDistribution parse_distribution(const std::string& arg, int n_states) {
    if (arg == "uniform") return xpi::StateDistribution::uniform(n_states);
    return xpi::load_distribution(arg, n_states);
}

std::vector<double> parse_grid(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    if (out.empty()) throw std::invalid_argument("empty grid: " + csv);
    return out;
}

xpi::CorruptionMode parse_corruption(const std::string& name) {
    if (name == "none") return xpi::CorruptionMode::none;
    if (name == "worst") return xpi::CorruptionMode::worst_state_swap;
    if (name == "random") return xpi::CorruptionMode::random_swap;
    throw std::invalid_argument("unknown corruption mode: " + name);
}

int cmd_solve(const std::string& mdp_path, double tol) {
    xpi::Mdp mdp = xpi::load_mdp(mdp_path);
    auto [v, pi] = xpi::solve_optimal(mdp, tol);
    std::printf("state,v_star,action\n");
    for (int s = 0; s < mdp.n_states; ++s)
        std::printf("%d,%.17g,%d\n", s, v(s), pi.action(s));
    return 0;
}

int cmd_garnet_gen(int states, int actions, int branching, double sparsity, unsigned long seed,
                   double gamma, const std::string& out) {
    xpi::GarnetSpec spec;
    spec.n_states = states;
    spec.n_actions = actions;
    spec.branching = branching > 0 ? branching : (states + 1) / 2;
    spec.reward_sparsity = sparsity;
    spec.seed = seed;
    spec.gamma = gamma;
    xpi::save_mdp(xpi::generate_garnet(spec), out);
    std::printf("wrote %s\n", out.c_str());
    return 0;
}

int cmd_tightrope(double c, double gamma, double alpha, double kappa, unsigned long seed,
                  const std::string& out) {
    xpi::Mdp rope = xpi::tightrope_mdp(c, gamma);
    xpi::Policy hesitant = xpi::Policy::from_actions({0, 0, 0, 0}, 2);
    xpi::ImprovementReport rep =
        xpi::improvement_report(rope, hesitant, alpha, xpi::KappaMode{kappa});
    xpi::ValueFunction v0 = xpi::evaluate_policy(rope, hesitant);
    xpi::ValueFunction v_mix = v0 + rep.delta_vector;

    CsvWriter csv(out, seed, {"seed", "c", "gamma", "kappa", "alpha", "v_mix_s0", "v_mix_s1",
                              "min_delta", "improved_everywhere"});
    csv.row({CsvWriter::num(static_cast<long>(seed)), CsvWriter::num(c), CsvWriter::num(gamma),
             CsvWriter::num(kappa), CsvWriter::num(alpha), CsvWriter::num(v_mix(0)),
             CsvWriter::num(v_mix(1)), CsvWriter::num(rep.delta_vector.minCoeff()),
             rep.improved_everywhere ? "1" : "0"});
    std::printf("v_mix(s0)=%.6f min_delta=%.6f improved=%d\n", v_mix(0),
                rep.delta_vector.minCoeff(), rep.improved_everywhere ? 1 : 0);
    return 0;
}

int cmd_sweep(int n_mdps, int states, int actions, double gamma, const std::string& kappa_grid,
              int alpha_draws, unsigned long seed, int threads, const std::string& out) {
    std::vector<double> kappas = parse_grid(kappa_grid);
    struct Cell {
        unsigned long mdp_seed;
        double kappa;
        double alpha;
        double min_delta;
        bool improved;
    };
    struct Task {
        unsigned long mdp_seed;
        double kappa;
        double alpha;
    };

    std::vector<Task> tasks;
    for (int m = 0; m < n_mdps; ++m) {
        xpi::Rng rng(seed * 77 + static_cast<unsigned long>(m));
        for (double kappa : kappas)
            for (int d = 0; d < alpha_draws; ++d) {
                double alpha = kappa + (1.0 - kappa) * std::max(rng.uniform(), 1e-9);
                tasks.push_back({seed + static_cast<unsigned long>(m), kappa, alpha});
            }
    }

    std::vector<Cell> cells = xpi::cli::parallel_map<Cell>(
        static_cast<int>(tasks.size()), xpi::cli::resolve_threads(threads), [&](int i) {
            const Task& t = tasks[static_cast<std::size_t>(i)];
            xpi::Mdp mdp = xpi::generate_garnet(
                xpi::GarnetSpec::standard(states, actions, t.mdp_seed, gamma));
            xpi::Rng prng(t.mdp_seed * 31 + 7);
            // A fresh stochastic policy per MDP keeps the sweep off one-hot corners.
            xpi::Policy pi;
            pi.probs = Eigen::MatrixXd(states, actions);
            for (int s = 0; s < states; ++s) {
                double total = 0.0;
                for (int a = 0; a < actions; ++a) {
                    double w = prng.uniform() + 1e-3;
                    pi.probs(s, a) = w;
                    total += w;
                }
                pi.probs.row(s) /= total;
            }
            xpi::ImprovementReport rep =
                xpi::improvement_report(mdp, pi, t.alpha, xpi::KappaMode{t.kappa});
            return Cell{t.mdp_seed, t.kappa, t.alpha, rep.delta_vector.minCoeff(),
                        rep.improved_everywhere};
        });

    CsvWriter csv(out, seed, {"mdp_seed", "kappa", "alpha", "min_delta", "improved_everywhere"});
    for (const Cell& c : cells)
        csv.row({CsvWriter::num(static_cast<long>(c.mdp_seed)), CsvWriter::num(c.kappa),
                 CsvWriter::num(c.alpha), CsvWriter::num(c.min_delta), c.improved ? "1" : "0"});
    std::printf("%zu cells written to %s\n", cells.size(), out.c_str());
    return 0;
}

int cmd_kpi(const std::string& mdp_path, double kappa, double tol, int max_iters,
            unsigned long seed, const std::string& out) {
    xpi::Mdp mdp = xpi::load_mdp(mdp_path);
    auto [v_star, pi_star] = xpi::solve_optimal(mdp, 1e-10);
    xpi::KappaPiResult res = xpi::exact_kappa_pi(mdp, kappa, tol, max_iters, v_star);

    CsvWriter csv(out, seed, {"iter", "value_change_inf", "optimality_gap", "truncated"});
    for (const xpi::IterationRecord& rec : res.iterations)
        csv.row({CsvWriter::num(rec.iteration), CsvWriter::num(rec.value_change_inf),
                 CsvWriter::num(rec.optimality_gap.value_or(-1.0)),
                 res.truncated ? "1" : "0"});
    std::printf("%zu iterations, truncated=%d\n", res.iterations.size(), res.truncated ? 1 : 0);
    return 0;
}

int cmd_online(const std::string& mdp_path, const std::string& nu_arg, double kappa, long steps,
               unsigned long seed, double fast_exp, double slow_exp, long stride,
               const std::string& out) {
    xpi::Mdp mdp = xpi::load_mdp(mdp_path);
    xpi::StateDistribution nu = parse_distribution(nu_arg, mdp.n_states);
    xpi::StepSchedule sched{fast_exp, slow_exp};
    auto [state, trace] = xpi::run_online(mdp, nu, kappa, sched, steps, seed, stride);

    CsvWriter csv(out, seed, {"step", "q_err_inf", "qk_err_inf", "policy_match_frac"});
    for (const xpi::OnlineSnapshot& snap : trace.snapshots)
        csv.row({CsvWriter::num(snap.step), CsvWriter::num(snap.q_err_inf),
                 CsvWriter::num(snap.qk_err_inf), CsvWriter::num(snap.policy_match_frac)});
    const xpi::OnlineSnapshot& last = trace.snapshots.back();
    std::printf("final q_err_inf=%.6g policy_match=%.3f\n", last.q_err_inf,
                last.policy_match_frac);
    return 0;
}

int run_approx(bool psdp, const std::string& mdp_path, double kappa, double delta,
               const std::string& nu_arg, const std::string& mu_arg, int iters, bool auto_kstar,
               const std::string& corruption, unsigned long seed, const std::string& out) {
    xpi::Mdp mdp = xpi::load_mdp(mdp_path);
    xpi::StateDistribution nu = parse_distribution(nu_arg, mdp.n_states);
    xpi::StateDistribution mu = parse_distribution(mu_arg, mdp.n_states);

    int k = iters;
    if (auto_kstar) k = xpi::kstar(kappa, mdp.gamma, delta, mdp.r_max);

    xpi::GreedyOracleConfig cfg;
    cfg.delta = delta;
    cfg.nu = nu;
    cfg.corruption_mode = parse_corruption(corruption);
    cfg.seed = seed;

    auto [v_star, pi_star] = xpi::solve_optimal(mdp, 1e-10);
    xpi::CoefficientReport coeffs =
        xpi::compute_coefficient_report(mdp, pi_star, mu, nu, kappa, 200, {});
    xpi::BoundInputs in;
    in.kappa = kappa;
    in.gamma = mdp.gamma;
    in.delta = delta;
    in.r_max = mdp.r_max;
    in.c0 = coeffs.c[0].value;
    in.C1 = coeffs.series.C1;
    in.C2 = coeffs.series.C2;
    in.C_pi_star_1 = coeffs.series.C_pi_star_1;
    in.C_pi_star_kappa = coeffs.C_pi_star_kappa.value;

    xpi::Policy pi0 = xpi::Policy::uniform(mdp.n_states, mdp.n_actions);
    xpi::ApiTrace trace;
    if (psdp) {
        trace = xpi::kappa_psdp(mdp, kappa, cfg, mu, k, pi0).second;
    } else {
        trace = xpi::kappa_api(mdp, kappa, cfg, mu, k, pi0);
    }

    CsvWriter csv(out, seed, {"iter", "loss", "bound_thm", "achieved_slack"});
    for (const xpi::ApiIteration& it : trace.iterations) {
        in.k = it.iteration;
        double bound = xpi::performance_bound(
            psdp ? xpi::BoundKind::psdp_fixed : xpi::BoundKind::api_fixed, in);
        csv.row({CsvWriter::num(it.iteration), CsvWriter::num(it.loss), CsvWriter::num(bound),
                 CsvWriter::num(it.achieved_slack)});
    }
    std::printf("%zu iterations, final loss %.6g\n", trace.iterations.size(),
                trace.iterations.back().loss);
    return 0;
}

int cmd_coeffs(const std::string& mdp_path, const std::string& mu_arg, const std::string& nu_arg,
               const std::string& kappa_grid, int imax, unsigned long seed,
               const std::string& out) {
    xpi::Mdp mdp = xpi::load_mdp(mdp_path);
    xpi::StateDistribution mu = parse_distribution(mu_arg, mdp.n_states);
    xpi::StateDistribution nu = parse_distribution(nu_arg, mdp.n_states);
    auto [v_star, pi_star] = xpi::solve_optimal(mdp, 1e-10);

    CsvWriter csv(out, seed, {"name", "kappa", "value", "raw", "floored", "truncation_index",
                              "truncation_bound", "heuristic_truncation"});
    xpi::CoefficientReport base =
        xpi::compute_coefficient_report(mdp, pi_star, mu, nu, 0.0, imax, {});
    auto srow = [&](const std::string& name, double value) {
        csv.row({name, "", CsvWriter::num(value), CsvWriter::num(value), "0",
                 CsvWriter::num(base.series.truncation_index),
                 CsvWriter::num(base.series.truncation_bound),
                 base.series.heuristic_truncation ? "1" : "0"});
    };
    csv.row({"c0", "", CsvWriter::num(base.c[0].value), CsvWriter::num(base.c[0].raw),
             base.c[0].floored ? "1" : "0", "0", "0", "0"});
    srow("C1", base.series.C1);
    srow("C2", base.series.C2);
    srow("C_pi_star_1", base.series.C_pi_star_1);
    for (double kappa : parse_grid(kappa_grid)) {
        xpi::CoefficientEntry e = xpi::c_pi_star_kappa(mdp, pi_star, kappa, mu, nu);
        csv.row({"C_pi_star_kappa", CsvWriter::num(kappa), CsvWriter::num(e.value),
                 CsvWriter::num(e.raw), e.floored ? "1" : "0", "0", "0", "0"});
        double c1k = xpi::c_pi_star_1_kappa(base.series.C_pi_star_1, base.c[0].value, kappa,
                                            mdp.gamma);
        csv.row({"C_pi_star_1_kappa", CsvWriter::num(kappa), CsvWriter::num(c1k),
                 CsvWriter::num(c1k), "0", CsvWriter::num(base.series.truncation_index),
                 CsvWriter::num(base.series.truncation_bound),
                 base.series.heuristic_truncation ? "1" : "0"});
    }
    std::printf("coefficients written to %s\n", out.c_str());
    return 0;
}

int cmd_verify(const std::string& suite, unsigned long seed, const std::string& cli_path) {
    xpi::VerifyOptions opt;
    opt.seed = seed;
    opt.cli_path = cli_path;
    std::vector<xpi::CriterionResult> results = xpi::run_acceptance(opt);
    if (suite == "quick") {
        std::erase_if(results, [](const xpi::CriterionResult& r) { return r.id == 5; });
        std::printf("(quick suite: online-convergence criterion skipped)\n");
    }
    int failures = xpi::report_acceptance(results);
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-step greedy policy iteration toolkit for tabular MDPs"};
    app.set_version_flag("--version", std::string(xpi::kVersion));
    app.require_subcommand(1);

    std::string mdp_path, out = "out.csv", nu_arg = "uniform", mu_arg = "uniform";
    std::string kappa_grid = "0,0.25,0.5,0.75,1";
    std::string corruption = "worst";
    std::string suite = "all";
    std::string cli_override;
    double tol = 1e-8, kappa = 0.5, alpha = 0.5, c = 2.0, gamma = 0.9, delta = 0.0;
    double sparsity = 0.5, fast_exp = 0.6, slow_exp = 1.0;
    unsigned long seed = 0;
    long steps = 100000, stride = 1000;
    int states = 5, actions = 2, branching = 0, iters = 10, max_iters = 100;
    int n_mdps = 200, alpha_draws = 3, imax = 200, threads = 0;
    bool auto_kstar = false;

    auto* solve = app.add_subcommand("solve", "Solve an MDP to optimality");
    solve->add_option("--mdp", mdp_path)->required();
    solve->add_option("--tol", tol);

    auto* garnet = app.add_subcommand("garnet-gen", "Generate a random benchmark MDP");
    garnet->add_option("--states", states);
    garnet->add_option("--actions", actions);
    garnet->add_option("--branching", branching);
    garnet->add_option("--sparsity", sparsity);
    garnet->add_option("--seed", seed);
    garnet->add_option("--gamma", gamma);
    garnet->add_option("--out", out)->required();

    auto* rope = app.add_subcommand("tightrope", "Soft-update counterexample on the rope MDP");
    rope->add_option("--c", c);
    rope->add_option("--gamma", gamma);
    rope->add_option("--alpha", alpha);
    rope->add_option("--kappa", kappa);
    rope->add_option("--seed", seed);
    rope->add_option("--out", out);

    auto* sweep = app.add_subcommand("theorem1-sweep", "Soft-update improvement sweep over random MDPs");
    sweep->add_option("--n-mdps", n_mdps);
    sweep->add_option("--states", states);
    sweep->add_option("--actions", actions);
    sweep->add_option("--gamma", gamma);
    sweep->add_option("--kappa-grid", kappa_grid);
    sweep->add_option("--alpha-draws", alpha_draws);
    sweep->add_option("--seed", seed);
    sweep->add_option("--threads", threads);
    sweep->add_option("--out", out);

    auto* kpi = app.add_subcommand("kpi", "Exact multi-step policy iteration");
    kpi->add_option("--mdp", mdp_path)->required();
    kpi->add_option("--kappa", kappa);
    kpi->add_option("--tol", tol);
    kpi->add_option("--max-iters", max_iters);
    kpi->add_option("--seed", seed);
    kpi->add_option("--out", out);

    auto* online = app.add_subcommand("online", "Two-timescale online policy iteration");
    online->add_option("--mdp", mdp_path)->required();
    online->add_option("--nu", nu_arg);
    online->add_option("--kappa", kappa);
    online->add_option("--steps", steps);
    online->add_option("--seed", seed);
    online->add_option("--fast-exp", fast_exp);
    online->add_option("--slow-exp", slow_exp);
    online->add_option("--snapshot-stride", stride);
    online->add_option("--out", out);

    auto* api = app.add_subcommand("api", "Approximate policy iteration with a noisy greedy step");
    auto* psdp = app.add_subcommand("psdp", "Policy search with accumulated stage policies");
    for (CLI::App* cmd : {api, psdp}) {
        cmd->add_option("--mdp", mdp_path)->required();
        cmd->add_option("--kappa", kappa);
        cmd->add_option("--delta", delta);
        cmd->add_option("--nu", nu_arg);
        cmd->add_option("--mu", mu_arg);
        cmd->add_option("--iters", iters);
        cmd->add_flag("--auto-kstar", auto_kstar);
        cmd->add_option("--corruption", corruption);
        cmd->add_option("--seed", seed);
        cmd->add_option("--out", out);
    }

    auto* coeffs = app.add_subcommand("coeffs", "Concentrability coefficient report");
    coeffs->add_option("--mdp", mdp_path)->required();
    coeffs->add_option("--mu", mu_arg);
    coeffs->add_option("--nu", nu_arg);
    coeffs->add_option("--kappa-grid", kappa_grid);
    coeffs->add_option("--imax", imax);
    coeffs->add_option("--seed", seed);
    coeffs->add_option("--out", out);

    auto* verify = app.add_subcommand("verify", "Run the full numerical verification suite");
    verify->add_option("--suite", suite)->check(CLI::IsMember({"all", "quick"}));
    verify->add_option("--seed", seed);
    verify->add_option("--cli", cli_override);

    if (seed == 0) seed = 1234;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*solve) return cmd_solve(mdp_path, tol);
        if (*garnet) return cmd_garnet_gen(states, actions, branching, sparsity, seed, gamma, out);
        if (*rope) return cmd_tightrope(c, gamma, alpha, kappa, seed, out);
        if (*sweep)
            return cmd_sweep(n_mdps, states, actions, gamma, kappa_grid, alpha_draws, seed, threads, out);
        if (*kpi) return cmd_kpi(mdp_path, kappa, tol, max_iters, seed, out);
        if (*online)
            return cmd_online(mdp_path, nu_arg, kappa, steps, seed, fast_exp, slow_exp, stride, out);
        if (*api)
            return run_approx(false, mdp_path, kappa, delta, nu_arg, mu_arg, iters, auto_kstar,
                              corruption, seed, out);
        if (*psdp)
            return run_approx(true, mdp_path, kappa, delta, nu_arg, mu_arg, iters, auto_kstar,
                              corruption, seed, out);
        if (*coeffs) return cmd_coeffs(mdp_path, mu_arg, nu_arg, kappa_grid, imax, seed, out);
        if (*verify) {
            std::string cli_path = cli_override.empty()
                                       ? std::filesystem::canonical(argv[0]).string()
                                       : cli_override;
            return cmd_verify(suite, seed, cli_path);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
