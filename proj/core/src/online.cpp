#include "xpi/online.hpp"

#include <cmath>
#include <stdexcept>

namespace xpi {

void StepSchedule::validate() const {
    if (!(0.5 < fast_exponent && fast_exponent < slow_exponent && slow_exponent <= 1.0))
        throw std::invalid_argument("StepSchedule requires 0.5 < fast_exponent < slow_exponent <= 1");
}

double StepSchedule::fast(long n) const { return std::pow(static_cast<double>(n), -fast_exponent); }
double StepSchedule::slow(long n) const { return std::pow(static_cast<double>(n + 1), -slow_exponent); }

OnlineState OnlineState::initial(const Mdp& mdp) {
    OnlineState st;
    st.q = QFunction::Zero(mdp.n_states, mdp.n_actions);
    st.q_kappa = QFunction::Zero(mdp.n_states, mdp.n_actions);
    st.pi = Policy::uniform(mdp.n_states, mdp.n_actions);
    st.state_counts.assign(static_cast<std::size_t>(mdp.n_states), 0);
    st.sa_counts.assign(static_cast<std::size_t>(mdp.n_states),
                        std::vector<long>(static_cast<std::size_t>(mdp.n_actions), 0));
    st.step = 0;
    return st;
}

Transition sample_step(const Mdp& mdp, const StateDistribution& nu, const Policy& pi, Rng& rng) {
    mdp.check_distribution(nu);
    mdp.check_policy(pi);
    if (!nu.strictly_positive())
        throw std::invalid_argument("sample_step: sampling measure must be strictly positive");

    int s = rng.sample_index({nu.p.data(), static_cast<std::size_t>(nu.p.size())});
    Eigen::VectorXd pi_row = pi.probs.row(s);
    int a = rng.sample_index({pi_row.data(), static_cast<std::size_t>(pi_row.size())});
    Eigen::VectorXd p_row = mdp.transitions[static_cast<std::size_t>(a)].row(s);
    int s_next = rng.sample_index({p_row.data(), static_cast<std::size_t>(p_row.size())});
    return Transition{s, a, mdp.reward(s, a), s_next};
}

int cautious_action(int s, const QFunction& q, const QFunction& q_kappa, const Policy& pi) {
    Eigen::Index a_kappa = 0;
    q_kappa.row(s).maxCoeff(&a_kappa);
    double v_pi = pi.probs.row(s).dot(q.row(s));
    if (q(s, a_kappa) >= v_pi) return static_cast<int>(a_kappa);
    Eigen::Index a_greedy = 0;
    q.row(s).maxCoeff(&a_greedy);
    return static_cast<int>(a_greedy);
}

OnlineState online_update(OnlineState state, const Mdp& mdp, const Transition& t,
                          const StepSchedule& sched, double kappa) {
    if (t.s < 0 || t.s >= mdp.n_states || t.a < 0 || t.a >= mdp.n_actions || t.s_next < 0 ||
        t.s_next >= mdp.n_states)
        throw std::invalid_argument("online_update: transition indices out of range");

    // Counters pre-increment; the stepsizes are indexed by the updated counts.
    state.step += 1;
    long n_s = ++state.state_counts[static_cast<std::size_t>(t.s)];
    long n_sa = ++state.sa_counts[static_cast<std::size_t>(t.s)][static_cast<std::size_t>(t.a)];

    double mu_f = sched.fast(n_sa);
    double v_next = state.pi.probs.row(t.s_next).dot(state.q.row(t.s_next));

    double delta = t.r + mdp.gamma * v_next - state.q(t.s, t.a);
    double delta_kappa = t.r + mdp.gamma * (1.0 - kappa) * v_next +
                         kappa * mdp.gamma * state.q_kappa.row(t.s_next).maxCoeff() -
                         state.q_kappa(t.s, t.a);

    state.q(t.s, t.a) += mu_f * delta;
    state.q_kappa(t.s, t.a) += mu_f * delta_kappa;

    int target = cautious_action(t.s, state.q, state.q_kappa, state.pi);
    double mu_s = sched.slow(n_s);
    Eigen::VectorXd one_hot = Eigen::VectorXd::Zero(mdp.n_actions);
    one_hot(target) = 1.0;
    state.pi.probs.row(t.s) += mu_s * (one_hot.transpose() - state.pi.probs.row(t.s));
    return state;
}

std::pair<QFunction, QFunction> apply_h(const Mdp& mdp, const Policy& pi, double kappa,
                                        const QFunction& q, const QFunction& q_kappa) {
    mdp.check_policy(pi);
    if (q.rows() != mdp.n_states || q.cols() != mdp.n_actions || q_kappa.rows() != mdp.n_states ||
        q_kappa.cols() != mdp.n_actions)
        throw std::invalid_argument("apply_h: q table shape mismatch");

    Eigen::VectorXd v_pi = (pi.probs.array() * q.array()).rowwise().sum();
    Eigen::VectorXd best_kappa = q_kappa.rowwise().maxCoeff();

    QFunction out_q(mdp.n_states, mdp.n_actions);
    QFunction out_qk(mdp.n_states, mdp.n_actions);
    for (int a = 0; a < mdp.n_actions; ++a) {
        const Eigen::MatrixXd& pa = mdp.transitions[static_cast<std::size_t>(a)];
        out_q.col(a) = mdp.rewards.col(a) + mdp.gamma * pa * v_pi;
        out_qk.col(a) = mdp.rewards.col(a) + mdp.gamma * (1.0 - kappa) * pa * v_pi +
                        kappa * mdp.gamma * pa * best_kappa;
    }
    return {out_q, out_qk};
}

std::pair<OnlineState, OnlineTrace> run_online(const Mdp& mdp, const StateDistribution& nu,
                                               double kappa, const StepSchedule& sched,
                                               long n_steps, unsigned long seed,
                                               long snapshot_stride) {
    if (n_steps < 1) throw std::invalid_argument("run_online: n_steps must be >= 1");
    if (snapshot_stride < 1) throw std::invalid_argument("run_online: snapshot_stride must be >= 1");
    sched.validate();

    auto [v_star, pi_star] = solve_optimal(mdp, 1e-10);
    QFunction q_star(mdp.n_states, mdp.n_actions);
    for (int a = 0; a < mdp.n_actions; ++a)
        q_star.col(a) =
            mdp.rewards.col(a) + mdp.gamma * mdp.transitions[static_cast<std::size_t>(a)] * v_star;

    auto snapshot = [&](const OnlineState& st) {
        OnlineSnapshot snap;
        snap.step = st.step;
        snap.q_err_inf = (st.q - q_star).cwiseAbs().maxCoeff();
        snap.qk_err_inf = (st.q_kappa - q_star).cwiseAbs().maxCoeff();
        int match = 0;
        for (int s = 0; s < mdp.n_states; ++s) {
            Eigen::Index best = 0;
            st.q.row(s).maxCoeff(&best);
            if (static_cast<int>(best) == pi_star.action(s)) ++match;
        }
        snap.policy_match_frac = static_cast<double>(match) / mdp.n_states;
        return snap;
    };

    Rng rng(seed);
    OnlineState st = OnlineState::initial(mdp);
    OnlineTrace trace;
    for (long n = 0; n < n_steps; ++n) {
        Transition t = sample_step(mdp, nu, st.pi, rng);
        st = online_update(std::move(st), mdp, t, sched, kappa);
        if (st.step % snapshot_stride == 0) trace.snapshots.push_back(snapshot(st));
    }
    if (trace.snapshots.empty() || trace.snapshots.back().step != st.step)
        trace.snapshots.push_back(snapshot(st));
    return {std::move(st), std::move(trace)};
}

}  // namespace xpi
