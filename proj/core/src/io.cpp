#include "xpi/io.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace xpi {

namespace {

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

void write_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
}

}  // namespace

Mdp load_mdp(const std::string& path) {
    nlohmann::json j = read_json(path);
    for (const char* key : {"gamma", "n_states", "n_actions", "rewards", "transitions"})
        if (!j.contains(key)) throw std::invalid_argument(path + ": missing key '" + key + "'");

    int n_states = j["n_states"].get<int>();
    int n_actions = j["n_actions"].get<int>();
    double gamma = j["gamma"].get<double>();

    const auto& jr = j["rewards"];
    const auto& jt = j["transitions"];
    if (static_cast<int>(jr.size()) != n_states)
        throw std::invalid_argument(path + ": rewards must have n_states rows");
    if (static_cast<int>(jt.size()) != n_states)
        throw std::invalid_argument(path + ": transitions must have n_states rows");

    Eigen::MatrixXd rewards(n_states, n_actions);
    std::vector<Eigen::MatrixXd> transitions(static_cast<std::size_t>(n_actions),
                                             Eigen::MatrixXd::Zero(n_states, n_states));
    for (int s = 0; s < n_states; ++s) {
        if (static_cast<int>(jr[s].size()) != n_actions)
            throw std::invalid_argument(path + ": rewards row s=" + std::to_string(s) +
                                        " must have n_actions entries");
        if (static_cast<int>(jt[s].size()) != n_actions)
            throw std::invalid_argument(path + ": transitions row s=" + std::to_string(s) +
                                        " must have n_actions entries");
        for (int a = 0; a < n_actions; ++a) {
            rewards(s, a) = jr[s][a].get<double>();
            if (static_cast<int>(jt[s][a].size()) != n_states)
                throw std::invalid_argument(path + ": transitions[s=" + std::to_string(s) +
                                            "][a=" + std::to_string(a) + "] must have n_states entries");
            for (int s2 = 0; s2 < n_states; ++s2)
                transitions[static_cast<std::size_t>(a)](s, s2) = jt[s][a][s2].get<double>();
        }
    }
    return Mdp::make(n_states, n_actions, std::move(transitions), std::move(rewards), gamma);
}

void save_mdp(const Mdp& mdp, const std::string& path) {
    nlohmann::json j;
    j["gamma"] = mdp.gamma;
    j["n_states"] = mdp.n_states;
    j["n_actions"] = mdp.n_actions;
    nlohmann::json jr = nlohmann::json::array();
    nlohmann::json jt = nlohmann::json::array();
    for (int s = 0; s < mdp.n_states; ++s) {
        nlohmann::json row_r = nlohmann::json::array();
        nlohmann::json row_t = nlohmann::json::array();
        for (int a = 0; a < mdp.n_actions; ++a) {
            row_r.push_back(mdp.rewards(s, a));
            nlohmann::json row_p = nlohmann::json::array();
            for (int s2 = 0; s2 < mdp.n_states; ++s2)
                row_p.push_back(mdp.transition(s, a, s2));
            row_t.push_back(row_p);
        }
        jr.push_back(row_r);
        jt.push_back(row_t);
    }
    j["rewards"] = jr;
    j["transitions"] = jt;
    write_json(j, path);
}

StateDistribution load_distribution(const std::string& path, int n_states) {
    nlohmann::json j = read_json(path);
    if (!j.is_array() || static_cast<int>(j.size()) != n_states)
        throw std::invalid_argument(path + ": expected a JSON array of " + std::to_string(n_states) +
                                    " probabilities");
    StateDistribution d;
    d.p = Eigen::VectorXd(n_states);
    for (int s = 0; s < n_states; ++s) d.p(s) = j[s].get<double>();
    d.validate();
    return d;
}

void save_distribution(const StateDistribution& dist, const std::string& path) {
    nlohmann::json j = nlohmann::json::array();
    for (int s = 0; s < dist.n_states(); ++s) j.push_back(dist.p(s));
    write_json(j, path);
}

}  // namespace xpi
