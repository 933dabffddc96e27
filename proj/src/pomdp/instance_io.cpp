#include "pig/pomdp/instance_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace pig::pomdp {

using nlohmann::json;

namespace {

json cube(const std::vector<double>& flat, std::size_t n0, std::size_t n1, std::size_t n2) {
    json out = json::array();
    for (std::size_t i = 0; i < n0; ++i) {
        json mid = json::array();
        for (std::size_t j = 0; j < n1; ++j) {
            json row = json::array();
            for (std::size_t k = 0; k < n2; ++k) row.push_back(flat[(i * n1 + j) * n2 + k]);
            mid.push_back(std::move(row));
        }
        out.push_back(std::move(mid));
    }
    return out;
}

json matrix(const std::vector<double>& flat, std::size_t n0, std::size_t n1) {
    json out = json::array();
    for (std::size_t i = 0; i < n0; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < n1; ++j) row.push_back(flat[i * n1 + j]);
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<double> flatten(const json& j, const std::vector<std::size_t>& dims, const char* name,
                            std::size_t depth = 0) {
    if (depth == dims.size()) {
        if (!j.is_number()) throw std::invalid_argument(std::string(name) + ": expected a number");
        return {j.get<double>()};
    }
    if (!j.is_array() || j.size() != dims[depth]) {
        std::ostringstream os;
        os << name << ": expected " << dims[depth] << " entries at depth " << depth;
        throw std::invalid_argument(os.str());
    }
    std::vector<double> out;
    for (const auto& item : j) {
        auto part = flatten(item, dims, name, depth + 1);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

} // namespace

std::string to_json_text(const TabularCPOMDP& m, int indent) {
    json j;
    j["states"] = m.num_states;
    j["actions"] = m.num_actions;
    j["observations"] = m.num_observations;
    j["P"] = cube(m.transition, m.num_states, m.num_actions, m.num_states);
    j["O"] = cube(m.observation, m.num_states, m.num_actions, m.num_observations);
    j["R"] = matrix(m.reward, m.num_states, m.num_actions);
    json costs = json::array();
    for (const auto& c : m.costs) costs.push_back(matrix(c, m.num_states, m.num_actions));
    j["C"] = costs;
    j["budgets"] = m.budgets;
    j["gamma"] = m.gamma;
    j["b0"] = m.initial_belief;
    return j.dump(indent);
}

TabularCPOMDP from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("instance: ") + e.what());
    }
    TabularCPOMDP m;
    try {
        m.num_states = j.at("states").get<std::size_t>();
        m.num_actions = j.at("actions").get<std::size_t>();
        m.num_observations = j.at("observations").get<std::size_t>();
        const std::size_t S = m.num_states, A = m.num_actions, Z = m.num_observations;
        m.transition = flatten(j.at("P"), {S, A, S}, "P");
        m.observation = flatten(j.at("O"), {S, A, Z}, "O");
        m.reward = flatten(j.at("R"), {S, A}, "R");
        if (j.contains("C"))
            for (const auto& c : j.at("C")) m.costs.push_back(flatten(c, {S, A}, "C"));
        if (j.contains("budgets")) m.budgets = j.at("budgets").get<std::vector<double>>();
        m.gamma = j.at("gamma").get<double>();
        m.initial_belief = j.at("b0").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("instance: ") + e.what());
    }
    m.validate(1e-9);
    return m;
}

void save_instance(const TabularCPOMDP& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << to_json_text(model) << '\n';
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

TabularCPOMDP load_instance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

} // namespace pig::pomdp
