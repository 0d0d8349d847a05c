#include "inertsim/model_config.hpp"

#include <fstream>
#include <sstream>

namespace inertsim {
namespace {

using nlohmann::json;

const json& field(const json& j, const std::string& key, const std::string& where)
{
    if (!j.is_object() || !j.contains(key))
        throw std::invalid_argument(where + ": missing field \"" + key + "\"");
    return j.at(key);
}

double number(const json& j, const std::string& where)
{
    if (!j.is_number())
        throw std::invalid_argument(where + ": expected a number, got " + j.dump());
    return j.get<double>();
}

SlowlyVarying parse_l(const json& j)
{
    if (!j.contains("slowly_varying"))
        return SlowlyVarying::constant;
    const auto& v = j.at("slowly_varying");
    if (v == "constant")
        return SlowlyVarying::constant;
    if (v == "log" || v == "logarithmic")
        return SlowlyVarying::logarithmic;
    throw std::invalid_argument("model.slowly_varying: expected \"constant\" or \"log\", got "
                                + v.dump());
}

}  // namespace

SemiMarkovModel model_from_json(const json& j)
{
    const auto& states_j = field(j, "states", "model");
    if (!states_j.is_array())
        throw std::invalid_argument("model.states: expected an array of integers");
    std::vector<int> states;
    for (std::size_t k = 0; k < states_j.size(); ++k) {
        if (!states_j[k].is_number_integer())
            throw std::invalid_argument("model.states[" + std::to_string(k)
                                        + "]: expected an integer");
        states.push_back(states_j[k].get<int>());
    }
    StateSpace space(states);
    const std::size_t n = space.size();

    const auto& p_j = field(j, "transition", "model");
    if (!p_j.is_array() || p_j.size() != n)
        throw std::invalid_argument("model.transition: expected " + std::to_string(n) + " rows");
    Eigen::MatrixXd p(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        const std::string where = "model.transition[" + std::to_string(r) + "]";
        if (!p_j[r].is_array() || p_j[r].size() != n)
            throw std::invalid_argument(where + ": expected " + std::to_string(n) + " entries");
        for (std::size_t c = 0; c < n; ++c)
            p(r, c) = number(p_j[r][c], where + "[" + std::to_string(c) + "]");
    }

    const double alpha = number(field(j, "alpha", "model"), "model.alpha");
    const SlowlyVarying l = parse_l(j);

    // Pareto laws inherit the model's slowly varying choice unless they set one.
    const auto law = [&](const json& lj, const std::string& where) {
        json copy = lj;
        if (copy.is_object() && copy.value("family", "") == "pareto" && !copy.contains("slowly_varying")
            && l == SlowlyVarying::logarithmic)
            copy["slowly_varying"] = "log";
        return SojournLaw::from_json(copy, where);
    };

    const auto& s_j = field(j, "sojourns", "model");
    if (s_j.contains("by_state") == s_j.contains("by_edge"))
        throw std::invalid_argument("model.sojourns: give exactly one of \"by_state\" or \"by_edge\"");
    if (s_j.contains("by_state")) {
        const auto& b = s_j.at("by_state");
        if (!b.is_array() || b.size() != n)
            throw std::invalid_argument("model.sojourns.by_state: expected " + std::to_string(n)
                                        + " laws");
        std::vector<SojournLaw> laws;
        for (std::size_t i = 0; i < n; ++i)
            laws.push_back(law(b[i], "model.sojourns.by_state[" + std::to_string(i) + "]"));
        return SemiMarkovModel(space, TransitionMatrix(p), SojournFamily::by_state(laws), alpha, l);
    }
    const auto& b = s_j.at("by_edge");
    if (!b.is_array() || b.size() != n)
        throw std::invalid_argument("model.sojourns.by_edge: expected " + std::to_string(n) + " rows");
    std::vector<SojournLaw> laws;
    for (std::size_t i = 0; i < n; ++i) {
        if (!b[i].is_array() || b[i].size() != n)
            throw std::invalid_argument("model.sojourns.by_edge[" + std::to_string(i)
                                        + "]: expected " + std::to_string(n) + " laws");
        for (std::size_t k = 0; k < n; ++k)
            laws.push_back(law(b[i][k], "model.sojourns.by_edge[" + std::to_string(i) + "]["
                                            + std::to_string(k) + "]"));
    }
    return SemiMarkovModel(space, TransitionMatrix(p), SojournFamily::by_edge(n, laws), alpha, l);
}

json model_to_json(const SemiMarkovModel& model)
{
    const std::size_t n = model.size();
    json j;
    j["states"] = model.space().states();
    json rows = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        json row = json::array();
        for (std::size_t k = 0; k < n; ++k)
            row.push_back(model.chain()(i, k));
        rows.push_back(row);
    }
    j["transition"] = rows;
    j["alpha"] = model.alpha();
    j["slowly_varying"] = model.slowly_varying_kind() == SlowlyVarying::logarithmic ? "log" : "constant";
    if (!model.sojourns().edge_dependent()) {
        json laws = json::array();
        for (std::size_t i = 0; i < n; ++i)
            laws.push_back(model.sojourns().law(i, 0).to_json());
        j["sojourns"] = {{"by_state", laws}};
    } else {
        json laws = json::array();
        for (std::size_t i = 0; i < n; ++i) {
            json row = json::array();
            for (std::size_t k = 0; k < n; ++k)
                row.push_back(model.sojourns().law(i, k).to_json());
            laws.push_back(row);
        }
        j["sojourns"] = {{"by_edge", laws}};
    }
    return j;
}

json load_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

namespace presets {

SemiMarkovModel three_state(double alpha, double p_up, double active_rate, SlowlyVarying l)
{
    Eigen::MatrixXd p(3, 3);
    p << 0.0, 1.0, 0.0,
         1.0 - p_up, 0.0, p_up,
         0.0, 1.0, 0.0;
    std::vector<SojournLaw> laws{SojournLaw::exponential(active_rate),
                                 SojournLaw::pareto(1.0, alpha, l),
                                 SojournLaw::exponential(active_rate)};
    return SemiMarkovModel(StateSpace({-1, 0, 1}), TransitionMatrix(p),
                           SojournFamily::by_state(std::move(laws)), alpha, l);
}

SemiMarkovModel symmetric() { return three_state(1.5, 0.5); }

SemiMarkovModel asymmetric(double alpha, double p_up) { return three_state(alpha, p_up); }

SemiMarkovModel markov_baseline(double p_up)
{
    Eigen::MatrixXd p(3, 3);
    p << 0.0, 1.0, 0.0,
         1.0 - p_up, 0.0, p_up,
         0.0, 1.0, 0.0;
    std::vector<SojournLaw> laws{SojournLaw::exponential(1.0), SojournLaw::exponential(1.0 / 3.0),
                                 SojournLaw::exponential(1.0)};
    return SemiMarkovModel(StateSpace({-1, 0, 1}), TransitionMatrix(p),
                           SojournFamily::by_state(std::move(laws)), 1.5);
}

SemiMarkovModel by_name(const std::string& name)
{
    if (name == "symmetric")
        return symmetric();
    if (name == "asymmetric")
        return asymmetric();
    if (name == "markov")
        return markov_baseline();
    throw std::invalid_argument("unknown preset model \"" + name
                                + "\" (expected symmetric, asymmetric or markov)");
}

}  // namespace presets

}  // namespace inertsim
