#pragma once

#include <string>

#include <json.hpp>

#include "inertsim/semi_markov.hpp"

namespace inertsim {

/// Builds a model from its JSON description. The schema is documented in
/// docs/config.md. Throws std::invalid_argument naming the offending field.
SemiMarkovModel model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const SemiMarkovModel& model);

/// Reads a JSON file; parse errors carry line and column.
nlohmann::json load_json_file(const std::string& path);

namespace presets {

/// States (-1, 0, 1); active states always return to 0, 0 exits to +1 with
/// probability p_up. Active sojourns are exponential with the given rate, the
/// inactive sojourn is Pareto(1, alpha).
SemiMarkovModel three_state(double alpha, double p_up, double active_rate = 1.0,
                            SlowlyVarying l = SlowlyVarying::constant);

/// The symmetric centred model: p_up = 1/2, alpha = 1.5, mu = 0.
SemiMarkovModel symmetric();

/// The asymmetric model used for the fractional limit: p_up = 0.7.
SemiMarkovModel asymmetric(double alpha = 1.5, double p_up = 0.7);

/// Same chain as asymmetric() with exponential sojourns everywhere; the
/// inactive mean matches Pareto(1, 1.5).
SemiMarkovModel markov_baseline(double p_up = 0.7);

/// Looks up "symmetric", "asymmetric", "markov" by name.
SemiMarkovModel by_name(const std::string& name);

}  // namespace presets

}  // namespace inertsim
