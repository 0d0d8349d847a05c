#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "inertsim/semi_markov.hpp"

namespace inertsim {

inline constexpr const char* library_version = "0.1.0";
inline constexpr int report_schema_version = 1;

enum class ExperimentKind
{
    limit_verification,
    example_a,
    markov_baseline,
    mixed_market,
    renewal_tables,
    fbm_selftest,
    integral_identities,
    key_renewal,
};

std::string to_string(ExperimentKind kind);
/// Accepts the hyphenated names used on the command line ("example-a").
ExperimentKind experiment_kind(const std::string& name);
const std::vector<ExperimentKind>& all_experiment_kinds();

/// One experiment: grids are swept as a Cartesian product where the kind uses
/// them; `params` holds every kind-specific setting with its default filled in.
struct ExperimentSpec
{
    ExperimentKind kind = ExperimentKind::fbm_selftest;
    nlohmann::json model;  ///< preset name or model object
    std::vector<double> epsilons;
    std::vector<std::size_t> agents;
    std::vector<double> alphas;
    std::vector<double> rhos;
    std::size_t replicates = 1;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    std::size_t threads = 1;
    double budget_mb = 1024;
    nlohmann::json params;

    static ExperimentSpec defaults(ExperimentKind kind);
    /// Overlays a config tree on the defaults of `kind`. Unknown keys and
    /// malformed values are reported with their path.
    static ExperimentSpec from_json(ExperimentKind kind, const nlohmann::json& config);
    nlohmann::json to_json() const;
    void validate() const;
};

/// A metric compared with its acceptance band [lo, hi].
struct Verdict
{
    std::string name;
    std::string cell;
    std::string band;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool pass = false;

    nlohmann::json to_json() const;
};

struct Report
{
    ExperimentKind kind = ExperimentKind::fbm_selftest;
    nlohmann::json spec;
    nlohmann::json cells = nlohmann::json::array();
    std::vector<Verdict> verdicts;
    std::vector<std::string> artifacts;  ///< files written next to report.json
    double wall_time_s = 0.0;            ///< provenance only, not reproducible

    bool passed() const;
    nlohmann::json to_json() const;
};

/// Resolves a preset name ("symmetric", "asymmetric", "markov") with tail
/// index `alpha`, a path to a model file ending in .json, or a model object.
/// Models given as files or objects keep their own alpha.
SemiMarkovModel resolve_model(const nlohmann::json& model, double alpha);

/// Runs the experiment, writing CSV artifacts and report.json to out_dir.
Report run(const ExperimentSpec& spec);

}  // namespace inertsim
