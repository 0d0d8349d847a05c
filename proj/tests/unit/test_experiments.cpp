#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "inertsim/experiments.hpp"
#include "inertsim/model_config.hpp"

using namespace inertsim;
using nlohmann::json;

namespace {

std::string temp_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("inertsim_unit_" + name);
    std::filesystem::remove_all(dir);
    return dir.string();
}

std::string error_of(ExperimentKind kind, const json& config)
{
    try {
        ExperimentSpec::from_json(kind, config);
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    return "";
}

json without_wall_time(json r)
{
    r["provenance"].erase("wall_time_s");
    return r;
}

}  // namespace

TEST_CASE("experiment kinds round trip through their names")
{
    CHECK(all_experiment_kinds().size() == 8);
    for (ExperimentKind k : all_experiment_kinds())
        CHECK(experiment_kind(to_string(k)) == k);
    CHECK(to_string(ExperimentKind::example_a) == "example-a");
    CHECK_THROWS_AS(experiment_kind("example_a"), std::invalid_argument);
}

TEST_CASE("config overlay and diagnostics")
{
    const auto d = ExperimentSpec::defaults(ExperimentKind::limit_verification);
    CHECK(d.params.at("steps") == 8192);
    CHECK(d.replicates == 10);
    const auto s = ExperimentSpec::from_json(
        ExperimentKind::limit_verification,
        json{{"epsilons", {1e-3, 1e-4}}, {"seed", 7}, {"params", {{"steps", 4096}}}});
    CHECK(s.epsilons.size() == 2);
    CHECK(s.seed == 7);
    CHECK(s.params.at("steps") == 4096);
    CHECK(s.params.at("model_horizon") == 1e6);
    CHECK(ExperimentSpec::from_json(s.kind, s.to_json()).to_json() == s.to_json());

    CHECK(error_of(ExperimentKind::fbm_selftest, {{"sede", 1}}) == "config.sede: unknown key");
    CHECK(error_of(ExperimentKind::fbm_selftest, {{"params", {{"steps", 1}}}}).starts_with("config.params.steps"));
    CHECK(error_of(ExperimentKind::fbm_selftest, {{"params", {{"max_z", "four"}}}}).starts_with("config.params.max_z"));
    CHECK(error_of(ExperimentKind::fbm_selftest, {{"agents", {10, -1}}}).starts_with("config.agents[1]"));
    CHECK(error_of(ExperimentKind::fbm_selftest, {{"epsilons", json::array()}}).starts_with("config.epsilons"));
    CHECK(error_of(ExperimentKind::fbm_selftest, {{"replicates", 0}}).starts_with("config.replicates"));
    CHECK(error_of(ExperimentKind::fbm_selftest, {{"kind", "key-renewal"}}).starts_with("config.kind"));
    CHECK(error_of(ExperimentKind::fbm_selftest, json::array()) == "config: expected an object");
}

TEST_CASE("model references")
{
    CHECK(resolve_model("asymmetric", 1.4).alpha() == doctest::Approx(1.4));
    CHECK(resolve_model("symmetric", 1.5).alpha() == doctest::Approx(1.5));
    CHECK(resolve_model("markov", 1.5).markov());
    const auto dir = temp_dir("model");
    std::filesystem::create_directories(dir);
    const auto file = dir + "/m.json";
    std::ofstream(file) << model_to_json(presets::asymmetric(1.6)).dump();
    CHECK(resolve_model(file, 1.5).alpha() == doctest::Approx(1.6));
    CHECK_THROWS(resolve_model("nonesuch", 1.5));
}

TEST_CASE("key-renewal run writes a reproducible report")
{
    auto spec = ExperimentSpec::defaults(ExperimentKind::key_renewal);
    spec.params["horizon"] = 2000.0;
    spec.params["ladder"] = {100.0, 500.0, 2000.0};
    spec.params["ratio_band"] = {0.8, 1.2};
    spec.out_dir = temp_dir("key");
    const auto report = run(spec);
    CHECK(report.passed());
    CHECK(report.verdicts.size() == 2);
    CHECK(std::filesystem::exists(spec.out_dir + "/report.json"));
    CHECK(std::filesystem::exists(spec.out_dir + "/key_renewal.csv"));
    const auto j = report.to_json();
    CHECK(j.at("schema_version") == report_schema_version);
    CHECK(j.at("provenance").at("version") == library_version);
    CHECK(without_wall_time(run(spec).to_json()) == without_wall_time(j));

    spec.params["ratio_band"] = {2.0, 3.0};
    CHECK_FALSE(run(spec).passed());
}

TEST_CASE("fbm-selftest is deterministic in its seed")
{
    auto spec = ExperimentSpec::defaults(ExperimentKind::fbm_selftest);
    spec.params["cov_paths"] = 500;
    spec.params["cov_steps"] = 64;
    spec.params["est_seeds"] = 2;
    spec.params["est_steps"] = 4096;
    spec.params["est_hurst"] = {0.7};
    spec.out_dir = temp_dir("fbm");
    const auto a = without_wall_time(run(spec).to_json());
    CHECK(a == without_wall_time(run(spec).to_json()));
    spec.seed = 2;
    CHECK(a.at("cells") != without_wall_time(run(spec).to_json()).at("cells"));
}
