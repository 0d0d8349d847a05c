#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "inertsim/experiments.hpp"
#include "inertsim/market.hpp"
#include "inertsim/model_config.hpp"

namespace {

using inertsim::ExperimentKind;
using nlohmann::json;

struct Options
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> threads;
    std::optional<double> budget_mb;
    std::optional<std::size_t> replicates;
    bool print_config = false;
};

// Model files named in a config are resolved against the config's directory.
void rebase_model_path(json& config, const std::filesystem::path& dir)
{
    if (!config.contains("model") || !config["model"].is_string())
        return;
    const std::filesystem::path model = config["model"].get<std::string>();
    if (model.extension() == ".json" && model.is_relative())
        config["model"] = (dir / model).lexically_normal().string();
}

int run_kind(ExperimentKind kind, const Options& opt)
{
    json config = json::object();
    if (!opt.config.empty()) {
        config = inertsim::load_json_file(opt.config);
        if (config.is_object())
            rebase_model_path(config, std::filesystem::path(opt.config).parent_path());
    }
    auto spec = inertsim::ExperimentSpec::from_json(kind, config);
    if (opt.seed)
        spec.seed = *opt.seed;
    if (opt.out)
        spec.out_dir = *opt.out;
    if (opt.threads)
        spec.threads = *opt.threads;
    if (opt.budget_mb)
        spec.budget_mb = *opt.budget_mb;
    if (opt.replicates)
        spec.replicates = *opt.replicates;
    spec.validate();
    if (opt.print_config) {
        std::cout << spec.to_json().dump(2) << '\n';
        return EXIT_SUCCESS;
    }

    const std::time_t now = std::time(nullptr);
    std::cerr << "# inertsim " << inertsim::library_version << " report schema " << inertsim::report_schema_version
              << "\n# experiment " << to_string(kind) << " seed " << spec.seed << " threads " << spec.threads
              << " budget " << spec.budget_mb << " MB"
              << "\n# config " << (opt.config.empty() ? "(defaults)" : opt.config) << " out " << spec.out_dir
              << "\n# started " << std::asctime(std::gmtime(&now));

    const auto report = inertsim::run(spec);
    for (const auto& v : report.verdicts)
        std::cerr << (v.pass ? "PASS " : "FAIL ") << v.name << " [" << v.cell << "] value " << v.value << " band "
                  << v.band << '\n';
    std::cerr << "# wall time " << report.wall_time_s << " s, report " << spec.out_dir << "/report.json\n";
    return report.passed() ? EXIT_SUCCESS : EXIT_FAILURE;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Inert-investor market experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(inertsim::library_version));
    Options opt;
    std::optional<ExperimentKind> chosen;
    for (ExperimentKind kind : inertsim::all_experiment_kinds()) {
        auto* sub = app.add_subcommand(to_string(kind), "Run the " + to_string(kind) + " experiment");
        sub->add_option("--config", opt.config, "JSON config overlaid on the defaults")->check(CLI::ExistingFile);
        sub->add_option("--seed", opt.seed, "Master seed");
        sub->add_option("--out", opt.out, "Output directory");
        sub->add_option("--threads", opt.threads, "Worker threads (0 = hardware concurrency)");
        sub->add_option("--budget-mb", opt.budget_mb, "Memory budget in MB")->check(CLI::PositiveNumber);
        sub->add_option("--replicates", opt.replicates, "Replicate count")->check(CLI::PositiveNumber);
        sub->add_flag("--print-config", opt.print_config, "Print the effective config and exit");
        sub->callback([&chosen, kind] { chosen = kind; });
    }
    CLI11_PARSE(app, argc, argv);
    try {
        return run_kind(*chosen, opt);
    } catch (const inertsim::BudgetExceeded& e) {
        std::cerr << "error: budget exceeded: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
