// mmenc: stage-by-stage command line for the encoding-comparison engine.
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mmenc/config.hpp"
#include "mmenc/error.hpp"
#include "mmenc/pipeline.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Model-to-brain encoding comparison engine"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_file;
    app.add_option("--config", config_file, "JSON run configuration")->check(CLI::ExistingFile);

    std::map<std::string, std::string> flag_values;
    for (const auto& key : mmenc::config_keys())
        app.add_option("--" + key.name, flag_values[key.name], fmt::format("{} [{}]", key.help, key.type));

    struct Stage
    {
        const char* name;
        const char* help;
    };
    const Stage stages[] = {
        {"ingest", "window responses, validate and project features"},
        {"regress", "cross-validated ridge over every model and layer"},
        {"bootstrap", "event-structure bootstrap confidence intervals"},
        {"compare", "per-electrode model comparisons with FDR"},
        {"tests", "the five multimodality tests"},
        {"report", "test table, region summary and run manifest"},
        {"synth", "generate a synthetic dataset with planted ground truth"},
        {"selfcheck", "analytic oracles for ridge, Pearson, BH and JL"},
        {"run", "ingest through report in one go"},
    };
    for (const auto& s : stages) app.add_subcommand(s.name, s.help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        if (command == "selfcheck") return mmenc::selfcheck(std::cout) ? 0 : 3;

        std::map<std::string, std::string> overrides;
        for (const auto& key : mmenc::config_keys())
            if (app.count("--" + key.name) > 0) overrides[key.name] = flag_values[key.name];
        const auto config = mmenc::load_config(
            config_file.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_file), overrides);
        config.require_seed();

        if (command == "ingest") mmenc::stage_ingest(config);
        else if (command == "regress") mmenc::stage_regress(config);
        else if (command == "bootstrap") mmenc::stage_bootstrap(config);
        else if (command == "compare") mmenc::stage_compare(config);
        else if (command == "tests") mmenc::stage_tests(config);
        else if (command == "report") mmenc::stage_report(config);
        else if (command == "synth") mmenc::stage_synth(config);
        else if (command == "run") mmenc::run_all(config);
        return 0;
    } catch (const mmenc::Error& e) {
        std::cerr << "mmenc " << command << ": " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "mmenc " << command << ": data error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "mmenc " << command << ": " << e.what() << '\n';
        return 2;
    }
}
