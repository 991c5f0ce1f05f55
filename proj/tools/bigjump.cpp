#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bigjump/bigjump.hpp"

namespace
{
constexpr int exit_pass = 0;
constexpr int exit_error = 1;
constexpr int exit_verdict_failed = 2;

std::string resolve_output_dir(bigjump::ExperimentConfig const& config,
                               std::string const& flag)
{
    if (!flag.empty())
    {
        return flag;
    }
    if (!config.output.dir.empty())
    {
        return config.output.dir;
    }
    if (char const* env = std::getenv("BIGJUMP_OUTPUT_DIR"); env && *env)
    {
        return env;
    }
    return ".";
}

void print_verdicts(bigjump::ExperimentReport const& report)
{
    for (auto const& [name, v] : report.verdicts)
    {
        char const* word = !v ? "n/a " : (*v ? "PASS" : "FAIL");
        std::cout << word << "  " << name << '\n';
    }
}

int run(std::string const& path, std::string const& out_flag, int workers)
{
    auto config = bigjump::load_config(path);
    if (workers > 0)
    {
        config.workers = static_cast<unsigned>(workers);
    }
    bigjump::check_preconditions(config);
    auto report = bigjump::run_experiment(config);
    for (auto const& file : bigjump::emit_report(report, resolve_output_dir(config, out_flag)))
    {
        std::cout << "wrote " << file.string() << '\n';
    }
    print_verdicts(report);
    if (!report.passed())
    {
        std::cerr << "bigjump: verdict failed for scenario '" << config.scenario << "'\n";
        return exit_verdict_failed;
    }
    return exit_pass;
}

int validate(std::string const& path)
{
    auto config = bigjump::load_config(path);
    bigjump::check_preconditions(config);
    std::cout << config.echo().dump(2) << '\n';
    return exit_pass;
}

int list_scenarios()
{
    for (auto const& name : bigjump::scenario_names())
    {
        std::cout << name << "\t" << bigjump::scenario_summary(name) << '\n';
    }
    return exit_pass;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Heavy-tailed maxima: formulas against simulation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", bigjump::library_version);

    std::string config_path;
    std::string out_dir;
    int workers = 0;

    auto* run_cmd = app.add_subcommand("run", "Run a scenario and write its report");
    run_cmd->add_option("config", config_path, "Experiment config (JSON)")->required();
    run_cmd->add_option("-o,--output-dir", out_dir,
                        "Output directory (default: config, then $BIGJUMP_OUTPUT_DIR, then .)");
    run_cmd->add_option("-j,--workers", workers, "Worker threads (0: hardware)");

    auto* validate_cmd
        = app.add_subcommand("validate", "Check a config and print it with defaults resolved");
    validate_cmd->add_option("config", config_path, "Experiment config (JSON)")->required();

    auto* list_cmd = app.add_subcommand("list-scenarios", "List the known scenarios");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int code = app.exit(e);
        return code == 0 ? exit_pass : exit_error;
    }

    try
    {
        if (*run_cmd)
            return run(config_path, out_dir, workers);
        if (*validate_cmd)
            return validate(config_path);
        if (*list_cmd)
            return list_scenarios();
    }
    catch (bigjump::PreconditionViolated const& e)
    {
        std::cerr << "bigjump: precondition failed: " << e.condition() << "\n  " << e.what()
                  << '\n';
        return exit_error;
    }
    catch (std::exception const& e)
    {
        std::cerr << "bigjump: error: " << e.what() << '\n';
        return exit_error;
    }
    return exit_error;
}
