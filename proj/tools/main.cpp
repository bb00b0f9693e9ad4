#include "biascast/cli.hpp"
#include "biascast/presets.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace biascast;

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> preset;
    std::string format = "text";
    std::string report_path;
};

cli::RunConfig load(const Options& o) {
    auto c = cli::load_run_config(o.config);
    if (o.seed) c.seed = *o.seed;
    if (o.out) c.out_dir = *o.out;
    if (o.preset) {
        forecasters::preset(*o.preset);
        c.preset = *o.preset;
    }
    return c;
}

int finish(const cli::CommandResult& r, const std::string& out_dir) {
    cli::write_outputs(r.files, out_dir);
    for (const auto& [name, content] : r.files) std::cout << "wrote " << (std::filesystem::path(out_dir) / name).string() << "\n";
    for (const auto& f : r.failures) std::cerr << "failed: " << f << "\n";
    return r.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Daily political-leaning series and forecasters"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON run config")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "Global seed (overrides the config)");
        sub->add_option("--out", o.out, "Output directory (overrides the config)");
        sub->add_option("--preset", o.preset, "Named hyperparameter preset");
    };
    auto* ingest = app.add_subcommand("ingest", "Build daily per-leaning series and a summary");
    auto* run = app.add_subcommand("run", "Fit, evaluate, and report every requested forecaster");
    auto* grid = app.add_subcommand("gridsearch", "SARIMA order search per series");
    auto* simulate = app.add_subcommand("simulate", "Write the configured synthetic series");
    for (auto* sub : {ingest, run, grid, simulate}) add_common(sub);

    auto* report = app.add_subcommand("report", "Re-render a report CSV");
    report->add_option("report", o.report_path, "report.csv from a run")->required()->check(CLI::ExistingFile);
    report->add_option("--format", o.format, "csv or text")->check(CLI::IsMember({"csv", "text"}));
    report->add_option("--out", o.out, "Write report.<csv|txt> here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (report->parsed()) {
            const auto format = o.format == "csv" ? cli::ReportFormat::csv : cli::ReportFormat::text;
            const auto text = cli::cmd_report(read_text_file(o.report_path), format);
            if (o.out) {
                cli::write_outputs({{o.format == "csv" ? "report.csv" : "report.txt", text}}, *o.out);
            } else {
                std::cout << text;
            }
            return 0;
        }
        const auto config = load(o);
        if (ingest->parsed()) return finish(cli::cmd_ingest(config), config.out_dir);
        if (run->parsed()) return finish(cli::cmd_run(config), config.out_dir);
        if (grid->parsed()) return finish(cli::cmd_gridsearch(config), config.out_dir);
        return finish(cli::cmd_simulate(config), config.out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
