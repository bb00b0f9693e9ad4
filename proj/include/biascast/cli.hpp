#pragma once

#include "biascast/common.hpp"
#include "biascast/forecasters.hpp"
#include "biascast/labels.hpp"
#include "biascast/timeseries.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace biascast::cli {

struct SyntheticSpec {
    timeseries::SyntheticKind generator = timeseries::SineKind{};
    std::size_t n = 120;
    std::optional<std::uint64_t> seed;  // defaults to derive_seed(run seed, "synthetic")
    Date start = Date{std::chrono::year{2018} / 1 / 1};
};

/// One requested forecaster kind. Explicit spec/grid and network overrides
/// take precedence over the preset.
struct ForecasterRequest {
    forecasters::Kind kind = forecasters::Kind::sarima;
    std::optional<std::string> preset;
    std::optional<sarima::SarimaSpec> spec;
    std::optional<sarima::GridSpec> grid;
    nlohmann::json network = nlohmann::json::object();
};

struct RunConfig {
    std::optional<std::string> posts_path;
    std::optional<std::string> bias_path;
    std::optional<SyntheticSpec> synthetic;
    DateWindow window = default_window();
    Platform platform = Platform::twitter;
    std::vector<Metric> metrics{Metric::post_count, Metric::likes_sum};
    std::vector<Leaning> leanings{kAllLeanings.begin(), kAllLeanings.end()};
    std::optional<std::string> preset;
    std::vector<ForecasterRequest> forecasters;
    double split = 0.7;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
};

/// Unknown keys are rejected at every level. Relative input paths and the
/// output directory resolve against `base_dir`. Throws std::invalid_argument.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::string& path);

/// Output files keyed by path relative to the output directory.
using FileSet = std::map<std::string, std::string>;

struct CommandResult {
    FileSet files;
    std::vector<std::string> failures;

    [[nodiscard]] int exit_code() const { return failures.empty() ? 0 : 1; }
};

/// Series the config describes: the synthetic series, or one per (metric,
/// leaning) built from the posts of the configured platform.
std::vector<timeseries::DailySeries> load_series(const RunConfig& config);

/// Fully resolved forecaster config for one series, seeds included.
forecasters::ForecasterConfig resolve(const RunConfig& config, const ForecasterRequest& request,
                                      const timeseries::DailySeries& series);

/// Each command computes its whole output in memory and throws before anything
/// is written; only fit failures in run/gridsearch are reported per entry.
CommandResult cmd_ingest(const RunConfig& config);
CommandResult cmd_run(const RunConfig& config);
CommandResult cmd_gridsearch(const RunConfig& config);
CommandResult cmd_simulate(const RunConfig& config);

enum class ReportFormat { csv, text };
/// Re-renders a report CSV.
std::string cmd_report(std::string_view report_csv, ReportFormat format);

/// `date,value` table for a single series.
std::string series_values_csv(const timeseries::DailySeries& s);

void write_outputs(const FileSet& files, const std::filesystem::path& out_dir);

}  // namespace biascast::cli
