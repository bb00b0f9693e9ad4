#pragma once

#include "biascast/common.hpp"
#include "biascast/forecasters.hpp"
#include "biascast/timeseries.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace biascast::eval {

/// sqrt(mean((p - y)^2)). Throws std::invalid_argument on empty or mismatched input.
double rmse(std::span<const double> predicted, std::span<const double> truth);

struct EvalRow {
    std::string model;
    std::string leaning;
    std::string metric;
    std::optional<double> train_rmse;
    double test_rmse = 0.0;
    std::optional<std::array<double, 5>> per_step;  // multistep only, t+1..t+5

    bool operator==(const EvalRow&) const = default;
};

/// Scores a forecaster on the split it was fit on, on the original scale.
///
/// One-step kinds: test RMSE is rolling-origin, each prediction conditioned on
/// train plus the true test values before it; train RMSE is the in-sample
/// one-step error over every train position with a full lookback (SARIMA uses
/// its CSS residuals). Multistep: 14 -> 5 windows slide across each half;
/// per_step holds the k-th step RMSE over test windows and train/test RMSE pool
/// all steps. Throws std::invalid_argument when the test half is shorter than
/// lookback + horizon.
EvalRow evaluate(const forecasters::TrainedForecaster& model, const timeseries::SplitPair& split);

/// Next-day prediction for every test day, conditioned on train plus the true
/// test values before it. Multistep models contribute their t+1 output.
std::vector<double> rolling_predictions(const forecasters::TrainedForecaster& model, const timeseries::SplitPair& split);

/// Leaning label used in reports; series without one are "synthetic".
std::string leaning_label(const timeseries::DailySeries& s);

/// `model,leaning,metric,train_rmse,test_rmse,step1,...,step5`, two decimals, absent values empty.
std::string render_csv(std::span<const EvalRow> rows);
/// Column-aligned plain text version of the same table.
std::string render_text(std::span<const EvalRow> rows);
/// Inverse of render_csv. Throws std::invalid_argument on a malformed table.
std::vector<EvalRow> parse_csv(std::string_view text);

/// Values as they appear after a render_csv / parse_csv round trip.
EvalRow quantized(EvalRow row);

struct PlotSeries {
    std::string label;
    Date start{};
    std::vector<double> values;
};

/// Deterministic SVG 1.1 line chart: date x-axis, one polyline per series,
/// one legend entry per series. Throws std::invalid_argument with no series
/// or an empty one.
std::string render_svg(std::span<const PlotSeries> series, std::string_view title);

}  // namespace biascast::eval
