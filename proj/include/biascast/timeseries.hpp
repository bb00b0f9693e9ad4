#pragma once

#include "biascast/common.hpp"
#include "biascast/labels.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace biascast::timeseries {

/// A contiguous per-day sequence for one (platform, leaning, metric) triple.
/// Synthetic series carry no leaning.
struct DailySeries {
    Date start_date{};
    std::vector<double> values;
    Platform platform = Platform::twitter;
    std::optional<Leaning> leaning;
    Metric metric = Metric::synthetic;

    [[nodiscard]] std::size_t size() const { return values.size(); }
    [[nodiscard]] Date date_at(std::size_t i) const {
        return start_date + std::chrono::days{static_cast<long>(i)};
    }
};

/// Throws std::invalid_argument if the series breaks its invariants
/// (empty, non-finite, or negative count/likes values).
void validate(const DailySeries& s);

struct SplitPair {
    DailySeries train;
    DailySeries test;
    double ratio = 0.7;
};

/// First floor(ratio * n) days go to train, the rest to test; no shuffling.
SplitPair chronological_split(const DailySeries& series, double ratio);

/// Min-max scaling state. max == min maps every value to 0.
struct ScalerState {
    double min = 0.0;
    double max = 1.0;

    /// min = 0, max = 1: apply and invert are both the identity.
    static ScalerState identity() { return {0.0, 1.0}; }

    [[nodiscard]] double apply(double x) const;
    [[nodiscard]] double invert(double y) const;
    [[nodiscard]] std::vector<double> apply(std::span<const double> xs) const;
    [[nodiscard]] std::vector<double> invert(std::span<const double> ys) const;
};

ScalerState fit_scaler(std::span<const double> values);

struct WindowPair {
    std::vector<double> input;
    std::vector<double> target;
};

struct WindowSet {
    std::size_t lookback = 1;
    std::size_t horizon = 1;
    std::vector<WindowPair> pairs;
};

/// All maximal contiguous (lookback, horizon) pairs in order. Too short a series
/// yields an empty set.
WindowSet make_windows(std::span<const double> values, std::size_t lookback, std::size_t horizon);

struct Ar1Kind {
    double alpha = 0.0;
    double sigma = 1.0;
};

struct SineKind {
    double period = 10.0;
    double amplitude = 1.0;
    double noise_sigma = 0.0;
};

/// Orders and coefficients for the seasonal simulator; mirrors sarima::SarimaSpec /
/// SarimaParams without depending on that module.
struct SeasonalSarimaKind {
    int p = 0, d = 0, q = 0;
    int P = 0, D = 0, Q = 0, s = 0;
    double c = 0.0;
    std::vector<double> alpha, theta, phi, eta;
    double sigma = 1.0;
};

using SyntheticKind = std::variant<Ar1Kind, SineKind, SeasonalSarimaKind>;

/// Deterministic in (kind, n, seed). Throws std::invalid_argument for invalid
/// parameters (n < 1, period < 2, negative noise, inconsistent orders).
DailySeries generate_synthetic(const SyntheticKind& kind, std::size_t n, std::uint64_t seed,
                               Date start = Date{std::chrono::year{2018} / 1 / 1});

/// `date,value` CSV, one row per day.
std::string to_value_csv(const DailySeries& s);

}  // namespace biascast::timeseries
