#include "biascast/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace biascast::timeseries {

void validate(const DailySeries& s) {
    if (s.values.empty()) {
        throw std::invalid_argument("daily series is empty");
    }
    const bool nonneg = s.metric == Metric::post_count || s.metric == Metric::likes_sum;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        const double v = s.values[i];
        if (!std::isfinite(v)) {
            throw std::invalid_argument("non-finite value at index " + std::to_string(i));
        }
        if (nonneg && v < 0.0) {
            throw std::invalid_argument("negative count at index " + std::to_string(i));
        }
    }
}

SplitPair chronological_split(const DailySeries& series, double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw std::invalid_argument("split ratio must lie in (0, 1)");
    }
    const std::size_t n = series.values.size();
    const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
    if (n < 2 || n_train == 0 || n_train == n) {
        throw std::invalid_argument("series of length " + std::to_string(n) +
                                    " is too short to split into non-empty train and test");
    }
    SplitPair out;
    out.ratio = ratio;
    out.train = series;
    out.train.values.assign(series.values.begin(), series.values.begin() + static_cast<long>(n_train));
    out.test = series;
    out.test.values.assign(series.values.begin() + static_cast<long>(n_train), series.values.end());
    out.test.start_date = series.date_at(n_train);
    return out;
}

double ScalerState::apply(double x) const {
    if (max == min) {
        return 0.0;
    }
    return (x - min) / (max - min);
}

double ScalerState::invert(double y) const {
    if (max == min) {
        return min;
    }
    return y * (max - min) + min;
}

std::vector<double> ScalerState::apply(std::span<const double> xs) const {
    std::vector<double> out(xs.size());
    std::transform(xs.begin(), xs.end(), out.begin(), [this](double x) { return apply(x); });
    return out;
}

std::vector<double> ScalerState::invert(std::span<const double> ys) const {
    std::vector<double> out(ys.size());
    std::transform(ys.begin(), ys.end(), out.begin(), [this](double y) { return invert(y); });
    return out;
}

ScalerState fit_scaler(std::span<const double> values) {
    if (values.empty()) {
        throw std::invalid_argument("cannot fit a scaler on an empty series");
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return {*lo, *hi};
}

WindowSet make_windows(std::span<const double> values, std::size_t lookback, std::size_t horizon) {
    if (lookback < 1 || horizon < 1) {
        throw std::invalid_argument("lookback and horizon must be >= 1");
    }
    WindowSet ws;
    ws.lookback = lookback;
    ws.horizon = horizon;
    const std::size_t n = values.size();
    if (n < lookback + horizon) {
        return ws;
    }
    const std::size_t count = n - lookback - horizon + 1;
    ws.pairs.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        WindowPair p;
        p.input.assign(values.begin() + static_cast<long>(i), values.begin() + static_cast<long>(i + lookback));
        p.target.assign(values.begin() + static_cast<long>(i + lookback),
                        values.begin() + static_cast<long>(i + lookback + horizon));
        ws.pairs.push_back(std::move(p));
    }
    return ws;
}

namespace {

std::vector<double> simulate_ar1(const Ar1Kind& k, std::size_t n, Rng& rng) {
    if (!(k.sigma >= 0.0) || !std::isfinite(k.alpha)) {
        throw std::invalid_argument("ar1 requires finite alpha and sigma >= 0");
    }
    std::vector<double> y(n);
    double prev = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        prev = k.alpha * prev + rng.normal(0.0, k.sigma);
        y[t] = prev;
    }
    return y;
}

std::vector<double> simulate_sine(const SineKind& k, std::size_t n, Rng& rng) {
    if (!(k.period >= 2.0)) {
        throw std::invalid_argument("sine period must be >= 2");
    }
    if (!(k.noise_sigma >= 0.0)) {
        throw std::invalid_argument("sine noise sigma must be >= 0");
    }
    std::vector<double> y(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(t) / k.period;
        y[t] = k.amplitude * std::sin(phase);
        if (k.noise_sigma > 0.0) {
            y[t] += rng.normal(0.0, k.noise_sigma);
        }
    }
    return y;
}

// Runs the additive seasonal recursion y_t = c + sum alpha y_{t-n} + sum theta e_{t-n}
// + sum phi y_{t-sn} + sum eta e_{t-sn} + e_t with zero pre-sample values, then
// integrates the seasonal and ordinary differences back out (zero initial levels).
std::vector<double> simulate_seasonal(const SeasonalSarimaKind& k, std::size_t n, Rng& rng) {
    if (k.p < 0 || k.d < 0 || k.q < 0 || k.P < 0 || k.D < 0 || k.Q < 0 || k.s < 0) {
        throw std::invalid_argument("seasonal_sarima orders must be nonnegative");
    }
    if ((k.P > 0 || k.D > 0 || k.Q > 0) && k.s < 2) {
        throw std::invalid_argument("seasonal_sarima period must be >= 2 when seasonal orders are set");
    }
    if (k.alpha.size() != static_cast<std::size_t>(k.p) || k.theta.size() != static_cast<std::size_t>(k.q) ||
        k.phi.size() != static_cast<std::size_t>(k.P) || k.eta.size() != static_cast<std::size_t>(k.Q)) {
        throw std::invalid_argument("seasonal_sarima coefficient counts must match the orders");
    }
    if (!(k.sigma >= 0.0)) {
        throw std::invalid_argument("seasonal_sarima sigma must be >= 0");
    }
    std::vector<double> w(n, 0.0);
    std::vector<double> e(n, 0.0);
    auto at = [](const std::vector<double>& v, long i) { return i >= 0 ? v[static_cast<std::size_t>(i)] : 0.0; };
    for (std::size_t t = 0; t < n; ++t) {
        const long ti = static_cast<long>(t);
        double y = k.c;
        for (int j = 1; j <= k.p; ++j) y += k.alpha[j - 1] * at(w, ti - j);
        for (int j = 1; j <= k.q; ++j) y += k.theta[j - 1] * at(e, ti - j);
        for (int j = 1; j <= k.P; ++j) y += k.phi[j - 1] * at(w, ti - static_cast<long>(k.s) * j);
        for (int j = 1; j <= k.Q; ++j) y += k.eta[j - 1] * at(e, ti - static_cast<long>(k.s) * j);
        e[t] = rng.normal(0.0, k.sigma);
        w[t] = y + e[t];
    }
    auto integrate = [&](std::size_t lag) {
        for (std::size_t t = lag; t < n; ++t) {
            w[t] += w[t - lag];
        }
    };
    for (int i = 0; i < k.D; ++i) integrate(static_cast<std::size_t>(k.s));
    for (int i = 0; i < k.d; ++i) integrate(1);
    return w;
}

}  // namespace

DailySeries generate_synthetic(const SyntheticKind& kind, std::size_t n, std::uint64_t seed, Date start) {
    if (n < 1) {
        throw std::invalid_argument("synthetic series length must be >= 1");
    }
    Rng rng(seed);
    DailySeries out;
    out.start_date = start;
    out.metric = Metric::synthetic;
    out.values = std::visit(
        [&](const auto& k) -> std::vector<double> {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Ar1Kind>) {
                return simulate_ar1(k, n, rng);
            } else if constexpr (std::is_same_v<K, SineKind>) {
                return simulate_sine(k, n, rng);
            } else {
                return simulate_seasonal(k, n, rng);
            }
        },
        kind);
    return out;
}

std::string to_value_csv(const DailySeries& s) {
    std::ostringstream out;
    out << "date,value\n";
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        out << format_date(s.date_at(i)) << ',' << format_double(s.values[i]) << '\n';
    }
    return out.str();
}

}  // namespace biascast::timeseries
