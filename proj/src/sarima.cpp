#include "biascast/sarima.hpp"

#include "biascast/common.hpp"
#include "biascast/simplex.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace biascast::sarima {

void SarimaSpec::validate() const {
    if (p < 0 || d < 0 || q < 0 || P < 0 || D < 0 || Q < 0 || s < 0) {
        throw std::invalid_argument("SARIMA orders must be nonnegative: " + to_string());
    }
    if ((P > 0 || D > 0 || Q > 0) && s < 2) {
        throw std::invalid_argument("seasonal orders require a period s >= 2: " + to_string());
    }
}

std::string SarimaSpec::to_string() const {
    std::ostringstream out;
    out << '(' << p << ',' << d << ',' << q << ")(" << P << ',' << D << ',' << Q << ',' << s << ')';
    return out.str();
}

SarimaParams SarimaParams::zeros(const SarimaSpec& spec) {
    SarimaParams out;
    out.alpha.assign(static_cast<std::size_t>(spec.p), 0.0);
    out.theta.assign(static_cast<std::size_t>(spec.q), 0.0);
    out.phi.assign(static_cast<std::size_t>(spec.P), 0.0);
    out.eta.assign(static_cast<std::size_t>(spec.Q), 0.0);
    return out;
}

void SarimaParams::check_against(const SarimaSpec& spec) const {
    if (alpha.size() != static_cast<std::size_t>(spec.p) || theta.size() != static_cast<std::size_t>(spec.q) ||
        phi.size() != static_cast<std::size_t>(spec.P) || eta.size() != static_cast<std::size_t>(spec.Q)) {
        throw std::invalid_argument("coefficient counts do not match spec " + spec.to_string());
    }
    if (!(sigma2 >= 0.0)) {
        throw std::invalid_argument("sigma2 must be >= 0");
    }
}

// ---------------------------------------------------------------------------
// Differencing

namespace {

std::vector<std::size_t> stage_lags(int d, int D, int s) {
    if (d < 0 || D < 0) {
        throw std::invalid_argument("differencing orders must be nonnegative");
    }
    if (D > 0 && s < 1) {
        throw std::invalid_argument("seasonal differencing requires s >= 1");
    }
    std::vector<std::size_t> lags(static_cast<std::size_t>(d), 1);
    lags.insert(lags.end(), static_cast<std::size_t>(D), static_cast<std::size_t>(s));
    return lags;
}

std::vector<double> lag_difference(std::span<const double> x, std::size_t lag) {
    std::vector<double> out(x.size() - lag);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = x[i + lag] - x[i];
    }
    return out;
}

}  // namespace

Differenced difference(std::span<const double> values, int d, int D, int s) {
    const auto lags = stage_lags(d, D, s);
    std::size_t loss = 0;
    for (const auto lag : lags) loss += lag;
    if (values.size() <= loss) {
        throw std::invalid_argument("series of length " + std::to_string(values.size()) +
                                    " is too short for differencing that consumes " + std::to_string(loss) +
                                    " values");
    }
    Differenced out;
    std::vector<double> cur(values.begin(), values.end());
    for (const auto lag : lags) {
        out.context.stages.push_back({lag, std::vector<double>(cur.begin(), cur.begin() + static_cast<long>(lag))});
        cur = lag_difference(cur, lag);
    }
    out.values = std::move(cur);
    return out;
}

std::vector<double> invert(std::span<const double> differenced, const DifferenceContext& context) {
    std::vector<double> cur(differenced.begin(), differenced.end());
    for (auto it = context.stages.rbegin(); it != context.stages.rend(); ++it) {
        const std::size_t lag = it->lag;
        if (it->prefix.size() != lag) {
            throw std::invalid_argument("corrupt differencing context");
        }
        std::vector<double> level(cur.size() + lag);
        std::copy(it->prefix.begin(), it->prefix.end(), level.begin());
        for (std::size_t i = 0; i < cur.size(); ++i) {
            level[i + lag] = cur[i] + level[i];
        }
        cur = std::move(level);
    }
    return cur;
}

std::vector<double> integrate_forecast(std::span<const double> history, std::span<const double> differenced_forecast,
                                       int d, int D, int s) {
    const auto lags = stage_lags(d, D, s);
    // levels[k] is the history after k differencing stages
    std::vector<std::vector<double>> levels;
    levels.emplace_back(history.begin(), history.end());
    for (const auto lag : lags) {
        if (levels.back().size() < lag) {
            throw std::invalid_argument("history too short to integrate forecasts");
        }
        levels.push_back(lag_difference(levels.back(), lag));
    }
    std::vector<double> next(differenced_forecast.begin(), differenced_forecast.end());
    for (std::size_t k = lags.size(); k-- > 0;) {
        const std::size_t lag = lags[k];
        std::vector<double> ext = levels[k];
        const std::size_t base = ext.size();
        for (std::size_t j = 0; j < next.size(); ++j) {
            ext.push_back(next[j] + ext[base + j - lag]);
        }
        next.assign(ext.begin() + static_cast<long>(base), ext.end());
    }
    return next;
}

// ---------------------------------------------------------------------------
// CSS residuals

namespace {

// Fills `e` (length n, zero before burn-in) and returns the SSE over the evaluated range.
double residual_recursion(std::span<const double> w, const SarimaSpec& spec, double c, std::span<const double> alpha,
                          std::span<const double> theta, std::span<const double> phi, std::span<const double> eta,
                          std::vector<double>& e) {
    const std::size_t n = w.size();
    const auto b = static_cast<std::size_t>(spec.burn_in());
    const auto s = static_cast<std::size_t>(spec.s);
    e.assign(n, 0.0);
    double sse = 0.0;
    for (std::size_t t = b; t < n; ++t) {
        double pred = c;
        for (std::size_t j = 1; j <= alpha.size(); ++j) pred += alpha[j - 1] * w[t - j];
        for (std::size_t j = 1; j <= theta.size() && j <= t; ++j) pred += theta[j - 1] * e[t - j];
        for (std::size_t j = 1; j <= phi.size(); ++j) pred += phi[j - 1] * w[t - s * j];
        for (std::size_t j = 1; j <= eta.size() && s * j <= t; ++j) pred += eta[j - 1] * e[t - s * j];
        e[t] = w[t] - pred;
        sse += e[t] * e[t];
    }
    return sse;
}

double residual_recursion(std::span<const double> w, const SarimaSpec& spec, const SarimaParams& p,
                          std::vector<double>& e) {
    return residual_recursion(w, spec, p.c, p.alpha, p.theta, p.phi, p.eta, e);
}

void require_evaluable(std::size_t n, const SarimaSpec& spec) {
    if (n < static_cast<std::size_t>(spec.burn_in()) + 1) {
        throw std::invalid_argument("differenced series of length " + std::to_string(n) + " is shorter than burn-in " +
                                    std::to_string(spec.burn_in()) + " + 1 for " + spec.to_string());
    }
}

}  // namespace

Residuals css_residuals(std::span<const double> differenced, const SarimaSpec& spec, const SarimaParams& params) {
    spec.validate();
    params.check_against(spec);
    require_evaluable(differenced.size(), spec);
    std::vector<double> e;
    Residuals out;
    out.sse = residual_recursion(differenced, spec, params, e);
    out.residuals.assign(e.begin() + spec.burn_in(), e.end());
    return out;
}

// ---------------------------------------------------------------------------
// Fitting

bool ma_invertible(std::span<const double> coefficients) {
    // step-down (reverse Levinson) recursion; every reflection coefficient must lie inside (-1, 1)
    std::vector<double> a(coefficients.begin(), coefficients.end());
    while (!a.empty()) {
        const std::size_t m = a.size();
        const double k = a.back();
        if (!(std::abs(k) < 1.0)) {
            return false;
        }
        std::vector<double> next(m - 1);
        for (std::size_t j = 0; j + 1 < m; ++j) next[j] = (a[j] - k * a[m - 2 - j]) / (1.0 - k * k);
        a = std::move(next);
    }
    return true;
}

std::size_t minimum_fit_length(const SarimaSpec& spec) {
    return static_cast<std::size_t>(spec.differencing_loss() + 10 + spec.p + spec.q + spec.s * (spec.P + spec.Q));
}

namespace {

struct ParamLayout {
    std::size_t p, q, P, Q;

    [[nodiscard]] std::size_t size() const { return 1 + p + q + P + Q; }

    [[nodiscard]] SarimaParams unpack(std::span<const double> x) const {
        SarimaParams out;
        out.c = x[0];
        std::size_t k = 1;
        out.alpha.assign(x.begin() + static_cast<long>(k), x.begin() + static_cast<long>(k + p));
        k += p;
        out.theta.assign(x.begin() + static_cast<long>(k), x.begin() + static_cast<long>(k + q));
        k += q;
        out.phi.assign(x.begin() + static_cast<long>(k), x.begin() + static_cast<long>(k + P));
        k += P;
        out.eta.assign(x.begin() + static_cast<long>(k), x.begin() + static_cast<long>(k + Q));
        return out;
    }
};

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (const double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stddev_of(std::span<const double> v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (const double x : v) s += (x - m) * (x - m);
    return v.size() < 2 ? 0.0 : std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

SarimaFit fit(std::span<const double> values, const SarimaSpec& spec, const FitOptions& options) {
    spec.validate();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw std::invalid_argument("non-finite value at index " + std::to_string(i));
        }
    }
    const std::size_t need = minimum_fit_length(spec);
    if (values.size() < need) {
        throw std::invalid_argument("SARIMA " + spec.to_string() + " needs at least " + std::to_string(need) +
                                    " observations, got " + std::to_string(values.size()));
    }
    const std::vector<double> w = difference(values, spec.d, spec.D, spec.s).values;

    const ParamLayout layout{static_cast<std::size_t>(spec.p), static_cast<std::size_t>(spec.q),
                             static_cast<std::size_t>(spec.P), static_cast<std::size_t>(spec.Q)};
    const std::size_t dim = layout.size();

    std::vector<double> scratch;
    auto objective = [&](std::span<const double> x) {
        const std::size_t p = layout.p, q = layout.q, P = layout.P;
        const auto theta = x.subspan(1 + p, q);
        const auto eta = x.subspan(1 + p + q + P);
        // a non-invertible MA part makes the residual recursion explode out of sample
        if (!ma_invertible(theta) || !ma_invertible(eta)) {
            return std::numeric_limits<double>::infinity();
        }
        return residual_recursion(w, spec, x[0], x.subspan(1, p), theta, x.subspan(1 + p + q, P), eta, scratch);
    };

    simplex::Options nm;
    nm.tolerance = options.tolerance;
    nm.max_iterations = options.max_iterations;
    nm.lower.assign(dim, -options.coefficient_bound);
    nm.upper.assign(dim, options.coefficient_bound);
    nm.lower[0] = -std::numeric_limits<double>::infinity();
    nm.upper[0] = std::numeric_limits<double>::infinity();

    const double level = std::max({std::abs(mean_of(w)), stddev_of(w), 1e-3});
    std::vector<double> steps(dim, 0.1);
    steps[0] = 0.5 * level;

    const std::vector<double> zero(dim, 0.0);
    const double zero_sse = objective(zero);

    Rng rng(options.seed);
    std::vector<std::vector<double>> starts{zero};
    for (int r = 0; r < options.restarts; ++r) {
        std::vector<double> x(dim);
        x[0] = rng.uniform(-1.0, 1.0) * level;
        for (std::size_t j = 1; j < dim; ++j) x[j] = rng.uniform(-0.5, 0.5);
        const std::span<double> xs(x);
        while (!ma_invertible(xs.subspan(1 + layout.p, layout.q)) ||
               !ma_invertible(xs.subspan(1 + layout.p + layout.q + layout.P))) {
            for (double& v : xs.subspan(1 + layout.p, layout.q)) v *= 0.5;
            for (double& v : xs.subspan(1 + layout.p + layout.q + layout.P)) v *= 0.5;
        }
        starts.push_back(std::move(x));
    }

    std::vector<double> best_x = zero;
    double best_sse = zero_sse;
    bool best_converged = false;
    for (const auto& start : starts) {
        auto run = simplex::minimize(objective, start, steps, nm);
        // one restart from the end point guards against a collapsed simplex
        auto polish = simplex::minimize(objective, run.x, steps, nm);
        if (polish.value <= run.value) {
            run.x = std::move(polish.x);
            run.value = polish.value;
            run.converged = polish.converged;
        }
        if (run.value < best_sse || (run.value == best_sse && run.converged && !best_converged)) {
            best_sse = run.value;
            best_x = std::move(run.x);
            best_converged = run.converged;
        }
    }

    SarimaFit out;
    out.spec = spec;
    out.params = layout.unpack(best_x);
    const Residuals r = css_residuals(w, spec, out.params);
    out.residuals = r.residuals;
    out.sse = r.sse;
    const auto count = static_cast<double>(r.residuals.size());
    out.params.sigma2 = out.sse / count;
    out.train_rmse = std::sqrt(out.sse / count);
    out.converged = best_converged && (out.sse < zero_sse || zero_sse == 0.0);
    return out;
}

// ---------------------------------------------------------------------------
// Forecasting

std::vector<double> forecast(const SarimaFit& fit, std::span<const double> history, std::size_t horizon) {
    const SarimaSpec& spec = fit.spec;
    spec.validate();
    fit.params.check_against(spec);
    if (horizon == 0) {
        return {};
    }
    if (history.size() <= static_cast<std::size_t>(spec.differencing_loss())) {
        throw std::invalid_argument("history of length " + std::to_string(history.size()) +
                                    " is too short to forecast with " + spec.to_string());
    }
    std::vector<double> w = difference(history, spec.d, spec.D, spec.s).values;
    require_evaluable(w.size(), spec);
    std::vector<double> e;
    residual_recursion(w, spec, fit.params, e);

    const auto s = static_cast<std::size_t>(spec.s);
    const auto& p = fit.params;
    const std::size_t n = w.size();
    for (std::size_t k = 0; k < horizon; ++k) {
        const std::size_t t = n + k;
        double pred = p.c;
        for (std::size_t j = 1; j <= p.alpha.size(); ++j) pred += p.alpha[j - 1] * w[t - j];
        for (std::size_t j = 1; j <= p.theta.size() && j <= t; ++j) pred += p.theta[j - 1] * e[t - j];
        for (std::size_t j = 1; j <= p.phi.size(); ++j) pred += p.phi[j - 1] * w[t - s * j];
        for (std::size_t j = 1; j <= p.eta.size() && s * j <= t; ++j) pred += p.eta[j - 1] * e[t - s * j];
        w.push_back(pred);
        e.push_back(0.0);
    }
    const std::span<const double> future(w.data() + n, horizon);
    return integrate_forecast(history, future, spec.d, spec.D, spec.s);
}

double rolling_test_rmse(const SarimaFit& fit, std::span<const double> train, std::span<const double> test) {
    if (test.empty()) {
        throw std::invalid_argument("rolling_test_rmse: empty test series");
    }
    std::vector<double> history(train.begin(), train.end());
    history.reserve(train.size() + test.size());
    double sum = 0.0;
    for (const double actual : test) {
        const double pred = forecast(fit, history, 1).front();
        sum += (pred - actual) * (pred - actual);
        history.push_back(actual);
    }
    return std::sqrt(sum / static_cast<double>(test.size()));
}

// ---------------------------------------------------------------------------
// Grid search

std::vector<SarimaSpec> GridSpec::candidates() const {
    for (const auto* r : {&p, &d, &q, &P, &D, &Q, &s}) {
        if (r->empty()) {
            throw std::invalid_argument("grid ranges must be non-empty");
        }
    }
    std::set<SarimaSpec> unique;
    for (const int vp : p)
        for (const int vd : d)
            for (const int vq : q)
                for (const int vP : P)
                    for (const int vD : D)
                        for (const int vQ : Q)
                            for (const int vs : s) {
                                SarimaSpec spec{vp, vd, vq, vP, vD, vQ, vs};
                                if (vs == 0) {
                                    spec.P = spec.D = spec.Q = 0;
                                }
                                if (spec.P == 0 && spec.D == 0 && spec.Q == 0) {
                                    spec.s = 0;
                                }
                                try {
                                    spec.validate();
                                } catch (const std::invalid_argument&) {
                                    continue;
                                }
                                unique.insert(spec);
                            }
    return {unique.begin(), unique.end()};
}

namespace {

CandidateScore score_candidate(std::span<const double> train, const SarimaSpec& spec, const GridSpec& grid,
                               const GridOptions& options) {
    CandidateScore out{spec, std::nullopt, {}};
    try {
        double score = 0.0;
        if (grid.selection == Selection::holdout_rmse) {
            const auto n_fit = static_cast<std::size_t>(
                std::floor((1.0 - options.validation_fraction) * static_cast<double>(train.size())));
            if (n_fit == 0 || n_fit >= train.size()) {
                throw std::invalid_argument("validation split leaves an empty part");
            }
            const SarimaFit f = fit(train.first(n_fit), spec, options.fit);
            score = rolling_test_rmse(f, train.first(n_fit), train.subspan(n_fit));
        } else {
            const SarimaFit f = fit(train, spec, options.fit);
            const auto m = static_cast<double>(f.residuals.size());
            score = f.sse > 0.0 ? 2.0 * spec.parameter_count() + m * std::log(f.sse / m)
                                : -std::numeric_limits<double>::max();
        }
        if (!std::isfinite(score)) {
            throw std::runtime_error("non-finite score (divergent forecasts)");
        }
        out.score = score;
    } catch (const std::exception& e) {
        out.diagnostic = e.what();
    }
    return out;
}

}  // namespace

GridResult grid_search(std::span<const double> train, const GridSpec& grid, const GridOptions& options) {
    if (!(options.validation_fraction > 0.0 && options.validation_fraction < 1.0)) {
        throw std::invalid_argument("validation_fraction must lie in (0, 1)");
    }
    const auto specs = grid.candidates();
    if (specs.empty()) {
        throw std::invalid_argument("grid contains no valid candidate");
    }
    std::vector<CandidateScore> scores(specs.size());
    const unsigned workers = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(specs.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < specs.size(); ++i) {
            scores[i] = score_candidate(train, specs[i], grid, options);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < specs.size(); i = next++) {
                    scores[i] = score_candidate(train, specs[i], grid, options);
                }
            });
        }
    }

    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!scores[i].score) continue;
        if (!best) {
            best = i;
            continue;
        }
        const auto& a = scores[i];
        const auto& b = scores[*best];
        // candidates are already in lexicographic order, so a strict comparison keeps the earlier spec
        if (*a.score < *b.score || (*a.score == *b.score && a.spec.complexity() < b.spec.complexity())) {
            best = i;
        }
    }
    if (!best) {
        std::string msg = "grid search: every candidate failed";
        for (const auto& s : scores) {
            msg += "\n  " + s.spec.to_string() + ": " + s.diagnostic;
        }
        throw GridSearchError(msg, std::move(scores));
    }
    GridResult out;
    out.best = specs[*best];
    out.fit = fit(train, out.best, options.fit);
    out.scores = std::move(scores);
    return out;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::ordered_json to_json(const SarimaSpec& spec, const SarimaParams& params) {
    nlohmann::ordered_json j;
    j["order"] = {spec.p, spec.d, spec.q};
    j["seasonal"] = {spec.P, spec.D, spec.Q, spec.s};
    j["c"] = params.c;
    j["alpha"] = params.alpha;
    j["theta"] = params.theta;
    j["phi"] = params.phi;
    j["eta"] = params.eta;
    j["sigma2"] = params.sigma2;
    return j;
}

nlohmann::ordered_json to_json(const SarimaFit& fit) {
    nlohmann::ordered_json j = to_json(fit.spec, fit.params);
    j["sse"] = fit.sse;
    j["converged"] = fit.converged;
    j["train_rmse"] = fit.train_rmse;
    j["residuals"] = fit.residuals;
    return j;
}

SarimaSpec spec_from_json(const nlohmann::json& j) {
    const auto order = j.at("order").get<std::vector<int>>();
    const auto seasonal = j.contains("seasonal") ? j.at("seasonal").get<std::vector<int>>() : std::vector<int>{0, 0, 0, 0};
    if (order.size() != 3 || seasonal.size() != 4) {
        throw std::invalid_argument("SARIMA spec JSON needs order [p,d,q] and seasonal [P,D,Q,s]");
    }
    SarimaSpec spec{order[0], order[1], order[2], seasonal[0], seasonal[1], seasonal[2], seasonal[3]};
    spec.validate();
    return spec;
}

SarimaParams params_from_json(const nlohmann::json& j, const SarimaSpec& spec) {
    SarimaParams p;
    p.c = j.value("c", 0.0);
    p.alpha = j.value("alpha", std::vector<double>{});
    p.theta = j.value("theta", std::vector<double>{});
    p.phi = j.value("phi", std::vector<double>{});
    p.eta = j.value("eta", std::vector<double>{});
    p.sigma2 = j.value("sigma2", 0.0);
    p.check_against(spec);
    return p;
}

SarimaFit fit_from_json(const nlohmann::json& j) {
    SarimaFit f;
    f.spec = spec_from_json(j);
    f.params = params_from_json(j, f.spec);
    f.sse = j.value("sse", 0.0);
    f.converged = j.value("converged", false);
    f.train_rmse = j.value("train_rmse", 0.0);
    f.residuals = j.value("residuals", std::vector<double>{});
    return f;
}

GridSpec grid_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw std::invalid_argument("grid JSON must be an object");
    }
    GridSpec g;
    auto read_range = [](const nlohmann::json& v, const std::string& key) {
        std::vector<int> out;
        if (v.is_number_integer()) {
            out.push_back(v.get<int>());
        } else if (v.is_array()) {
            if (v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
                throw std::invalid_argument("grid '" + key + "' must be an inclusive [lo, hi] integer interval");
            }
            const int lo = v[0].get<int>();
            const int hi = v[1].get<int>();
            if (lo > hi) {
                throw std::invalid_argument("grid '" + key + "' interval is empty");
            }
            for (int x = lo; x <= hi; ++x) out.push_back(x);
        } else if (v.is_object() && v.size() == 1 && v.contains("values") && v["values"].is_array()) {
            for (const auto& x : v["values"]) {
                if (!x.is_number_integer()) {
                    throw std::invalid_argument("grid '" + key + "' values must be integers");
                }
                out.push_back(x.get<int>());
            }
        } else {
            throw std::invalid_argument("grid '" + key + "' must be an integer, [lo, hi], or {\"values\": [...]}");
        }
        if (out.empty()) {
            throw std::invalid_argument("grid '" + key + "' is empty");
        }
        return out;
    };
    for (const auto& [key, value] : j.items()) {
        if (key == "p") g.p = read_range(value, key);
        else if (key == "d") g.d = read_range(value, key);
        else if (key == "q") g.q = read_range(value, key);
        else if (key == "P") g.P = read_range(value, key);
        else if (key == "D") g.D = read_range(value, key);
        else if (key == "Q") g.Q = read_range(value, key);
        else if (key == "s") g.s = read_range(value, key);
        else if (key == "selection") {
            const auto sel = value.get<std::string>();
            if (sel == "holdout_rmse") g.selection = Selection::holdout_rmse;
            else if (sel == "aic") g.selection = Selection::aic;
            else throw std::invalid_argument("unknown grid selection '" + sel + "'");
        } else {
            throw std::invalid_argument("unknown grid key '" + key + "'");
        }
    }
    return g;
}

}  // namespace biascast::sarima
