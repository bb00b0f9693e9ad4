#include "biascast/sarima.hpp"
#include "biascast/timeseries.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace biascast;
using namespace biascast::sarima;

namespace {

std::vector<double> ar1(double alpha, std::size_t n, std::uint64_t seed) {
    return timeseries::generate_synthetic(timeseries::Ar1Kind{alpha, 1.0}, n, seed).values;
}

SarimaParams with_alpha(const SarimaSpec& spec, double a) {
    auto p = SarimaParams::zeros(spec);
    p.alpha[0] = a;
    return p;
}

}  // namespace

TEST_CASE("spec validation") {
    CHECK_NOTHROW(SarimaSpec{9, 0, 10, 2, 1, 1, 12}.validate());
    CHECK_THROWS_AS((SarimaSpec{1, 0, 0, 1, 0, 0, 0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((SarimaSpec{1, 0, 0, 0, 1, 0, 1}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((SarimaSpec{-1, 0, 0, 0, 0, 0, 0}.validate()), std::invalid_argument);
    CHECK(SarimaSpec{9, 0, 10, 2, 1, 1, 12}.to_string() == "(9,0,10)(2,1,1,12)");
}

TEST_CASE("difference examples") {
    CHECK(difference(std::vector<double>{1, 3, 6}, 1, 0, 0).values == std::vector<double>{2, 3});
    CHECK(difference(std::vector<double>{1, 2, 3, 4}, 0, 1, 2).values == std::vector<double>{2, 2});
    CHECK_THROWS_AS(difference(std::vector<double>{1, 2}, 1, 1, 2), std::invalid_argument);
    const std::vector<double> x{1, 3, 6, 10, 15};
    const auto dx = difference(x, 2, 0, 0);
    CHECK(dx.values == std::vector<double>{1, 1, 1});
    CHECK(invert(dx.values, dx.context) == x);
}

TEST_CASE("integrate_forecast continues the level") {
    // random walk: flat extension of the last value
    CHECK(integrate_forecast(std::vector<double>{1, 4, 10}, std::vector<double>{0, 0}, 1, 0, 0) ==
          std::vector<double>{10, 10});
    // seasonal lag 2: repeat the last season plus increments
    CHECK(integrate_forecast(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 1, 0}, 0, 1, 2) ==
          std::vector<double>{4, 5, 4});
}

TEST_CASE("css residual examples") {
    const SarimaSpec ar{1, 0, 0, 0, 0, 0, 0};
    const auto r = css_residuals(std::vector<double>{1, 1, 1}, ar, with_alpha(ar, 0.5));
    CHECK(r.residuals == std::vector<double>{0.5, 0.5});
    CHECK(r.sse == doctest::Approx(0.5));

    const SarimaSpec seasonal{2, 0, 1, 1, 0, 1, 3};
    const std::vector<double> y{0.5, -1, 2, 3, 0.25, -4, 1, 1.5};
    const auto z = css_residuals(y, seasonal, SarimaParams::zeros(seasonal));
    CHECK(z.residuals == std::vector<double>(y.begin() + 3, y.end()));
    double tail_sq = 0;
    for (std::size_t i = 3; i < y.size(); ++i) tail_sq += y[i] * y[i];
    CHECK(z.sse == doctest::Approx(tail_sq));

    CHECK_THROWS_AS(css_residuals(std::vector<double>{1, 2, 3}, seasonal, SarimaParams::zeros(seasonal)),
                    std::invalid_argument);
    CHECK_THROWS_AS(css_residuals(std::vector<double>{1, 2, 3}, ar, SarimaParams::zeros(seasonal)),
                    std::invalid_argument);
}

TEST_CASE("css residuals include MA and seasonal MA feedback") {
    // hand-rolled recursion: e_t = y_t - (c + theta e_{t-1} + eta e_{t-2}), burn-in 0
    const SarimaSpec spec{0, 0, 1, 0, 0, 1, 2};
    SarimaParams p = SarimaParams::zeros(spec);
    p.c = 0.1;
    p.theta = {0.4};
    p.eta = {-0.3};
    const std::vector<double> y{1.0, 2.0, -1.0, 0.5};
    std::vector<double> e(4);
    e[0] = y[0] - 0.1;
    e[1] = y[1] - (0.1 + 0.4 * e[0]);
    e[2] = y[2] - (0.1 + 0.4 * e[1] - 0.3 * e[0]);
    e[3] = y[3] - (0.1 + 0.4 * e[2] - 0.3 * e[1]);
    const auto r = css_residuals(y, spec, p);
    REQUIRE(r.residuals.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(r.residuals[i] == doctest::Approx(e[i]).epsilon(1e-14));
}

TEST_CASE("css prefers the generating AR coefficient") {
    const auto y = ar1(0.8, 500, 17);
    const SarimaSpec spec{1, 0, 0, 0, 0, 0, 0};
    CHECK(css_residuals(y, spec, with_alpha(spec, 0.8)).sse < css_residuals(y, spec, with_alpha(spec, 0.0)).sse);
}

TEST_CASE("fit recovers simple models") {
    const SarimaSpec spec{1, 0, 0, 0, 0, 0, 0};
    const auto noise = fit(ar1(0.0, 500, 101), spec);
    CHECK(std::abs(noise.params.alpha[0]) < 0.15);

    const auto f = fit(ar1(0.8, 500, 202), spec);
    CHECK(f.params.alpha[0] >= 0.7);
    CHECK(f.params.alpha[0] <= 0.9);
    CHECK(f.converged);
    CHECK(f.params.sigma2 == doctest::Approx(f.sse / static_cast<double>(f.residuals.size())));
    CHECK(f.train_rmse * f.train_rmse * static_cast<double>(f.residuals.size()) == doctest::Approx(f.sse));

    const auto c = fit(std::vector<double>(40, 5.0), SarimaSpec{});
    CHECK(c.params.c == doctest::Approx(5.0).epsilon(1e-3));
    CHECK(c.sse < 1e-4);
}

TEST_CASE("fit preconditions") {
    std::vector<double> y(30, 1.0);
    CHECK_THROWS_AS(fit(y, SarimaSpec{1, 0, 1, 1, 0, 1, 12}), std::invalid_argument);
    CHECK(minimum_fit_length(SarimaSpec{9, 0, 10, 2, 1, 1, 12}) == 12u + 10 + 19 + 36);
    y[3] = std::nan("");
    CHECK_THROWS_AS(fit(y, SarimaSpec{}), std::invalid_argument);
}

TEST_CASE("fit is never worse than the zero model") {
    Rng rng(8);
    for (int i = 0; i < 8; ++i) {
        const SarimaSpec spec{static_cast<int>(rng.index(3)), static_cast<int>(rng.index(2)),
                              static_cast<int>(rng.index(3)), static_cast<int>(rng.index(2)), 0, 0, 4};
        const auto y = timeseries::generate_synthetic(timeseries::SineKind{9, 3, 0.5}, 80, 50 + i).values;
        FitOptions opt;
        opt.max_iterations = 800;
        const auto f = fit(y, spec, opt);
        const auto w = difference(y, spec.d, spec.D, spec.s).values;
        const double zero_sse = css_residuals(w, spec, SarimaParams::zeros(spec)).sse;
        CHECK(f.sse <= zero_sse);
    }
}

TEST_CASE("fit is deterministic given a seed") {
    const auto y = ar1(0.5, 200, 4);
    const SarimaSpec spec{2, 0, 1, 0, 0, 0, 0};
    const auto a = fit(y, spec);
    const auto b = fit(y, spec);
    CHECK(a.params.alpha == b.params.alpha);
    CHECK(a.params.theta == b.params.theta);
    CHECK(a.sse == b.sse);
}

TEST_CASE("forecast examples") {
    SarimaFit constant;
    constant.params.c = 2.0;
    CHECK(forecast(constant, std::vector<double>{5, 9, 1}, 3) == std::vector<double>{2, 2, 2});
    CHECK(forecast(constant, std::vector<double>{5, 9, 1}, 0).empty());

    SarimaFit walk;
    walk.spec = SarimaSpec{0, 1, 0, 0, 0, 0, 0};
    CHECK(forecast(walk, std::vector<double>{3, 7, 10}, 4) == std::vector<double>{10, 10, 10, 10});
    CHECK_THROWS_AS(forecast(walk, std::vector<double>{3}, 1), std::invalid_argument);

    const auto y = ar1(0.8, 300, 31);
    const auto f = fit(y, SarimaSpec{1, 0, 0, 0, 0, 0, 0});
    const double hand = f.params.c + f.params.alpha[0] * y.back();
    CHECK(forecast(f, y, 1)[0] == doctest::Approx(hand).epsilon(1e-12));
    CHECK(forecast(f, y, 7).size() == 7);
}

TEST_CASE("rolling test RMSE") {
    SarimaFit zero;
    CHECK(rolling_test_rmse(zero, std::vector<double>{1, 2}, std::vector<double>{3, 4}) ==
          doctest::Approx(std::sqrt(12.5)));
    CHECK_THROWS_AS(rolling_test_rmse(zero, std::vector<double>{1}, std::vector<double>{}), std::invalid_argument);

    // deterministic linear trend is predicted exactly by a random walk with drift 1
    SarimaFit drift;
    drift.spec = SarimaSpec{0, 1, 0, 0, 0, 0, 0};
    drift.params.c = 1.0;
    std::vector<double> line(30);
    std::iota(line.begin(), line.end(), 0.0);
    CHECK(rolling_test_rmse(drift, std::span(line).first(20), std::span(line).subspan(20)) == 0.0);
}

TEST_CASE("mean-only model on white noise has test RMSE near sigma") {
    const auto y = ar1(0.0, 500, 77);
    const std::span<const double> all(y);
    const auto f = fit(all.first(200), SarimaSpec{});
    const double rmse = rolling_test_rmse(f, all.first(200), all.subspan(200));
    CHECK(std::abs(rmse - 1.0) < 0.1);
}

TEST_CASE("grid candidates") {
    GridSpec g;
    g.p = {0, 1};
    g.P = {0, 1};
    g.s = {0, 1, 7};
    const auto c = g.candidates();
    // s = 0 collapses P, P = 0 collapses s, and s = 1 with P = 1 is invalid
    REQUIRE(c.size() == 4);
    CHECK(c[1] == SarimaSpec{0, 0, 0, 1, 0, 0, 7});
    CHECK(std::is_sorted(c.begin(), c.end()));
    g.q.clear();
    CHECK_THROWS_AS(static_cast<void>(g.candidates()), std::invalid_argument);
}

TEST_CASE("grid search detects weekly seasonality") {
    timeseries::SeasonalSarimaKind k;
    k.P = 1;
    k.s = 7;
    k.phi = {0.8};
    const auto y = timeseries::generate_synthetic(k, 280, 5).values;
    GridSpec g;
    g.P = {1};
    g.s = {0, 7};
    const auto r = grid_search(y, g);
    CHECK(r.best.s == 7);
    CHECK(r.fit.spec == r.best);
    for (const auto& sc : r.scores) {
        REQUIRE(sc.score.has_value());
    }
    const auto& winner = *std::find_if(r.scores.begin(), r.scores.end(), [&](const auto& s) { return s.spec == r.best; });
    for (const auto& sc : r.scores) CHECK(*winner.score <= *sc.score);
}

TEST_CASE("grid search tie-break prefers fewer coefficients, then lexicographic order") {
    const std::vector<double> zeros(60, 0.0);
    GridSpec g;
    g.p = {0, 1};
    g.q = {0, 1};
    const auto r = grid_search(zeros, g);
    CHECK(r.best == SarimaSpec{});

    GridSpec same_size;
    same_size.p = {0, 1};
    same_size.q = {0, 1};
    same_size.d = {0};
    // exclude the empty model so (0,0,1) and (1,0,0) tie on complexity
    const auto specs = same_size.candidates();
    CHECK(specs[1] == SarimaSpec{0, 0, 1, 0, 0, 0, 0});
}

TEST_CASE("grid search serial and threaded runs agree") {
    const auto y = ar1(0.6, 150, 12);
    GridSpec g;
    g.p = {0, 2};
    g.q = {0, 1};
    GridOptions serial;
    GridOptions threaded;
    threaded.threads = 4;
    const auto a = grid_search(y, g, serial);
    const auto b = grid_search(y, g, threaded);
    CHECK(a.best == b.best);
    REQUIRE(a.scores.size() == b.scores.size());
    for (std::size_t i = 0; i < a.scores.size(); ++i) CHECK(a.scores[i].score == b.scores[i].score);
}

TEST_CASE("grid search reports every failure") {
    GridSpec g;
    g.p = {5, 6};
    try {
        grid_search(std::vector<double>(12, 1.0), g);
        FAIL("expected GridSearchError");
    } catch (const GridSearchError& e) {
        CHECK(e.scores().size() == 2);
        for (const auto& s : e.scores()) CHECK_FALSE(s.diagnostic.empty());
    }
}

TEST_CASE("AIC selection") {
    const auto y = ar1(0.8, 300, 9);
    GridSpec g;
    g.p = {0, 1};
    g.selection = Selection::aic;
    CHECK(grid_search(y, g).best.p == 1);
}

TEST_CASE("JSON round trip and grid parsing") {
    const SarimaSpec spec{1, 0, 1, 1, 1, 0, 12};
    SarimaParams p = SarimaParams::zeros(spec);
    p.c = 0.5;
    p.alpha = {0.25};
    p.theta = {-0.1};
    p.phi = {0.3};
    p.sigma2 = 2.0;
    const auto j = to_json(spec, p);
    CHECK(j.dump() ==
          R"({"order":[1,0,1],"seasonal":[1,1,0,12],"c":0.5,"alpha":[0.25],"theta":[-0.1],"phi":[0.3],"eta":[],"sigma2":2.0})");
    CHECK(spec_from_json(j) == spec);
    const auto back = params_from_json(j, spec);
    CHECK(back.alpha == p.alpha);
    CHECK(back.phi == p.phi);

    const auto g = grid_from_json(nlohmann::json::parse(R"({"p":[0,2],"d":1,"s":{"values":[0,7]},"selection":"aic"})"));
    CHECK(g.p == std::vector<int>{0, 1, 2});
    CHECK(g.d == std::vector<int>{1});
    CHECK(g.s == std::vector<int>{0, 7});
    CHECK(g.selection == Selection::aic);
    CHECK_THROWS_AS(grid_from_json(nlohmann::json::parse(R"({"x":[0,1]})")), std::invalid_argument);
    CHECK_THROWS_AS(grid_from_json(nlohmann::json::parse(R"({"p":[2,1]})")), std::invalid_argument);
    CHECK_THROWS_AS(grid_from_json(nlohmann::json::parse(R"({"p":"a"})")), std::invalid_argument);
}

TEST_CASE("MA invertibility") {
    CHECK(ma_invertible(std::vector<double>{}));
    CHECK(ma_invertible(std::vector<double>{0.5}));
    CHECK_FALSE(ma_invertible(std::vector<double>{-1.79}));
    CHECK_FALSE(ma_invertible(std::vector<double>{1.0}));
    // 1 + 0.5z + 0.3z^2: complex roots with |z|^2 = 1/0.3
    CHECK(ma_invertible(std::vector<double>{0.5, 0.3}));
    // 1 + 0.2z - 1.2z^2 has a root at z = -5/6
    CHECK_FALSE(ma_invertible(std::vector<double>{0.2, -1.2}));

    // products of linear factors (1 + a z): invertible iff every |a| < 1
    Rng rng(31);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t q = 1 + rng.index(5);
        std::vector<double> poly{1.0};
        bool expect = true;
        for (std::size_t f = 0; f < q; ++f) {
            const double a = rng.uniform(-1.6, 1.6);
            expect = expect && std::abs(a) < 1.0;
            std::vector<double> next(poly.size() + 1, 0.0);
            for (std::size_t i = 0; i < poly.size(); ++i) {
                next[i] += poly[i];
                next[i + 1] += a * poly[i];
            }
            poly = next;
        }
        CHECK(ma_invertible(std::span(poly).subspan(1)) == expect);
    }
}

TEST_CASE("fitted MA terms are invertible") {
    const auto y = timeseries::generate_synthetic(timeseries::SineKind{12, 5.0, 0.3}, 36, 9).values;
    const auto f = fit(y, SarimaSpec{2, 0, 1, 0, 0, 0, 0});
    CHECK(ma_invertible(f.params.theta));
    // out-of-sample one-step forecasts stay on the scale of the data
    const auto more = timeseries::generate_synthetic(timeseries::SineKind{12, 5.0, 0.3}, 60, 9).values;
    CHECK(rolling_test_rmse(f, std::span(more).first(36), std::span(more).subspan(36)) < 2.0);
}
