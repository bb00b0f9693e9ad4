#include "biascast/timeseries.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace biascast;
using namespace biascast::timeseries;

namespace {

DailySeries series_of(std::vector<double> v) {
    DailySeries s;
    s.start_date = parse_date("2018-01-01");
    s.values = std::move(v);
    return s;
}

}  // namespace

TEST_CASE("chronological_split sizes") {
    std::vector<double> ten(10);
    std::iota(ten.begin(), ten.end(), 0.0);
    const auto a = chronological_split(series_of(ten), 0.7);
    CHECK(a.train.size() == 7);
    CHECK(a.test.size() == 3);
    CHECK(a.test.values.front() == 7.0);
    CHECK(a.test.start_date == parse_date("2018-01-08"));

    const auto b = chronological_split(series_of(std::vector<double>(120, 1.0)), 0.7);
    CHECK(b.train.size() == 84);
    CHECK(b.test.size() == 36);

    CHECK_THROWS_AS(chronological_split(series_of({1.0}), 0.7), std::invalid_argument);
    CHECK_THROWS_AS(chronological_split(series_of(ten), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(chronological_split(series_of(ten), 0.05), std::invalid_argument);
}

TEST_CASE("split tiles the parent for random lengths and ratios") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = 2 + rng.index(300);
        std::vector<double> v(n);
        for (auto& x : v) x = rng.normal();
        const double ratio = rng.uniform(0.5, 0.95);
        const auto sp = chronological_split(series_of(v), ratio);
        CHECK(sp.train.size() == static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n))));
        std::vector<double> joined = sp.train.values;
        joined.insert(joined.end(), sp.test.values.begin(), sp.test.values.end());
        CHECK(joined == v);
    }
}

TEST_CASE("min-max scaler") {
    const std::vector<double> v{0, 5, 10};
    const auto sc = fit_scaler(v);
    CHECK(sc.apply(std::span<const double>(v)) == std::vector<double>{0, 0.5, 1});

    const std::vector<double> c{4, 4, 4};
    CHECK(fit_scaler(c).apply(std::span<const double>(c)) == std::vector<double>{0, 0, 0});

    const std::vector<double> r{3.7, 9.1};
    const auto rs = fit_scaler(r);
    const auto back = rs.invert(rs.apply(std::span<const double>(r)));
    CHECK(back[0] == doctest::Approx(3.7).epsilon(1e-12));
    CHECK(back[1] == doctest::Approx(9.1).epsilon(1e-12));
    CHECK_THROWS_AS(fit_scaler(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("scaler round trips within 1e-12 relative on random data") {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> v(20);
        const double scale = std::pow(10.0, rng.uniform(-3, 4));
        for (auto& x : v) x = rng.normal(0, scale);
        const auto sc = fit_scaler(v);
        for (const double x : v) {
            const double round = sc.invert(sc.apply(x));
            CHECK(std::abs(round - x) <= 1e-12 * std::max(std::abs(x), sc.max - sc.min));
            const double y = rng.uniform();
            CHECK(std::abs(sc.apply(sc.invert(y)) - y) <= 1e-12);
        }
    }
}

TEST_CASE("make_windows enumerates pairs") {
    const std::vector<double> v{1, 2, 3, 4, 5};
    const auto w1 = make_windows(v, 2, 1);
    REQUIRE(w1.pairs.size() == 3);
    CHECK(w1.pairs[0].input == std::vector<double>{1, 2});
    CHECK(w1.pairs[0].target == std::vector<double>{3});
    CHECK(w1.pairs[2].input == std::vector<double>{3, 4});
    CHECK(w1.pairs[2].target == std::vector<double>{5});

    const auto w2 = make_windows(v, 2, 2);
    REQUIRE(w2.pairs.size() == 2);
    CHECK(w2.pairs[1].input == std::vector<double>{2, 3});
    CHECK(w2.pairs[1].target == std::vector<double>{4, 5});

    CHECK(make_windows(std::vector<double>{1, 2}, 14, 5).pairs.empty());
    CHECK_THROWS_AS(make_windows(v, 0, 1), std::invalid_argument);
}

TEST_CASE("window count formula holds for random sizes") {
    Rng rng(5);
    for (int i = 0; i < 500; ++i) {
        const std::size_t n = rng.index(60);
        const std::size_t L = 1 + rng.index(20);
        const std::size_t H = 1 + rng.index(6);
        std::vector<double> v(n);
        std::iota(v.begin(), v.end(), 0.0);
        const auto ws = make_windows(v, L, H);
        const long expected = std::max(0L, static_cast<long>(n) - static_cast<long>(L) - static_cast<long>(H) + 1);
        REQUIRE(static_cast<long>(ws.pairs.size()) == expected);
        for (const auto& p : ws.pairs) {
            CHECK(p.target.front() == p.input.back() + 1.0);
        }
    }
}

TEST_CASE("synthetic sine") {
    const auto s = generate_synthetic(SineKind{10, 1, 0}, 10, 1);
    CHECK(s.values[0] == 0.0);
    CHECK(std::abs(s.values[5]) < 1e-9);
    CHECK(s.values[0 + 10 / 4] > 0.9);
    CHECK_THROWS_AS(generate_synthetic(SineKind{1.5, 1, 0}, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_synthetic(SineKind{10, 1, 0}, 0, 1), std::invalid_argument);
}

TEST_CASE("synthetic ar1 white noise has mean near zero") {
    const auto s = generate_synthetic(Ar1Kind{0.0, 1.0}, 10000, 2024);
    const double mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / 10000.0;
    CHECK(std::abs(mean) < 0.05);
    double var = 0;
    for (const double x : s.values) var += (x - mean) * (x - mean);
    CHECK(var / 9999.0 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("synthetic generation is reproducible") {
    const SyntheticKind kinds[] = {Ar1Kind{0.8, 1.0}, SineKind{20, 2, 0.3},
                                   SeasonalSarimaKind{1, 1, 0, 1, 0, 0, 7, 0.0, {0.3}, {}, {0.5}, {}, 1.0}};
    for (const auto& k : kinds) {
        const auto a = generate_synthetic(k, 200, 99);
        const auto b = generate_synthetic(k, 200, 99);
        CHECK(a.values == b.values);
        CHECK(generate_synthetic(k, 200, 100).values != a.values);
    }
}

TEST_CASE("seasonal simulator follows the recursion with zero pre-sample") {
    // sigma 0 leaves only the constant: y_t = 1 + 0.5 y_{t-2}
    SeasonalSarimaKind k;
    k.P = 1;
    k.s = 2;
    k.phi = {0.5};
    k.c = 1.0;
    k.sigma = 0.0;
    const auto s = generate_synthetic(k, 6, 1);
    CHECK(s.values == std::vector<double>{1, 1, 1.5, 1.5, 1.75, 1.75});

    k.D = 1;  // integrated over lag 2 with zero initial levels
    const auto integrated = generate_synthetic(k, 6, 1);
    CHECK(integrated.values == std::vector<double>{1, 1, 2.5, 2.5, 4.25, 4.25});

    SeasonalSarimaKind bad;
    bad.P = 1;
    bad.phi = {0.1};
    bad.s = 1;
    CHECK_THROWS_AS(generate_synthetic(bad, 10, 1), std::invalid_argument);
}

TEST_CASE("value CSV export") {
    CHECK(to_value_csv(series_of({1.5, 2})) == "date,value\n2018-01-01,1.5\n2018-01-02,2\n");
}
