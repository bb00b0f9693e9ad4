#include "biascast/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace biascast::simplex {

Result minimize(const Objective& f, std::vector<double> start, std::span<const double> steps,
                const Options& options) {
    const std::size_t n = start.size();
    if (steps.size() != n) {
        throw std::invalid_argument("simplex: step count must match the dimension");
    }
    const bool bounded = !options.lower.empty();
    if (bounded && (options.lower.size() != n || options.upper.size() != n)) {
        throw std::invalid_argument("simplex: bounds must match the dimension");
    }
    auto clamp = [&](std::vector<double>& x) {
        if (!bounded) return;
        for (std::size_t j = 0; j < n; ++j) x[j] = std::clamp(x[j], options.lower[j], options.upper[j]);
    };
    auto eval = [&](const std::vector<double>& x) {
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    clamp(start);
    Result result;
    if (n == 0) {
        result.x = start;
        result.value = eval(start);
        result.converged = true;
        return result;
    }

    std::vector<std::vector<double>> pts(n + 1, start);
    std::vector<double> vals(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        double step = steps[i] != 0.0 ? steps[i] : 0.05;
        // step inward when the start sits on the upper bound
        if (bounded && pts[i + 1][i] + step > options.upper[i]) step = -step;
        pts[i + 1][i] += step;
        clamp(pts[i + 1]);
    }
    for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    auto point_along = [&](double coef, const std::vector<double>& worst, std::vector<double>& out) {
        for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + coef * (centroid[j] - worst[j]);
        clamp(out);
    };

    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[n - 1];
        const double spread = vals[worst] - vals[best];
        if (std::isfinite(spread) && spread <= options.tolerance * (1.0 + std::abs(vals[best]))) {
            result.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const auto& p = pts[order[k]];
            for (std::size_t j = 0; j < n; ++j) centroid[j] += p[j];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        point_along(1.0, pts[worst], trial);
        const double f_reflect = eval(trial);
        if (f_reflect < vals[best]) {
            point_along(2.0, pts[worst], trial2);
            const double f_expand = eval(trial2);
            if (f_expand < f_reflect) {
                pts[worst] = trial2;
                vals[worst] = f_expand;
            } else {
                pts[worst] = trial;
                vals[worst] = f_reflect;
            }
            continue;
        }
        if (f_reflect < vals[second_worst]) {
            pts[worst] = trial;
            vals[worst] = f_reflect;
            continue;
        }
        // contraction: outside if the reflection improved on the worst, inside otherwise
        const bool outside = f_reflect < vals[worst];
        point_along(outside ? 0.5 : -0.5, pts[worst], trial2);
        const double f_contract = eval(trial2);
        if (f_contract < (outside ? f_reflect : vals[worst])) {
            pts[worst] = trial2;
            vals[worst] = f_contract;
            continue;
        }
        const auto& b = pts[best];
        for (std::size_t k = 0; k <= n; ++k) {
            if (k == best) continue;
            for (std::size_t j = 0; j < n; ++j) pts[k][j] = b[j] + 0.5 * (pts[k][j] - b[j]);
            clamp(pts[k]);
            vals[k] = eval(pts[k]);
        }
    }

    const auto best_it = std::min_element(vals.begin(), vals.end());
    result.x = pts[static_cast<std::size_t>(best_it - vals.begin())];
    result.value = *best_it;
    result.iterations = iter;
    return result;
}

}  // namespace biascast::simplex
