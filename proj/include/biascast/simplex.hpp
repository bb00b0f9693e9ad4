#pragma once

#include <functional>
#include <span>
#include <vector>

namespace biascast::simplex {

struct Options {
    double tolerance = 1e-8;     // stop when the simplex's objective spread falls below this
    int max_iterations = 5000;
    // Per-coordinate box; empty means unbounded. Trial points are clamped into it.
    std::vector<double> lower;
    std::vector<double> upper;
};

struct Result {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Nelder–Mead minimization (reflection 1, expansion 2, contraction 0.5,
/// shrink 0.5) from an axis-aligned initial simplex with per-coordinate steps.
/// Non-finite objective values are treated as +infinity.
Result minimize(const Objective& f, std::vector<double> start, std::span<const double> steps,
                const Options& options = {});

}  // namespace biascast::simplex
