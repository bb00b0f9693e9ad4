#pragma once

#include <json.hpp>

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace biascast::sarima {

/// Orders (p,d,q)(P,D,Q,s). s = 0 means no seasonal terms.
struct SarimaSpec {
    int p = 0, d = 0, q = 0;
    int P = 0, D = 0, Q = 0;
    int s = 0;

    /// Throws std::invalid_argument for negative orders, or seasonal orders with s < 2.
    void validate() const;
    /// p + q + P + Q.
    [[nodiscard]] int complexity() const { return p + q + P + Q; }
    /// Coefficient count including the constant.
    [[nodiscard]] int parameter_count() const { return 1 + p + q + P + Q; }
    /// max(p, s*P): the number of leading differenced values that only seed the recursion.
    [[nodiscard]] int burn_in() const { return std::max(p, s * P); }
    /// d + D*s: values consumed by differencing.
    [[nodiscard]] int differencing_loss() const { return d + D * s; }

    [[nodiscard]] std::string to_string() const;
    auto operator<=>(const SarimaSpec&) const = default;
};

/// Coefficients of the additive seasonal recursion
///   y_t = c + sum_n alpha_n y_{t-n} + sum_n theta_n e_{t-n}
///           + sum_n phi_n y_{t-sn} + sum_n eta_n e_{t-sn} + e_t
/// on the differenced series.
struct SarimaParams {
    double c = 0.0;
    std::vector<double> alpha;
    std::vector<double> theta;
    std::vector<double> phi;
    std::vector<double> eta;
    double sigma2 = 0.0;

    static SarimaParams zeros(const SarimaSpec& spec);
    /// Throws std::invalid_argument if coefficient counts disagree with `spec`.
    void check_against(const SarimaSpec& spec) const;
};

struct SarimaFit {
    SarimaSpec spec;
    SarimaParams params;
    std::vector<double> residuals;  // over the evaluated range
    double sse = 0.0;
    bool converged = false;
    double train_rmse = 0.0;
};

// Differencing

struct DifferenceStage {
    std::size_t lag = 1;
    std::vector<double> prefix;  // the `lag` values this stage consumed
};

/// Stages in application order: d ordinary differences, then D seasonal ones.
struct DifferenceContext {
    std::vector<DifferenceStage> stages;
};

struct Differenced {
    std::vector<double> values;
    DifferenceContext context;
};

/// Applies (1-B)^d (1-B^s)^D. Requires n > d + D*s.
Differenced difference(std::span<const double> values, int d, int D, int s);
/// Rebuilds the undifferenced series from the differenced values and context.
std::vector<double> invert(std::span<const double> differenced, const DifferenceContext& context);

/// Integrates forecasts made on the differenced scale back onto the level of
/// `history` (the undifferenced series the forecasts continue).
std::vector<double> integrate_forecast(std::span<const double> history, std::span<const double> differenced_forecast,
                                       int d, int D, int s);

// Estimation

struct Residuals {
    std::vector<double> residuals;  // one per evaluated index burn_in .. n-1
    double sse = 0.0;
};

/// Conditional-sum-of-squares residuals on an already differenced series.
/// Pre-sample residuals are zero. Requires n >= burn_in + 1.
Residuals css_residuals(std::span<const double> differenced, const SarimaSpec& spec, const SarimaParams& params);

struct FitOptions {
    int restarts = 3;            // seeded perturbation starts in addition to the zero start
    double tolerance = 1e-8;
    int max_iterations = 5000;   // per start
    double coefficient_bound = 5.0;
    std::uint64_t seed = 0;
};

/// Minimizes the CSS over (c, alpha, theta, phi, eta) with Nelder–Mead from a
/// zero start plus seeded restarts. Non-invertible MA or seasonal MA
/// coefficients are excluded from the search. Throws std::invalid_argument for non-finite
/// input or a series below the identifiability floor
/// (differenced length >= 10 + p + q + s(P + Q)).
SarimaFit fit(std::span<const double> values, const SarimaSpec& spec, const FitOptions& options = {});

/// True when 1 + sum_j c_j z^j has every root strictly outside the unit circle.
bool ma_invertible(std::span<const double> coefficients);

/// Minimum undifferenced length `fit` accepts for `spec`.
std::size_t minimum_fit_length(const SarimaSpec& spec);

/// Forecasts `horizon` steps past the end of `history` with frozen parameters;
/// future residuals are zero.
std::vector<double> forecast(const SarimaFit& fit, std::span<const double> history, std::size_t horizon);

/// Rolling one-step RMSE over `test`, each forecast conditioned on train and the
/// true test values before it.
double rolling_test_rmse(const SarimaFit& fit, std::span<const double> train, std::span<const double> test);

// Grid search

enum class Selection { holdout_rmse, aic };

struct GridSpec {
    std::vector<int> p{0}, d{0}, q{0}, P{0}, D{0}, Q{0}, s{0};
    Selection selection = Selection::holdout_rmse;

    /// Valid candidates in lexicographic (p,d,q,P,D,Q,s) order. s = 0 zeroes the
    /// seasonal orders and all-zero seasonal orders zero s; duplicates and invalid
    /// combinations (seasonal orders with s = 1) are dropped.
    [[nodiscard]] std::vector<SarimaSpec> candidates() const;
};

struct CandidateScore {
    SarimaSpec spec;
    std::optional<double> score;  // holdout RMSE or AIC; empty when the candidate failed
    std::string diagnostic;
};

struct GridResult {
    SarimaSpec best;
    SarimaFit fit;  // winner refit on the full training series
    std::vector<CandidateScore> scores;
};

struct GridOptions {
    double validation_fraction = 0.2;
    FitOptions fit;
    unsigned threads = 1;
};

/// Thrown when no candidate could be fit; carries the per-candidate diagnostics.
class GridSearchError : public std::runtime_error {
public:
    GridSearchError(const std::string& what, std::vector<CandidateScore> scores)
        : std::runtime_error(what), scores_(std::move(scores)) {}
    [[nodiscard]] const std::vector<CandidateScore>& scores() const { return scores_; }

private:
    std::vector<CandidateScore> scores_;
};

/// Scores every candidate and returns the winner (ties: smaller p+q+P+Q, then
/// lexicographic order). Results do not depend on `threads`.
GridResult grid_search(std::span<const double> train, const GridSpec& grid, const GridOptions& options = {});

// JSON

nlohmann::ordered_json to_json(const SarimaSpec& spec, const SarimaParams& params);
nlohmann::ordered_json to_json(const SarimaFit& fit);
SarimaSpec spec_from_json(const nlohmann::json& j);
SarimaParams params_from_json(const nlohmann::json& j, const SarimaSpec& spec);
SarimaFit fit_from_json(const nlohmann::json& j);
/// Accepts `{"p":[lo,hi], ..., "s":{"values":[0,7]}, "selection":"aic"}`; each
/// order is an inclusive interval, an explicit value list, or a single integer.
GridSpec grid_from_json(const nlohmann::json& j);

}  // namespace biascast::sarima
