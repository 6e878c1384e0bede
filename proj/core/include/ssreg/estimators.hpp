#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ssreg/linalg.hpp"
#include "ssreg/suffstats.hpp"

namespace ssreg {

enum class ModelKind { linear, weighted, boxcox, ridge };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

/// Closed-form fit derived from a sufficient-statistics accumulator.
/// score is the loglikelihood for linear/boxcox models (+infinity when the
/// fit is exact and sigma2 clamps to zero) and the SSE cost for
/// weighted/ridge models.
struct FitResult {
    ModelKind model_kind = ModelKind::linear;
    std::optional<double> param;  // power parameter c or ridge parameter lambda
    RealVector beta;
    double sigma2 = 0.0;
    SymMatrix cov;
    std::int64_t n = 0;
    std::size_t p = 0;
    double score = 0.0;
    bool used_generalized_inverse = false;
};

FitResult fit_linear(const LinRegSS& ss);

/// Loglikelihood at an arbitrary (beta, sigma2), computed from the
/// accumulator alone. Requires sigma2 > 0.
double loglik_linear(const LinRegSS& ss, const RealVector& beta, double sigma2);

FitResult fit_weighted(const WeightedSS& ss);

struct BoxCoxFit {
    double c = 0.0;
    FitResult fit;
    double profile_loglik = 0.0;
};

/// Fits every power parameter in the accumulator's grid. The shared x'x is
/// factored exactly once and reused across the grid.
std::vector<BoxCoxFit> fit_boxcox_all(const BoxCoxSS& ss);

/// Largest profile loglikelihood; ties broken by smaller |c|, then smaller c.
const BoxCoxFit& select_boxcox(const std::vector<BoxCoxFit>& fits);

FitResult fit_ridge(const LinRegSS& ss, double lambda);

inline constexpr double kDefaultRidgeTau = 0.01;

struct RidgeTraceRow {
    double lambda = 0.0;
    RealVector beta;
    double sigma2 = 0.0;
    double sse = 0.0;
};

struct RidgeTrace {
    std::vector<RidgeTraceRow> rows;
    double selected_lambda = 0.0;
    std::string selection_rule_id;
    bool stabilized = false;
};

/// One fit per grid entry, reusing the accumulator (no data pass). Selects the
/// smallest lambda whose step to the next grid point changes every coefficient
/// by less than tau relatively; falls back to the largest lambda with
/// stabilized = false when no step qualifies.
RidgeTrace ridge_trace(const LinRegSS& ss, std::span<const double> grid,
                       double tau = kDefaultRidgeTau);

/// Trace assembled from fits that were already computed (one per lambda,
/// strictly increasing).
RidgeTrace make_ridge_trace(const std::vector<FitResult>& fits, double tau = kDefaultRidgeTau);

/// x'beta; for Box-Cox fits with inverse_transform set, maps the prediction
/// back to the response scale.
double predict(const FitResult& fit, std::span<const double> x, bool inverse_transform = false);

double mse(std::span<const double> y_true, std::span<const double> y_pred);

}  // namespace ssreg
