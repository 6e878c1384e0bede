#include "ssreg/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ssreg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// A fit is degenerate (exact) when the residual variance falls below this
// share of the response's mean square.
constexpr double kDegenerateShare = 1e-12;

struct VarianceResult {
    double sigma2 = 0.0;
    bool degenerate = false;
};

VarianceResult clamp_variance(double raw, double syy, std::int64_t n) {
    const double floor = kDegenerateShare * syy / static_cast<double>(n);
    if (raw <= floor) return {0.0, true};
    return {raw, false};
}

SymMatrix scaled(const SymMatrix& m, double a) {
    const std::size_t p = m.dim();
    SymMatrix out(p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i; j < p; ++j) out.set(i, j, a * m(i, j));
    }
    return out;
}

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::linear: return "linear";
        case ModelKind::weighted: return "weighted";
        case ModelKind::boxcox: return "boxcox";
        case ModelKind::ridge: return "ridge";
    }
    return "linear";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "linear") return ModelKind::linear;
    if (s == "weighted") return ModelKind::weighted;
    if (s == "boxcox") return ModelKind::boxcox;
    if (s == "ridge") return ModelKind::ridge;
    throw ConfigError("unknown model kind '" + s + "'");
}

FitResult fit_linear(const LinRegSS& ss) {
    if (ss.n() == 0) throw EmptyAccumulator("fit_linear on an empty accumulator");

    const SymMatrix sxx = ss.s_xx();
    NormalSolver solver(sxx);

    FitResult out;
    out.model_kind = ModelKind::linear;
    out.n = ss.n();
    out.p = ss.p();
    out.used_generalized_inverse = solver.used_generalized();
    out.beta = solver.solve(ss.s_xy());

    const double raw = (ss.s_yy() - dot(ss.s_xy(), out.beta)) / static_cast<double>(ss.n());
    const auto [sigma2, degenerate] = clamp_variance(raw, ss.s_yy(), ss.n());
    out.sigma2 = sigma2;
    out.cov = scaled(solver.inverse(), sigma2);
    out.score = degenerate ? kInf : loglik_linear(ss, out.beta, sigma2);
    return out;
}

double loglik_linear(const LinRegSS& ss, const RealVector& beta, double sigma2) {
    if (sigma2 <= 0.0) throw NonPositiveVariance("loglik_linear requires sigma2 > 0");
    if (beta.size() != ss.p()) throw DimensionMismatch("loglik_linear beta length mismatch");
    const double nn = static_cast<double>(ss.n());
    const double quad = ss.s_yy() - 2.0 * dot(ss.s_xy(), beta) + ss.s_xx().quad_form(beta);
    return -0.5 * nn * std::log(kTwoPi * sigma2) - quad / (2.0 * sigma2);
}

FitResult fit_weighted(const WeightedSS& ss) {
    if (ss.n() == 0) throw EmptyAccumulator("fit_weighted on an empty accumulator");

    const SymMatrix swxx = ss.s_wxx();
    NormalSolver solver(swxx);

    FitResult out;
    out.model_kind = ModelKind::weighted;
    out.n = ss.n();
    out.p = ss.p();
    out.used_generalized_inverse = solver.used_generalized();
    out.beta = solver.solve(ss.s_wxy());

    const double raw = (ss.s_wyy() - dot(ss.s_wxy(), out.beta)) / static_cast<double>(ss.n());
    const auto [sigma2, degenerate] = clamp_variance(raw, ss.s_wyy(), ss.n());
    out.sigma2 = sigma2;
    out.cov = scaled(solver.inverse(), out.sigma2);
    // SSE cost in SS form; an exact fit clamps to zero along with sigma2.
    out.score = degenerate ? 0.0
                           : ss.s_wyy() - 2.0 * dot(ss.s_wxy(), out.beta) +
                                 swxx.quad_form(out.beta);
    return out;
}

std::vector<BoxCoxFit> fit_boxcox_all(const BoxCoxSS& ss) {
    if (ss.n() == 0) throw EmptyAccumulator("fit_boxcox_all on an empty accumulator");

    const SymMatrix sxx = ss.s_xx();
    NormalSolver solver(sxx);  // factored once, reused for every c
    const SymMatrix& inv = solver.inverse();
    const double nn = static_cast<double>(ss.n());

    std::vector<BoxCoxFit> fits;
    fits.reserve(ss.grid().size());
    for (std::size_t ci = 0; ci < ss.grid().size(); ++ci) {
        const double c = ss.grid()[ci];
        BoxCoxFit entry;
        entry.c = c;
        FitResult& fit = entry.fit;
        fit.model_kind = ModelKind::boxcox;
        fit.param = c;
        fit.n = ss.n();
        fit.p = ss.p();
        fit.used_generalized_inverse = solver.used_generalized();
        fit.beta = solver.solve(ss.s_cxy(ci));

        const double raw = (ss.s_cyy(ci) - dot(ss.s_cxy(ci), fit.beta)) / nn;
        const auto [sigma2, degenerate] = clamp_variance(raw, ss.s_cyy(ci), ss.n());
        fit.sigma2 = sigma2;
        fit.cov = scaled(inv, sigma2);
        if (degenerate) {
            entry.profile_loglik = kInf;
        } else {
            const double quad = ss.s_cyy(ci) - 2.0 * dot(ss.s_cxy(ci), fit.beta) +
                                sxx.quad_form(fit.beta);
            entry.profile_loglik = -0.5 * nn * std::log(kTwoPi * sigma2) -
                                   quad / (2.0 * sigma2) + (c - 1.0) * ss.s_logy();
        }
        fit.score = entry.profile_loglik;
        fits.push_back(std::move(entry));
    }
    return fits;
}

const BoxCoxFit& select_boxcox(const std::vector<BoxCoxFit>& fits) {
    if (fits.empty()) throw ConfigError("select_boxcox on an empty result list");
    const BoxCoxFit* best = &fits.front();
    for (const BoxCoxFit& f : fits) {
        if (f.profile_loglik > best->profile_loglik) {
            best = &f;
        } else if (f.profile_loglik == best->profile_loglik) {
            if (std::abs(f.c) < std::abs(best->c) ||
                (std::abs(f.c) == std::abs(best->c) && f.c < best->c)) {
                best = &f;
            }
        }
    }
    return *best;
}

FitResult fit_ridge(const LinRegSS& ss, double lambda) {
    if (lambda < 0.0) throw NegativeLambda("ridge parameter must be >= 0");
    if (ss.n() == 0) throw EmptyAccumulator("fit_ridge on an empty accumulator");

    const SymMatrix sxx = ss.s_xx();
    const SymMatrix shifted = sxx.shifted_diagonal(lambda);
    NormalSolver solver(shifted);

    FitResult out;
    out.model_kind = ModelKind::ridge;
    out.param = lambda;
    out.n = ss.n();
    out.p = ss.p();
    out.used_generalized_inverse = solver.used_generalized();
    out.beta = solver.solve(ss.s_xy());

    const double nn = static_cast<double>(ss.n());
    const double raw = (ss.s_yy() - dot(ss.s_xy(), out.beta)) / nn;
    const auto [sigma2_clamped, degenerate] = clamp_variance(raw, ss.s_yy(), ss.n());
    out.sigma2 = sigma2_clamped;

    // Sandwich covariance: sigma2 * (S+lI)^-1 S (S+lI)^-1.
    const SymMatrix& inv = solver.inverse();
    const std::size_t p = ss.p();
    Matrix half(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < p; ++k) sum += inv(i, k) * sxx(k, j);
            half(i, j) = sum;
        }
    }
    SymMatrix cov(p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i; j < p; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < p; ++k) sum += half(i, k) * inv(k, j);
            cov.set(i, j, out.sigma2 * sum);
        }
    }
    out.cov = std::move(cov);

    // SSE cost with the n*lambda penalty as the cost function carries it. The
    // variance only degenerates at lambda = 0, where the cost is the plain
    // SSE and clamps to zero with it.
    out.score = degenerate ? 0.0
                           : ss.s_yy() - 2.0 * dot(ss.s_xy(), out.beta) +
                                 sxx.quad_form(out.beta) +
                                 nn * lambda * dot(out.beta, out.beta);
    return out;
}

RidgeTrace make_ridge_trace(const std::vector<FitResult>& fits, double tau) {
    if (fits.empty()) throw ConfigError("ridge trace needs a non-empty grid");
    RidgeTrace trace;
    trace.rows.reserve(fits.size());
    for (std::size_t k = 0; k < fits.size(); ++k) {
        const FitResult& f = fits[k];
        if (!f.param) throw ConfigError("ridge trace rows need a lambda parameter");
        if (k > 0 && *f.param <= *fits[k - 1].param) {
            throw ConfigError("ridge grid must be strictly increasing");
        }
        trace.rows.push_back({*f.param, f.beta, f.sigma2, f.score});
    }

    trace.stabilized = false;
    for (std::size_t k = 0; k + 1 < fits.size(); ++k) {
        const RealVector& cur = fits[k].beta;
        const RealVector& nxt = fits[k + 1].beta;
        double worst = 0.0;
        for (std::size_t j = 0; j < cur.size(); ++j) {
            worst = std::max(worst, std::abs(nxt[j] - cur[j]) / std::max(1.0, std::abs(cur[j])));
        }
        if (worst < tau) {
            trace.selected_lambda = *fits[k].param;
            trace.selection_rule_id = "first-lambda-stable";
            trace.stabilized = true;
            break;
        }
    }
    if (!trace.stabilized) {
        trace.selected_lambda = *fits.back().param;
        trace.selection_rule_id = "max-lambda-not-stabilized";
    }
    return trace;
}

RidgeTrace ridge_trace(const LinRegSS& ss, std::span<const double> grid, double tau) {
    if (grid.empty()) throw ConfigError("ridge trace needs a non-empty grid");
    std::vector<FitResult> fits;
    fits.reserve(grid.size());
    for (double lambda : grid) fits.push_back(fit_ridge(ss, lambda));
    return make_ridge_trace(fits, tau);
}

double predict(const FitResult& fit, std::span<const double> x, bool inverse_transform) {
    if (x.size() != fit.p) throw DimensionMismatch("predict: feature vector length mismatch");
    const double yhat = dot(fit.beta, x);
    if (!inverse_transform) return yhat;
    if (fit.model_kind != ModelKind::boxcox) {
        throw ConfigError("inverse transform only applies to Box-Cox fits");
    }
    const double c = *fit.param;
    if (c == 0.0) return std::exp(yhat);
    const double base = c * yhat + 1.0;
    if (base <= 0.0) {
        throw InverseTransformDomain("c*yhat + 1 = " + std::to_string(base) +
                                     " is outside the inverse Box-Cox domain");
    }
    return std::pow(base, 1.0 / c);
}

double mse(std::span<const double> y_true, std::span<const double> y_pred) {
    if (y_true.size() != y_pred.size()) throw DimensionMismatch("mse: length mismatch");
    if (y_true.empty()) throw ConfigError("mse of empty vectors");
    double sum = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double d = y_true[i] - y_pred[i];
        sum += d * d;
    }
    return sum / static_cast<double>(y_true.size());
}

}  // namespace ssreg
