#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ssreg/estimators.hpp"
#include "test_support.hpp"

using namespace ssreg;
using namespace ssreg::testing;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// n=2 accumulator with S_xx=[[5,5],[5,5]], s_xy=[10,10], s_yy=20: two rows of
// a duplicated column with responses on the column space.
LinRegSS singular_ss() {
    LinRegSS ss(2);
    ss.add_row(RealVector{1.0, 1.0}, 2.0);
    ss.add_row(RealVector{2.0, 2.0}, 4.0);
    return ss;
}

}  // namespace

TEST_CASE("fit_linear on T1 is an exact fit") {
    const FitResult fit = fit_linear(linreg_of(t1_x(), t1_y()));
    CHECK(fit.beta[0] == doctest::Approx(1.0));
    CHECK(fit.beta[1] == doctest::Approx(2.0));
    CHECK(fit.sigma2 == 0.0);
    CHECK(std::isinf(fit.score));
    CHECK_FALSE(fit.used_generalized_inverse);
}

TEST_CASE("fit_linear on T2") {
    const FitResult fit = fit_linear(linreg_of(t2_x(), t2_y()));
    CHECK(fit.beta[0] == doctest::Approx(7.0 / 6.0));
    CHECK(fit.beta[1] == doctest::Approx(1.5));
    CHECK(fit.sigma2 == doctest::Approx(1.0 / 18.0));
    CHECK(fit.score == doctest::Approx(-1.5 * std::log(kTwoPi / 18.0) - 1.5));
    CHECK(fit.n == 3);
    CHECK(fit.p == 2);
}

TEST_CASE("fit_linear takes the generalized path on singular statistics") {
    const LinRegSS ss = singular_ss();
    CHECK(ss.s_xx()(0, 0) == 5.0);
    CHECK(ss.s_xx()(0, 1) == 5.0);
    CHECK(ss.s_yy() == 20.0);
    const FitResult fit = fit_linear(ss);
    CHECK(fit.used_generalized_inverse);
    CHECK(fit.beta[0] == doctest::Approx(1.0));
    CHECK(fit.beta[1] == doctest::Approx(1.0));
}

TEST_CASE("fit_linear rejects empty accumulators") {
    CHECK_THROWS_AS(fit_linear(LinRegSS(2)), EmptyAccumulator);
}

TEST_CASE("loglik_linear") {
    const LinRegSS ss = linreg_of(t2_x(), t2_y());
    const FitResult fit = fit_linear(ss);

    CHECK(loglik_linear(ss, fit.beta, 1.0 / 18.0) ==
          doctest::Approx(-1.5 * std::log(kTwoPi / 18.0) - 1.5));
    // beta = 0, sigma2 = 1 collapses to -n/2 log(2 pi) - s_yy / 2.
    CHECK(loglik_linear(ss, RealVector{0.0, 0.0}, 1.0) ==
          doctest::Approx(-1.5 * std::log(kTwoPi) - 13.0));
    // At the fitted beta with sigma2 = 1 the quadratic is the SSE = 1/6.
    CHECK(loglik_linear(ss, fit.beta, 1.0) ==
          doctest::Approx(-1.5 * std::log(kTwoPi) - (1.0 / 6.0) / 2.0));
    CHECK_THROWS_AS(loglik_linear(ss, fit.beta, 0.0), NonPositiveVariance);
}

TEST_CASE("fit_weighted with unit weights equals fit_linear") {
    WeightedSS w(2);
    w.add_batch(t1_x(), t1_y(), RealVector{1.0, 1.0});
    const FitResult fit = fit_weighted(w);
    CHECK(fit.beta[0] == doctest::Approx(1.0));
    CHECK(fit.beta[1] == doctest::Approx(2.0));
    CHECK(fit.model_kind == ModelKind::weighted);
}

TEST_CASE("fit_weighted neutralizes zero-weight rows") {
    WeightedSS w(2);
    w.add_batch(t2_x(), t2_y(), RealVector{1.0, 1.0, 0.0});
    const FitResult fit = fit_weighted(w);
    CHECK(fit.beta[0] == doctest::Approx(1.0));
    CHECK(fit.beta[1] == doctest::Approx(2.0));
    CHECK(fit.sigma2 == 0.0);
}

TEST_CASE("fit_weighted with all-zero weights degenerates to the zero fit") {
    WeightedSS w(2);
    w.add_batch(t2_x(), t2_y(), RealVector{0.0, 0.0, 0.0});
    const FitResult fit = fit_weighted(w);
    CHECK(fit.beta == RealVector{0.0, 0.0});
    CHECK(fit.score == 0.0);
    CHECK(fit.used_generalized_inverse);
}

TEST_CASE("fit_boxcox_all finds the exact log fit on T3") {
    BoxCoxSS ss(2, {0.0});
    ss.add_batch(t2_x(), t3_y());
    const auto fits = fit_boxcox_all(ss);
    REQUIRE(fits.size() == 1);
    CHECK(fits[0].fit.beta[0] == doctest::Approx(0.0));
    CHECK(fits[0].fit.beta[1] == doctest::Approx(1.0));
    CHECK(fits[0].fit.sigma2 == 0.0);
    CHECK(std::isinf(fits[0].profile_loglik));
}

TEST_CASE("fit_boxcox_all at c=1 shifts only the intercept") {
    BoxCoxSS ss(2, {1.0});
    ss.add_batch(t2_x(), t2_y());
    const auto fits = fit_boxcox_all(ss);
    CHECK(fits[0].fit.beta[0] == doctest::Approx(7.0 / 6.0 - 1.0));
    CHECK(fits[0].fit.beta[1] == doctest::Approx(1.5));
    CHECK(fits[0].fit.sigma2 == doctest::Approx(1.0 / 18.0));
    CHECK(fits[0].profile_loglik == doctest::Approx(-1.5 * std::log(kTwoPi / 18.0) - 1.5));
}

TEST_CASE("boxcox c=1 shift property on random positive data") {
    std::mt19937_64 rng(41);
    const std::size_t p = 5;
    const RandomProblem prob = random_problem(rng, 211, p, 0.4, true);

    BoxCoxSS bc(p, {1.0});
    bc.add_batch(prob.x, prob.y);
    const auto fits = fit_boxcox_all(bc);

    const FitResult lin = fit_linear(linreg_of(prob.x, prob.y));
    CHECK(rel_diff(fits[0].fit.beta[0], lin.beta[0] - 1.0) < 1e-10);
    for (std::size_t j = 1; j < p; ++j) {
        CHECK(rel_diff(fits[0].fit.beta[j], lin.beta[j]) < 1e-10);
    }
    CHECK(rel_diff(fits[0].fit.sigma2, lin.sigma2) < 1e-12);

    // Profile loglikelihood equals the linear loglikelihood of the shifted
    // response; the (c-1) s_logy term vanishes.
    RealVector shifted = prob.y;
    for (double& v : shifted) v -= 1.0;
    const FitResult lin_shifted = fit_linear(linreg_of(prob.x, shifted));
    CHECK(rel_diff(fits[0].profile_loglik, lin_shifted.score) < 1e-10);
}

TEST_CASE("fit_boxcox_all factors the shared matrix exactly once") {
    std::mt19937_64 rng(42);
    const RandomProblem prob = random_problem(rng, 103, 4, 0.5, true);
    RealVector grid;
    for (int k = 0; k <= 30; ++k) grid.push_back(-1.5 + 0.1 * k);
    BoxCoxSS ss(4, grid);
    ss.add_batch(prob.x, prob.y);

    const std::uint64_t before = factorization_count();
    const auto fits = fit_boxcox_all(ss);
    CHECK(fits.size() == 31);
    CHECK(factorization_count() - before == 1);
}

TEST_CASE("select_boxcox picks the largest profile loglikelihood") {
    std::vector<BoxCoxFit> fits(2);
    fits[0].c = 0.0;
    fits[0].profile_loglik = std::numeric_limits<double>::infinity();
    fits[1].c = 1.0;
    fits[1].profile_loglik = 0.0789;
    CHECK(select_boxcox(fits).c == 0.0);

    CHECK(select_boxcox({fits[1]}).c == 1.0);
}

TEST_CASE("select_boxcox breaks exact ties toward smaller |c| then smaller c") {
    std::vector<BoxCoxFit> fits(2);
    fits[0].c = -0.5;
    fits[0].profile_loglik = 1.0;
    fits[1].c = 0.5;
    fits[1].profile_loglik = 1.0;
    CHECK(select_boxcox(fits).c == -0.5);
    std::swap(fits[0], fits[1]);
    CHECK(select_boxcox(fits).c == -0.5);
}

TEST_CASE("fit_ridge reduces to OLS at lambda 0") {
    const LinRegSS ss = linreg_of(t1_x(), t1_y());
    const FitResult ridge = fit_ridge(ss, 0.0);
    CHECK(ridge.beta[0] == doctest::Approx(1.0));
    CHECK(ridge.beta[1] == doctest::Approx(2.0));
}

TEST_CASE("fit_ridge on T1 at lambda 1") {
    const FitResult fit = fit_ridge(linreg_of(t1_x(), t1_y()), 1.0);
    CHECK(fit.beta[0] == doctest::Approx(1.0));
    CHECK(fit.beta[1] == doctest::Approx(1.0));
    CHECK(fit.sigma2 == doctest::Approx(1.5));
    CHECK(fit.cov(0, 0) == doctest::Approx(0.3));
    CHECK(fit.cov(1, 1) == doctest::Approx(0.3));
    CHECK(fit.cov(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("ridge coefficients shrink toward zero for huge lambda") {
    const LinRegSS ss = linreg_of(t1_x(), t1_y());
    double prev = norm2(fit_ridge(ss, 1e3).beta);
    for (double lambda : {1e5, 1e7, 1e9}) {
        const double cur = norm2(fit_ridge(ss, lambda).beta);
        CHECK(cur < prev);
        prev = cur;
    }
    CHECK(prev < 1e-8);
    CHECK_THROWS_AS(fit_ridge(ss, -0.1), NegativeLambda);
}

TEST_CASE("ridge_trace on T1 with D={0,1}") {
    const RealVector grid{0.0, 1.0};
    const RidgeTrace trace = ridge_trace(linreg_of(t1_x(), t1_y()), grid);
    REQUIRE(trace.rows.size() == 2);
    CHECK(trace.rows[0].lambda == 0.0);
    CHECK(trace.rows[0].beta[0] == doctest::Approx(1.0));
    CHECK(trace.rows[0].beta[1] == doctest::Approx(2.0));
    CHECK(trace.rows[1].beta[0] == doctest::Approx(1.0));
    CHECK(trace.rows[1].beta[1] == doctest::Approx(1.0));
    // The step exceeds tau, so the largest lambda wins with a warning.
    CHECK_FALSE(trace.stabilized);
    CHECK(trace.selected_lambda == 1.0);
    CHECK(trace.selection_rule_id == "max-lambda-not-stabilized");
}

TEST_CASE("ridge_trace on a single-point grid warns") {
    const RidgeTrace trace = ridge_trace(linreg_of(t1_x(), t1_y()), RealVector{0.0});
    CHECK(trace.selected_lambda == 0.0);
    CHECK_FALSE(trace.stabilized);
}

TEST_CASE("ridge_trace flags the generalized inverse only at lambda 0") {
    LinRegSS ss(2);
    ss.add_row(RealVector{1.0, 1.0}, 2.0);
    ss.add_row(RealVector{2.0, 2.0}, 3.0);
    ss.add_row(RealVector{-1.0, -1.0}, 0.5);
    const FitResult at0 = fit_ridge(ss, 0.0);
    const FitResult at01 = fit_ridge(ss, 0.1);
    CHECK(at0.used_generalized_inverse);
    CHECK_FALSE(at01.used_generalized_inverse);
    // lambda I restores strict positive definiteness.
    const auto eig = sym_eigen(ss.s_xx().shifted_diagonal(0.1));
    CHECK(eig.eigenvalues.back() >= 0.1 * (1.0 - 1e-9));

    CHECK_THROWS_AS(ridge_trace(ss, RealVector{}), ConfigError);
}

TEST_CASE("ridge_trace selects the first stable step") {
    std::mt19937_64 rng(43);
    const RandomProblem prob = random_problem(rng, 500, 3, 0.1);
    const LinRegSS ss = linreg_of(prob.x, prob.y);
    // Tiny lambdas barely move the coefficients, so the first step qualifies.
    const RidgeTrace trace = ridge_trace(ss, RealVector{0.0, 1e-8, 1e-7});
    CHECK(trace.stabilized);
    CHECK(trace.selected_lambda == 0.0);
    CHECK(trace.selection_rule_id == "first-lambda-stable");
}

TEST_CASE("predict") {
    const FitResult t1_fit = fit_linear(linreg_of(t1_x(), t1_y()));
    CHECK(predict(t1_fit, RealVector{1.0, 1.0}) == doctest::Approx(3.0));

    const FitResult t2_fit = fit_linear(linreg_of(t2_x(), t2_y()));
    CHECK(predict(t2_fit, RealVector{1.0, 0.0}) == doctest::Approx(7.0 / 6.0));

    CHECK_THROWS_AS(predict(t1_fit, RealVector{1.0}), DimensionMismatch);
    CHECK_THROWS_AS(predict(t1_fit, RealVector{1.0, 1.0}, true), ConfigError);
}

TEST_CASE("predict inverts the Box-Cox transform") {
    BoxCoxSS ss(2, {0.0});
    ss.add_batch(t2_x(), t3_y());
    const auto fits = fit_boxcox_all(ss);
    const double pred = predict(fits[0].fit, RealVector{1.0, 2.0}, true);
    CHECK(pred == doctest::Approx(std::exp(2.0)));

    // c != 0 with c*yhat+1 <= 0 leaves the transform's domain.
    FitResult bad = fits[0].fit;
    bad.param = 1.0;
    bad.beta = RealVector{-2.0, 0.0};
    CHECK_THROWS_AS(predict(bad, RealVector{1.0, 0.0}, true), InverseTransformDomain);
}

TEST_CASE("mse") {
    CHECK(mse(RealVector{1.0, 2.0}, RealVector{1.0, 2.0}) == 0.0);
    CHECK(mse(RealVector{0.0, 2.0}, RealVector{1.0, 1.0}) == 1.0);
    CHECK_THROWS_AS(mse(RealVector{1.0}, RealVector{1.0, 2.0}), DimensionMismatch);
    CHECK_THROWS_AS(mse(RealVector{}, RealVector{}), ConfigError);
}

TEST_CASE("in-sample mse equals sigma2") {
    const Matrix x = t2_x();
    const RealVector y = t2_y();
    const FitResult fit = fit_linear(linreg_of(x, y));
    RealVector yhat(3);
    for (std::size_t r = 0; r < 3; ++r) yhat[r] = predict(fit, x.row(r));
    CHECK(rel_diff(mse(y, yhat), fit.sigma2) < 1e-10);
    CHECK(mse(y, yhat) == doctest::Approx(1.0 / 18.0));
}

TEST_CASE("normal-equation residual is tiny on the Cholesky path") {
    std::mt19937_64 rng(44);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t p = 1 + rng() % 12;
        const RandomProblem prob = random_problem(rng, 200 + rng() % 500, p, 1.0);
        const LinRegSS ss = linreg_of(prob.x, prob.y);
        const FitResult fit = fit_linear(ss);
        REQUIRE_FALSE(fit.used_generalized_inverse);
        const RealVector lhs = ss.s_xx().multiply(fit.beta);
        double resid = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            resid += (lhs[j] - ss.s_xy()[j]) * (lhs[j] - ss.s_xy()[j]);
        }
        CHECK(std::sqrt(resid) <= 1e-8 * norm2(ss.s_xy()));
    }
}

TEST_CASE("fit_ridge at lambda 0 equals fit_linear to high precision") {
    std::mt19937_64 rng(45);
    for (int rep = 0; rep < 5; ++rep) {
        const RandomProblem prob = random_problem(rng, 300, 6, 0.8);
        const LinRegSS ss = linreg_of(prob.x, prob.y);
        const FitResult lin = fit_linear(ss);
        const FitResult ridge = fit_ridge(ss, 0.0);
        CHECK(rel_diff(ridge.beta, lin.beta) < 1e-12);
        CHECK(rel_diff(ridge.sigma2, lin.sigma2) < 1e-12);
        CHECK(rel_diff(ridge.cov, lin.cov) < 1e-12);
    }
}

TEST_CASE("penalized SSE at the ridge optimum dominates the OLS SSE") {
    std::mt19937_64 rng(46);
    const RandomProblem prob = random_problem(rng, 400, 5, 1.0);
    const LinRegSS ss = linreg_of(prob.x, prob.y);
    const FitResult ols = fit_linear(ss);
    const double sse_ols = ss.s_yy() - 2.0 * dot(ss.s_xy(), ols.beta) +
                           ss.s_xx().quad_form(ols.beta);
    for (double lambda : {0.01, 0.1, 1.0, 10.0}) {
        const FitResult ridge = fit_ridge(ss, lambda);
        CHECK(ridge.score >= sse_ols - 1e-9 * std::abs(sse_ols));
    }
}
