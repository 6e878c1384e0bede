#include <doctest.h>

#include <cmath>
#include <random>

#include "ssreg/linalg.hpp"
#include "test_support.hpp"

using namespace ssreg;
using namespace ssreg::testing;

namespace {

SymMatrix sym2(double a, double b, double d) {
    SymMatrix m(2);
    m.set(0, 0, a);
    m.set(0, 1, b);
    m.set(1, 1, d);
    return m;
}

// Reconstruction residual max|V diag(w) V' - A| relative to max|A|.
double reconstruction_error(const SymMatrix& a, const EigenDecomposition& eig) {
    const std::size_t p = a.dim();
    double worst = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < p; ++k) {
                sum += eig.eigenvectors(i, k) * eig.eigenvalues[k] * eig.eigenvectors(j, k);
            }
            worst = std::max(worst, std::abs(sum - a(i, j)));
        }
    }
    return worst / std::max(a.max_abs(), 1e-300);
}

double orthogonality_error(const Matrix& v) {
    const std::size_t p = v.rows();
    double worst = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < p; ++k) sum += v(k, i) * v(k, j);
            worst = std::max(worst, std::abs(sum - (i == j ? 1.0 : 0.0)));
        }
    }
    return worst;
}

SymMatrix random_spd(std::mt19937_64& rng, std::size_t p) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Matrix m(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) m(i, j) = unif(rng);
    }
    SymMatrix a(p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i; j < p; ++j) {
            double sum = i == j ? 1.0 : 0.0;  // M'M + I
            for (std::size_t k = 0; k < p; ++k) sum += m(k, i) * m(k, j);
            a.set(i, j, sum);
        }
    }
    return a;
}

SymMatrix random_rank_deficient(std::mt19937_64& rng, std::size_t p, std::size_t r) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Matrix m(p, r);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < r; ++j) m(i, j) = unif(rng);
    }
    SymMatrix a(p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i; j < p; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < r; ++k) sum += m(i, k) * m(j, k);
            a.set(i, j, sum);
        }
    }
    return a;
}

double penrose_error(const SymMatrix& a, const SymMatrix& pinv) {
    const std::size_t p = a.dim();
    auto mul = [p](const SymMatrix& x, const SymMatrix& y) {
        Matrix out(p, p);
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = 0; j < p; ++j) {
                double sum = 0.0;
                for (std::size_t k = 0; k < p; ++k) sum += x(i, k) * y(k, j);
                out(i, j) = sum;
            }
        }
        return out;
    };
    const Matrix ap = mul(a, pinv);
    const Matrix pa = mul(pinv, a);
    double worst = 0.0;
    // (A A+)' = A A+ and (A+ A)' = A+ A
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            worst = std::max(worst, std::abs(ap(i, j) - ap(j, i)));
            worst = std::max(worst, std::abs(pa(i, j) - pa(j, i)));
        }
    }
    // A A+ A = A, A+ A A+ = A+
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            double apa = 0.0;
            double pap = 0.0;
            for (std::size_t k = 0; k < p; ++k) {
                apa += ap(i, k) * a(k, j);
                pap += pa(i, k) * pinv(k, j);
            }
            worst = std::max(worst, std::abs(apa - a(i, j)));
            worst = std::max(worst, std::abs(pap - pinv(i, j)));
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("sym_eigen identity") {
    const auto eig = sym_eigen(SymMatrix::identity(2));
    CHECK(eig.eigenvalues[0] == doctest::Approx(1.0));
    CHECK(eig.eigenvalues[1] == doctest::Approx(1.0));
    CHECK(orthogonality_error(eig.eigenvectors) < 1e-12);
}

TEST_CASE("sym_eigen diagonal sorts descending") {
    const auto eig = sym_eigen(sym2(2.0, 0.0, 3.0));
    CHECK(eig.eigenvalues[0] == doctest::Approx(3.0));
    CHECK(eig.eigenvalues[1] == doctest::Approx(2.0));
}

TEST_CASE("sym_eigen rank-1 matrix") {
    const SymMatrix a = sym2(5.0, 5.0, 5.0);
    const auto eig = sym_eigen(a);
    CHECK(eig.eigenvalues[0] == doctest::Approx(10.0));
    CHECK(eig.eigenvalues[1] == doctest::Approx(0.0));
    // First eigenvector proportional to [1, 1].
    CHECK(std::abs(eig.eigenvectors(0, 0)) ==
          doctest::Approx(std::abs(eig.eigenvectors(1, 0))));
    CHECK(eig.eigenvectors(0, 0) * eig.eigenvectors(1, 0) > 0.0);
    CHECK(reconstruction_error(a, eig) < 1e-10);
}

TEST_CASE("sym_eigen reconstruction on random symmetric matrices") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(-5.0, 5.0);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t p = 1 + rng() % 30;
        SymMatrix a(p);
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = i; j < p; ++j) a.set(i, j, unif(rng));
        }
        const auto eig = sym_eigen(a);
        CHECK(reconstruction_error(a, eig) < 1e-10);
        CHECK(orthogonality_error(eig.eigenvectors) < 1e-10);
        for (std::size_t k = 1; k < p; ++k) {
            CHECK(eig.eigenvalues[k - 1] >= eig.eigenvalues[k]);
        }
    }
}

TEST_CASE("cholesky_solve identity") {
    const RealVector x = cholesky_solve(SymMatrix::identity(3), {1.0, 2.0, 3.0});
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(2.0));
    CHECK(x[2] == doctest::Approx(3.0));
}

TEST_CASE("cholesky_solve 2x2") {
    const RealVector x = cholesky_solve(sym2(2.0, 1.0, 1.0), {4.0, 3.0});
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(2.0));
}

TEST_CASE("cholesky_solve rejects singular matrices") {
    CHECK_THROWS_AS(cholesky_solve(sym2(5.0, 5.0, 5.0), {1.0, 1.0}), NotPositiveDefinite);
}

TEST_CASE("cholesky_solve rejects mismatched lengths") {
    CHECK_THROWS_AS(cholesky_solve(SymMatrix::identity(3), {1.0, 2.0}), DimensionMismatch);
}

TEST_CASE("cholesky_solve residual on random SPD systems") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t p = 1 + rng() % 40;
        const SymMatrix a = random_spd(rng, p);
        RealVector b(p);
        for (auto& v : b) v = unif(rng);
        const RealVector x = cholesky_solve(a, b);
        const RealVector ax = a.multiply(x);
        double rnorm = 0.0;
        for (std::size_t i = 0; i < p; ++i) rnorm += (ax[i] - b[i]) * (ax[i] - b[i]);
        CHECK(std::sqrt(rnorm) < 1e-10 * std::max(1e-300, norm2(b)));
    }
}

TEST_CASE("pseudo_inverse identity") {
    const SymMatrix p = pseudo_inverse(SymMatrix::identity(2));
    CHECK(rel_diff(p, SymMatrix::identity(2)) < 1e-14);
}

TEST_CASE("pseudo_inverse rank-1") {
    const SymMatrix p = pseudo_inverse(sym2(5.0, 5.0, 5.0));
    CHECK(p(0, 0) == doctest::Approx(0.05));
    CHECK(p(0, 1) == doctest::Approx(0.05));
    CHECK(p(1, 1) == doctest::Approx(0.05));
    CHECK(penrose_error(sym2(5.0, 5.0, 5.0), p) < 1e-8 * 10.0);
}

TEST_CASE("pseudo_inverse of zero is zero") {
    const SymMatrix p = pseudo_inverse(SymMatrix(2));
    CHECK(p(0, 0) == 0.0);
    CHECK(p(0, 1) == 0.0);
    CHECK(p(1, 1) == 0.0);
}

TEST_CASE("pseudo_inverse satisfies the Penrose conditions on rank-deficient input") {
    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t p = 2 + rng() % 20;
        const std::size_t r = 1 + rng() % (p - 1);
        const SymMatrix a = random_rank_deficient(rng, p, r);
        const SymMatrix pinv = pseudo_inverse(a);
        CHECK(penrose_error(a, pinv) < 1e-8 * std::max(1.0, a.max_abs()));
    }
}

TEST_CASE("solve_normal identity") {
    const auto [x, generalized] = solve_normal(SymMatrix::identity(2), {7.0, 9.0});
    CHECK(x[0] == doctest::Approx(7.0));
    CHECK(x[1] == doctest::Approx(9.0));
    CHECK_FALSE(generalized);
}

TEST_CASE("solve_normal PD path") {
    const auto [x, generalized] = solve_normal(sym2(2.0, 1.0, 1.0), {4.0, 3.0});
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(2.0));
    CHECK_FALSE(generalized);
}

TEST_CASE("solve_normal falls back to the generalized inverse") {
    const auto [x, generalized] = solve_normal(sym2(5.0, 5.0, 5.0), {10.0, 10.0});
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(1.0));
    CHECK(generalized);
}

TEST_CASE("solve_normal agrees with the pseudo-inverse route on SPD input") {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t p = 1 + rng() % 15;
        const SymMatrix a = random_spd(rng, p);
        RealVector b(p);
        for (auto& v : b) v = unif(rng);
        const auto [x, generalized] = solve_normal(a, b);
        CHECK_FALSE(generalized);
        const RealVector via_pinv = pseudo_inverse(a).multiply(b);
        CHECK(rel_diff(x, via_pinv) < 1e-8);
    }
}

TEST_CASE("NormalSolver inverse matches solves") {
    std::mt19937_64 rng(15);
    const SymMatrix a = random_spd(rng, 8);
    NormalSolver solver(a);
    const SymMatrix& inv = solver.inverse();
    RealVector b(8);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (auto& v : b) v = unif(rng);
    CHECK(rel_diff(solver.solve(b), inv.multiply(b)) < 1e-10);
}

TEST_CASE("default_rank_tol scales with dimension") {
    CHECK(default_rank_tol(1) == doctest::Approx(1e-12));
    CHECK(default_rank_tol(100) == doctest::Approx(1e-10));
}
