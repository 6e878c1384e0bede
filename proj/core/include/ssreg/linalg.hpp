#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ssreg/errors.hpp"

namespace ssreg {

using RealVector = std::vector<double>;

/// Dense row-major matrix. General (not necessarily symmetric); used for
/// eigenvector bases and for in-memory design matrices in tests.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    /// Row view (length cols()).
    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Dense p x p symmetric matrix. Every mutator writes both mirror entries, so
/// entries[i][j] == entries[j][i] holds exactly at all times.
class SymMatrix {
  public:
    SymMatrix() = default;
    explicit SymMatrix(std::size_t p) : p_(p), data_(p * p, 0.0) {}

    static SymMatrix identity(std::size_t p) {
        SymMatrix m(p);
        for (std::size_t i = 0; i < p; ++i) m.data_[i * p + i] = 1.0;
        return m;
    }

    /// Build from the packed row-major upper triangle (length p*(p+1)/2),
    /// mirroring into the lower half.
    static SymMatrix from_upper(std::size_t p, std::span<const double> upper);

    std::size_t dim() const { return p_; }

    double operator()(std::size_t i, std::size_t j) const { return data_[i * p_ + j]; }

    void set(std::size_t i, std::size_t j, double v) {
        data_[i * p_ + j] = v;
        data_[j * p_ + i] = v;
    }

    void add(std::size_t i, std::size_t j, double v) {
        data_[i * p_ + j] += v;
        if (i != j) data_[j * p_ + i] += v;
    }

    /// A + shift*I, used for ridge systems.
    SymMatrix shifted_diagonal(double shift) const;

    /// Packed row-major upper triangle, length p*(p+1)/2.
    std::vector<double> upper_triangle() const;

    const double* data() const { return data_.data(); }

    RealVector multiply(std::span<const double> x) const;

    /// x' * A * x
    double quad_form(std::span<const double> x) const;

    double frobenius_norm() const;
    double max_abs() const;

  private:
    std::size_t p_ = 0;
    std::vector<double> data_;
};

/// Result of sym_eigen: A = V diag(w) V' with eigenvalues descending and
/// orthonormal eigenvector columns.
struct EigenDecomposition {
    RealVector eigenvalues;
    Matrix eigenvectors;
};

/// Relative spectral cutoff scaled by dimension.
inline double default_rank_tol(std::size_t p) { return 1e-12 * static_cast<double>(p); }

/// Eigendecomposition of a symmetric matrix via cyclic Jacobi rotations.
/// Throws EigenFailure after 100 sweeps without convergence.
EigenDecomposition sym_eigen(const SymMatrix& a);

/// Solve A x = b for symmetric positive definite A. Throws NotPositiveDefinite
/// when a Cholesky pivot falls at or below rank_tol * max|a_ii|.
RealVector cholesky_solve(const SymMatrix& a, const RealVector& b, double rank_tol = -1.0);

/// Moore-Penrose pseudo-inverse V diag(w+) V' where eigenvalues with
/// |w_i| <= rank_tol * max|w| are zeroed.
SymMatrix pseudo_inverse(const SymMatrix& a, double rank_tol = -1.0);

struct NormalSolution {
    RealVector x;
    bool used_generalized = false;
};

/// Solve A x = b: Cholesky when positive definite, pseudo-inverse otherwise.
NormalSolution solve_normal(const SymMatrix& a, const RealVector& b);

/// Count of matrix factorizations (Cholesky or eigen) performed so far.
/// Lets tests observe that grid fits factor the shared matrix exactly once.
std::uint64_t factorization_count();
void reset_factorization_count();

/// Factors A once and serves repeated solves and the explicit inverse.
/// Tries Cholesky first; on NotPositiveDefinite falls back to the
/// eigendecomposition-based pseudo-inverse.
class NormalSolver {
  public:
    explicit NormalSolver(const SymMatrix& a, double rank_tol = -1.0);

    RealVector solve(const RealVector& b) const;

    /// A^-1 (Cholesky path) or A^+ (generalized path). Computed once, cached.
    const SymMatrix& inverse() const;

    bool used_generalized() const { return used_generalized_; }
    std::size_t dim() const { return p_; }

  private:
    std::size_t p_ = 0;
    double rank_tol_ = 0.0;
    bool used_generalized_ = false;
    // Packed row-major lower-triangular Cholesky factor when PD.
    std::vector<double> chol_;
    std::optional<EigenDecomposition> eig_;
    mutable std::optional<SymMatrix> inverse_;
};

// Small vector helpers shared across modules.
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
double max_abs(std::span<const double> v);

}  // namespace ssreg
