#include "ssreg/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

namespace ssreg {

namespace {

std::atomic<std::uint64_t> g_factorizations{0};

void check_square_vector(const SymMatrix& a, const RealVector& b) {
    if (b.size() != a.dim()) {
        throw DimensionMismatch("vector length " + std::to_string(b.size()) +
                                " does not match matrix dimension " + std::to_string(a.dim()));
    }
}

// Packed row-major lower triangle index, j <= i.
inline std::size_t lower_index(std::size_t i, std::size_t j) { return i * (i + 1) / 2 + j; }

// Cholesky factorization into a packed lower triangle. Returns false when a
// pivot falls at or below pivot_floor.
bool cholesky_factor(const SymMatrix& a, double pivot_floor, std::vector<double>& l) {
    const std::size_t p = a.dim();
    l.assign(p * (p + 1) / 2, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = a(i, j);
            for (std::size_t k = 0; k < j; ++k) {
                sum -= l[lower_index(i, k)] * l[lower_index(j, k)];
            }
            if (i == j) {
                if (sum <= pivot_floor) return false;
                l[lower_index(i, i)] = std::sqrt(sum);
            } else {
                l[lower_index(i, j)] = sum / l[lower_index(j, j)];
            }
        }
    }
    return true;
}

RealVector cholesky_backsolve(const std::vector<double>& l, std::size_t p, const RealVector& b) {
    RealVector x(b);
    // L z = b
    for (std::size_t i = 0; i < p; ++i) {
        double sum = x[i];
        for (std::size_t k = 0; k < i; ++k) sum -= l[lower_index(i, k)] * x[k];
        x[i] = sum / l[lower_index(i, i)];
    }
    // L' x = z
    for (std::size_t ii = p; ii-- > 0;) {
        double sum = x[ii];
        for (std::size_t k = ii + 1; k < p; ++k) sum -= l[lower_index(k, ii)] * x[k];
        x[ii] = sum / l[lower_index(ii, ii)];
    }
    return x;
}

// A^-1 = L^-T L^-1 from the packed Cholesky factor.
SymMatrix cholesky_inverse(const std::vector<double>& l, std::size_t p) {
    // Invert L in place (lower triangular).
    std::vector<double> inv(l.size(), 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        inv[lower_index(i, i)] = 1.0 / l[lower_index(i, i)];
        for (std::size_t j = 0; j < i; ++j) {
            double sum = 0.0;
            for (std::size_t k = j; k < i; ++k) {
                sum -= l[lower_index(i, k)] * inv[lower_index(k, j)];
            }
            inv[lower_index(i, j)] = sum / l[lower_index(i, i)];
        }
    }
    SymMatrix out(p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i; j < p; ++j) {
            // (L^-T L^-1)_ij = sum_k invL_ki * invL_kj, k >= max(i, j) = j
            double sum = 0.0;
            for (std::size_t k = j; k < p; ++k) {
                sum += inv[lower_index(k, i)] * inv[lower_index(k, j)];
            }
            out.set(i, j, sum);
        }
    }
    return out;
}

double pivot_floor_for(const SymMatrix& a, double rank_tol) {
    if (rank_tol < 0.0) rank_tol = default_rank_tol(a.dim());
    double max_diag = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
    return rank_tol * max_diag;
}

}  // namespace

SymMatrix SymMatrix::from_upper(std::size_t p, std::span<const double> upper) {
    if (upper.size() != p * (p + 1) / 2) {
        throw DimensionMismatch("packed upper triangle has wrong length");
    }
    SymMatrix m(p);
    std::size_t k = 0;
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i; j < p; ++j) m.set(i, j, upper[k++]);
    }
    return m;
}

SymMatrix SymMatrix::shifted_diagonal(double shift) const {
    SymMatrix out(*this);
    for (std::size_t i = 0; i < p_; ++i) out.data_[i * p_ + i] += shift;
    return out;
}

std::vector<double> SymMatrix::upper_triangle() const {
    std::vector<double> u;
    u.reserve(p_ * (p_ + 1) / 2);
    for (std::size_t i = 0; i < p_; ++i) {
        for (std::size_t j = i; j < p_; ++j) u.push_back(data_[i * p_ + j]);
    }
    return u;
}

RealVector SymMatrix::multiply(std::span<const double> x) const {
    if (x.size() != p_) throw DimensionMismatch("SymMatrix::multiply length mismatch");
    RealVector y(p_, 0.0);
    for (std::size_t i = 0; i < p_; ++i) {
        const double* row = data_.data() + i * p_;
        double sum = 0.0;
        for (std::size_t j = 0; j < p_; ++j) sum += row[j] * x[j];
        y[i] = sum;
    }
    return y;
}

double SymMatrix::quad_form(std::span<const double> x) const {
    RealVector ax = multiply(x);
    return dot(ax, x);
}

double SymMatrix::frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

double SymMatrix::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

EigenDecomposition sym_eigen(const SymMatrix& a) {
    const std::size_t p = a.dim();
    constexpr int kMaxSweeps = 100;

    std::vector<double> m(p * p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) m[i * p + j] = a(i, j);
    }
    Matrix v(p, p);
    for (std::size_t i = 0; i < p; ++i) v(i, i) = 1.0;

    const double frob = a.frobenius_norm();
    const double stop = 1e-15 * frob;

    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = i + 1; j < p; ++j) s += m[i * p + j] * m[i * p + j];
        }
        return std::sqrt(2.0 * s);
    };

    bool converged = frob == 0.0 || p == 1;
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        if (off_norm() <= stop) {
            converged = true;
            break;
        }
        for (std::size_t i = 0; i + 1 < p; ++i) {
            for (std::size_t j = i + 1; j < p; ++j) {
                const double aij = m[i * p + j];
                if (std::abs(aij) <= 1e-300) {
                    m[i * p + j] = m[j * p + i] = 0.0;
                    continue;
                }
                const double theta = (m[j * p + j] - m[i * p + i]) / (2.0 * aij);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < p; ++k) {
                    const double mki = m[k * p + i];
                    const double mkj = m[k * p + j];
                    m[k * p + i] = c * mki - s * mkj;
                    m[k * p + j] = s * mki + c * mkj;
                }
                for (std::size_t k = 0; k < p; ++k) {
                    const double mik = m[i * p + k];
                    const double mjk = m[j * p + k];
                    m[i * p + k] = c * mik - s * mjk;
                    m[j * p + k] = s * mik + c * mjk;
                }
                for (std::size_t k = 0; k < p; ++k) {
                    const double vki = v(k, i);
                    const double vkj = v(k, j);
                    v(k, i) = c * vki - s * vkj;
                    v(k, j) = s * vki + c * vkj;
                }
            }
        }
    }
    if (!converged && off_norm() > stop) {
        throw EigenFailure("Jacobi eigensolver did not converge within 100 sweeps");
    }
    g_factorizations.fetch_add(1, std::memory_order_relaxed);

    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return m[x * p + x] > m[y * p + y]; });

    EigenDecomposition out;
    out.eigenvalues.resize(p);
    out.eigenvectors = Matrix(p, p);
    for (std::size_t col = 0; col < p; ++col) {
        const std::size_t src = order[col];
        out.eigenvalues[col] = m[src * p + src];
        for (std::size_t r = 0; r < p; ++r) out.eigenvectors(r, col) = v(r, src);
    }
    return out;
}

RealVector cholesky_solve(const SymMatrix& a, const RealVector& b, double rank_tol) {
    check_square_vector(a, b);
    std::vector<double> l;
    if (!cholesky_factor(a, pivot_floor_for(a, rank_tol), l)) {
        throw NotPositiveDefinite("Cholesky pivot at or below rank tolerance");
    }
    g_factorizations.fetch_add(1, std::memory_order_relaxed);
    return cholesky_backsolve(l, a.dim(), b);
}

SymMatrix pseudo_inverse(const SymMatrix& a, double rank_tol) {
    if (rank_tol < 0.0) rank_tol = default_rank_tol(a.dim());
    const std::size_t p = a.dim();
    const EigenDecomposition eig = sym_eigen(a);

    double wmax = 0.0;
    for (double w : eig.eigenvalues) wmax = std::max(wmax, std::abs(w));
    const double cutoff = rank_tol * wmax;

    RealVector winv(p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        if (std::abs(eig.eigenvalues[i]) > cutoff) winv[i] = 1.0 / eig.eigenvalues[i];
    }

    SymMatrix out(p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i; j < p; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < p; ++k) {
                sum += eig.eigenvectors(i, k) * winv[k] * eig.eigenvectors(j, k);
            }
            out.set(i, j, sum);
        }
    }
    return out;
}

NormalSolution solve_normal(const SymMatrix& a, const RealVector& b) {
    NormalSolver solver(a);
    return {solver.solve(b), solver.used_generalized()};
}

std::uint64_t factorization_count() { return g_factorizations.load(std::memory_order_relaxed); }

void reset_factorization_count() { g_factorizations.store(0, std::memory_order_relaxed); }

NormalSolver::NormalSolver(const SymMatrix& a, double rank_tol)
    : p_(a.dim()), rank_tol_(rank_tol < 0.0 ? default_rank_tol(a.dim()) : rank_tol) {
    if (cholesky_factor(a, pivot_floor_for(a, rank_tol_), chol_)) {
        g_factorizations.fetch_add(1, std::memory_order_relaxed);
        return;
    }
    chol_.clear();
    used_generalized_ = true;
    eig_ = sym_eigen(a);
    // Materialize the pseudo-inverse now; every generalized solve goes through it.
    double wmax = 0.0;
    for (double w : eig_->eigenvalues) wmax = std::max(wmax, std::abs(w));
    const double cutoff = rank_tol_ * wmax;
    RealVector winv(p_, 0.0);
    for (std::size_t i = 0; i < p_; ++i) {
        if (std::abs(eig_->eigenvalues[i]) > cutoff) winv[i] = 1.0 / eig_->eigenvalues[i];
    }
    SymMatrix pinv(p_);
    for (std::size_t i = 0; i < p_; ++i) {
        for (std::size_t j = i; j < p_; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < p_; ++k) {
                sum += eig_->eigenvectors(i, k) * winv[k] * eig_->eigenvectors(j, k);
            }
            pinv.set(i, j, sum);
        }
    }
    inverse_ = std::move(pinv);
}

RealVector NormalSolver::solve(const RealVector& b) const {
    if (b.size() != p_) throw DimensionMismatch("NormalSolver::solve length mismatch");
    if (!used_generalized_) return cholesky_backsolve(chol_, p_, b);
    return inverse_->multiply(b);
}

const SymMatrix& NormalSolver::inverse() const {
    if (!inverse_) inverse_ = cholesky_inverse(chol_, p_);
    return *inverse_;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace ssreg
