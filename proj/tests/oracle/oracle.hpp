#pragma once

// Dense in-memory reference fits computed straight from raw X and y. These
// deliberately share no solver code with the streaming path: inverses come
// from the adjugate for p <= 3 and from an independent Householder+QL
// eigendecomposition otherwise.

#include <span>
#include <vector>

#include "ssreg/estimators.hpp"
#include "ssreg/linalg.hpp"

namespace ssreg::oracle {

struct SymInverse {
    Matrix inv;
    bool used_generalized = false;
};

/// Inverse (or Moore-Penrose pseudo-inverse, with the flag set) of a symmetric
/// matrix held as a full dense Matrix.
SymInverse sym_inverse(const Matrix& a);

/// Eigenvalues (ascending) and eigenvector columns via Householder
/// tridiagonalization and implicit QL iterations.
struct EigenPairs {
    RealVector values;
    Matrix vectors;
};
EigenPairs sym_eigen_ql(const Matrix& a);

FitResult dense_ols(const Matrix& x, const RealVector& y);

FitResult dense_weighted(const Matrix& x, const RealVector& y, const RealVector& w);

struct BoxCoxDenseFit {
    double c = 0.0;
    FitResult fit;
    double profile_loglik = 0.0;
};
std::vector<BoxCoxDenseFit> dense_boxcox(const Matrix& x, const RealVector& y,
                                         std::span<const double> grid);

FitResult dense_ridge(const Matrix& x, const RealVector& y, double lambda);

}  // namespace ssreg::oracle
