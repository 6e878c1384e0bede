#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ssreg/linalg.hpp"

namespace ssreg {

/// Accumulators are updated in plain 64-bit floating point, no compensated
/// summation; tolerances elsewhere absorb summation-order effects. Only the
/// upper triangle of the x'x statistic is accumulated and it is mirrored on
/// read.

namespace detail {

/// Packed row-major upper triangle of a p x p symmetric sum.
class UpperTriangle {
  public:
    UpperTriangle() = default;
    explicit UpperTriangle(std::size_t p) : p_(p), data_(p * (p + 1) / 2, 0.0) {}

    std::size_t dim() const { return p_; }
    std::span<const double> packed() const { return data_; }
    std::vector<double>& raw() { return data_; }

    /// += scale * x x'
    void add_outer(const double* x, double scale) {
        double* out = data_.data();
        for (std::size_t i = 0; i < p_; ++i) {
            const double xi = scale * x[i];
            for (std::size_t j = i; j < p_; ++j) *out++ += xi * x[j];
        }
    }

    void add(const UpperTriangle& o) {
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    }
    void subtract(const UpperTriangle& o) {
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    }

    SymMatrix to_sym() const { return SymMatrix::from_upper(p_, data_); }

  private:
    std::size_t p_ = 0;
    std::vector<double> data_;
};

}  // namespace detail

inline constexpr std::size_t kDefaultBatchSize = 128;

struct SsAccess;  // serialization helper, defined with the artifact readers

/// Power transform of a positive response: (y^c - 1)/c, or log y at c = 0.
double boxcox_transform(double y, double c);

/// Sufficient statistics for linear regression: n, sum y^2, sum x*y and the
/// upper triangle of sum x x'. Also serves ridge regression for every ridge
/// parameter.
class LinRegSS {
  public:
    LinRegSS() = default;
    explicit LinRegSS(std::size_t p) : p_(p), s_xy_(p, 0.0), s_xx_(p) {
        if (p == 0) throw ConfigError("LinRegSS needs at least one design column");
    }

    std::size_t p() const { return p_; }
    std::int64_t n() const { return n_; }
    double s_yy() const { return s_yy_; }
    const RealVector& s_xy() const { return s_xy_; }
    SymMatrix s_xx() const { return s_xx_.to_sym(); }
    std::span<const double> s_xx_upper() const { return s_xx_.packed(); }

    void add_row(std::span<const double> x, double y);

    /// X row-major m x p. Numerically identical to folding add_row in order.
    void add_batch(const double* x, std::size_t m, const double* y);
    void add_batch(const Matrix& x, const RealVector& y);

    LinRegSS& operator+=(const LinRegSS& o);
    LinRegSS& operator-=(const LinRegSS& o);

  private:
    friend struct SsAccess;
    std::size_t p_ = 0;
    std::int64_t n_ = 0;
    double s_yy_ = 0.0;
    RealVector s_xy_;
    detail::UpperTriangle s_xx_;
};

using RidgeSS = LinRegSS;

/// Sufficient statistics for weighted linear regression: n, sum w*y^2,
/// sum x*w*y and the upper triangle of sum w * x x'. Rows with w = 0 still
/// count toward n; the variance estimator divides by the total row count.
class WeightedSS {
  public:
    WeightedSS() = default;
    explicit WeightedSS(std::size_t p) : p_(p), s_wxy_(p, 0.0), s_wxx_(p) {
        if (p == 0) throw ConfigError("WeightedSS needs at least one design column");
    }

    std::size_t p() const { return p_; }
    std::int64_t n() const { return n_; }
    double s_wyy() const { return s_wyy_; }
    const RealVector& s_wxy() const { return s_wxy_; }
    SymMatrix s_wxx() const { return s_wxx_.to_sym(); }
    std::span<const double> s_wxx_upper() const { return s_wxx_.packed(); }

    void add_row(std::span<const double> x, double y, double w);
    void add_batch(const double* x, std::size_t m, const double* y, const double* w);
    void add_batch(const Matrix& x, const RealVector& y, const RealVector& w);

    WeightedSS& operator+=(const WeightedSS& o);
    WeightedSS& operator-=(const WeightedSS& o);

  private:
    friend struct SsAccess;
    std::size_t p_ = 0;
    std::int64_t n_ = 0;
    double s_wyy_ = 0.0;
    RealVector s_wxy_;
    detail::UpperTriangle s_wxx_;
};

/// Sufficient statistics for Box-Cox regression over a grid of power
/// parameters: one (s_cyy, s_cxy) slot per grid entry plus sum log y and a
/// single x'x shared by every power parameter (and identical to the linear
/// one for the same X).
class BoxCoxSS {
  public:
    BoxCoxSS() = default;
    BoxCoxSS(std::size_t p, RealVector grid);

    std::size_t p() const { return p_; }
    std::int64_t n() const { return n_; }
    const RealVector& grid() const { return grid_; }
    double s_logy() const { return s_logy_; }
    double s_cyy(std::size_t ci) const { return s_cyy_[ci]; }
    const RealVector& s_cxy(std::size_t ci) const { return s_cxy_[ci]; }
    SymMatrix s_xx() const { return s_xx_.to_sym(); }
    std::span<const double> s_xx_upper() const { return s_xx_.packed(); }

    /// One in-memory batch updates the shared statistics once and the per-c
    /// slots for every grid entry. Throws NonPositiveResponse on y <= 0.
    void add_batch(const double* x, std::size_t m, const double* y);
    void add_batch(const Matrix& x, const RealVector& y);

    BoxCoxSS& operator+=(const BoxCoxSS& o);
    BoxCoxSS& operator-=(const BoxCoxSS& o);

  private:
    friend struct SsAccess;
    std::size_t p_ = 0;
    std::int64_t n_ = 0;
    RealVector grid_;
    double s_logy_ = 0.0;
    RealVector s_cyy_;                // one per grid entry
    std::vector<RealVector> s_cxy_;   // one p-vector per grid entry
    detail::UpperTriangle s_xx_;
    RealVector transformed_;          // batch scratch, not part of the statistic
};

/// Fieldwise sum of two compatible accumulators.
template <typename SS>
SS merge(SS a, const SS& b) {
    a += b;
    return a;
}

/// Fieldwise difference: removes a previously added shard without a data pass.
/// Throws NegativeCount when b.n() > a.n().
template <typename SS>
SS subtract(SS a, const SS& b) {
    a -= b;
    return a;
}

}  // namespace ssreg
