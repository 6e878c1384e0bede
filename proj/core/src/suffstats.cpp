#include "ssreg/suffstats.hpp"

#include <cmath>
#include <string>

namespace ssreg {

namespace {

void check_dim(std::size_t p) {
    if (p == 0) throw ConfigError("accumulators need at least one design column");
}

void check_same_shape(std::size_t pa, std::size_t pb, const char* what) {
    if (pa != pb) {
        throw DimensionMismatch(std::string(what) + ": dimension " + std::to_string(pb) +
                                " does not match " + std::to_string(pa));
    }
}

void check_subtract_count(std::int64_t na, std::int64_t nb) {
    if (nb > na) {
        throw NegativeCount("subtract would make the observation count negative (" +
                            std::to_string(na) + " - " + std::to_string(nb) + ")");
    }
}

void axpy(RealVector& acc, const double* x, double a, std::size_t p) {
    for (std::size_t j = 0; j < p; ++j) acc[j] += a * x[j];
}

}  // namespace

double boxcox_transform(double y, double c) {
    if (y <= 0.0) {
        throw NonPositiveResponse("Box-Cox transform requires y > 0, got " + std::to_string(y));
    }
    if (c == 0.0) return std::log(y);
    return (std::pow(y, c) - 1.0) / c;
}

// ---------------------------------------------------------------------------
// LinRegSS

void LinRegSS::add_row(std::span<const double> x, double y) {
    check_same_shape(p_, x.size(), "add_row");
    n_ += 1;
    s_yy_ += y * y;
    axpy(s_xy_, x.data(), y, p_);
    s_xx_.add_outer(x.data(), 1.0);
}

void LinRegSS::add_batch(const double* x, std::size_t m, const double* y) {
    for (std::size_t r = 0; r < m; ++r) {
        const double* row = x + r * p_;
        const double yr = y[r];
        s_yy_ += yr * yr;
        axpy(s_xy_, row, yr, p_);
        s_xx_.add_outer(row, 1.0);
    }
    n_ += static_cast<std::int64_t>(m);
}

void LinRegSS::add_batch(const Matrix& x, const RealVector& y) {
    check_same_shape(p_, x.cols(), "add_batch");
    if (x.rows() != y.size()) throw DimensionMismatch("add_batch: row count != response length");
    add_batch(x.data(), x.rows(), y.data());
}

LinRegSS& LinRegSS::operator+=(const LinRegSS& o) {
    check_same_shape(p_, o.p_, "merge");
    n_ += o.n_;
    s_yy_ += o.s_yy_;
    axpy(s_xy_, o.s_xy_.data(), 1.0, p_);
    s_xx_.add(o.s_xx_);
    return *this;
}

LinRegSS& LinRegSS::operator-=(const LinRegSS& o) {
    check_same_shape(p_, o.p_, "subtract");
    check_subtract_count(n_, o.n_);
    n_ -= o.n_;
    s_yy_ -= o.s_yy_;
    axpy(s_xy_, o.s_xy_.data(), -1.0, p_);
    s_xx_.subtract(o.s_xx_);
    return *this;
}

// ---------------------------------------------------------------------------
// WeightedSS

void WeightedSS::add_row(std::span<const double> x, double y, double w) {
    check_same_shape(p_, x.size(), "add_row");
    if (w < 0.0) throw NegativeWeight("negative weight " + std::to_string(w));
    n_ += 1;
    s_wyy_ += w * y * y;
    axpy(s_wxy_, x.data(), w * y, p_);
    s_wxx_.add_outer(x.data(), w);
}

void WeightedSS::add_batch(const double* x, std::size_t m, const double* y, const double* w) {
    for (std::size_t r = 0; r < m; ++r) {
        if (w[r] < 0.0) throw NegativeWeight("negative weight " + std::to_string(w[r]));
    }
    for (std::size_t r = 0; r < m; ++r) {
        const double* row = x + r * p_;
        const double wr = w[r];
        const double yr = y[r];
        s_wyy_ += wr * yr * yr;
        axpy(s_wxy_, row, wr * yr, p_);
        s_wxx_.add_outer(row, wr);
    }
    n_ += static_cast<std::int64_t>(m);
}

void WeightedSS::add_batch(const Matrix& x, const RealVector& y, const RealVector& w) {
    check_same_shape(p_, x.cols(), "add_batch");
    if (x.rows() != y.size() || x.rows() != w.size()) {
        throw DimensionMismatch("add_batch: inconsistent row counts");
    }
    add_batch(x.data(), x.rows(), y.data(), w.data());
}

WeightedSS& WeightedSS::operator+=(const WeightedSS& o) {
    check_same_shape(p_, o.p_, "merge");
    n_ += o.n_;
    s_wyy_ += o.s_wyy_;
    axpy(s_wxy_, o.s_wxy_.data(), 1.0, p_);
    s_wxx_.add(o.s_wxx_);
    return *this;
}

WeightedSS& WeightedSS::operator-=(const WeightedSS& o) {
    check_same_shape(p_, o.p_, "subtract");
    check_subtract_count(n_, o.n_);
    n_ -= o.n_;
    s_wyy_ -= o.s_wyy_;
    axpy(s_wxy_, o.s_wxy_.data(), -1.0, p_);
    s_wxx_.subtract(o.s_wxx_);
    return *this;
}

// ---------------------------------------------------------------------------
// BoxCoxSS

BoxCoxSS::BoxCoxSS(std::size_t p, RealVector grid)
    : p_(p),
      grid_(std::move(grid)),
      s_cyy_(grid_.size(), 0.0),
      s_cxy_(grid_.size(), RealVector(p, 0.0)),
      s_xx_(p) {
    check_dim(p);
    if (grid_.empty()) throw ConfigError("Box-Cox grid must be non-empty");
}

void BoxCoxSS::add_batch(const double* x, std::size_t m, const double* y) {
    transformed_.resize(m);
    double* logy = transformed_.data();
    for (std::size_t r = 0; r < m; ++r) {
        if (y[r] <= 0.0) {
            throw NonPositiveResponse("Box-Cox requires positive responses, got " +
                                      std::to_string(y[r]));
        }
        logy[r] = std::log(y[r]);
    }

    // Shared statistics: once per batch.
    for (std::size_t r = 0; r < m; ++r) {
        s_xx_.add_outer(x + r * p_, 1.0);
        s_logy_ += logy[r];
    }

    // Per power parameter, from the same in-memory batch. y^c is evaluated as
    // expm1(c*log y)/c so the log is shared across the whole grid.
    for (std::size_t ci = 0; ci < grid_.size(); ++ci) {
        const double c = grid_[ci];
        double* sxy = s_cxy_[ci].data();
        double syy = 0.0;
        if (c == 0.0) {
            for (std::size_t r = 0; r < m; ++r) {
                const double t = logy[r];
                syy += t * t;
                const double* row = x + r * p_;
                for (std::size_t j = 0; j < p_; ++j) sxy[j] += t * row[j];
            }
        } else if (c == 1.0) {
            // y - 1 exactly; the exp/log round trip would cost two ulps.
            for (std::size_t r = 0; r < m; ++r) {
                const double t = y[r] - 1.0;
                syy += t * t;
                const double* row = x + r * p_;
                for (std::size_t j = 0; j < p_; ++j) sxy[j] += t * row[j];
            }
        } else {
            const double inv_c = 1.0 / c;
            for (std::size_t r = 0; r < m; ++r) {
                const double t = std::expm1(c * logy[r]) * inv_c;
                syy += t * t;
                const double* row = x + r * p_;
                for (std::size_t j = 0; j < p_; ++j) sxy[j] += t * row[j];
            }
        }
        s_cyy_[ci] += syy;
    }
    n_ += static_cast<std::int64_t>(m);
}

void BoxCoxSS::add_batch(const Matrix& x, const RealVector& y) {
    check_same_shape(p_, x.cols(), "add_batch");
    if (x.rows() != y.size()) throw DimensionMismatch("add_batch: row count != response length");
    add_batch(x.data(), x.rows(), y.data());
}

namespace {
void check_same_grid(const RealVector& a, const RealVector& b) {
    if (a != b) throw GridMismatch("Box-Cox accumulators have different power-parameter grids");
}
}  // namespace

BoxCoxSS& BoxCoxSS::operator+=(const BoxCoxSS& o) {
    check_same_shape(p_, o.p_, "merge");
    check_same_grid(grid_, o.grid_);
    n_ += o.n_;
    s_logy_ += o.s_logy_;
    for (std::size_t ci = 0; ci < grid_.size(); ++ci) {
        s_cyy_[ci] += o.s_cyy_[ci];
        axpy(s_cxy_[ci], o.s_cxy_[ci].data(), 1.0, p_);
    }
    s_xx_.add(o.s_xx_);
    return *this;
}

BoxCoxSS& BoxCoxSS::operator-=(const BoxCoxSS& o) {
    check_same_shape(p_, o.p_, "subtract");
    check_same_grid(grid_, o.grid_);
    check_subtract_count(n_, o.n_);
    n_ -= o.n_;
    s_logy_ -= o.s_logy_;
    for (std::size_t ci = 0; ci < grid_.size(); ++ci) {
        s_cyy_[ci] -= o.s_cyy_[ci];
        axpy(s_cxy_[ci], o.s_cxy_[ci].data(), -1.0, p_);
    }
    s_xx_.subtract(o.s_xx_);
    return *this;
}

}  // namespace ssreg
