/**
 * @file linalg.hpp
 * @brief Linear solvers for periodic banded Jacobians.
 *
 * A periodic banded matrix is split into its non-periodic band B and the
 * wrap-around corner entries E (only the first and last `bandwidth` rows carry
 * corner entries). B is factored by banded LU with partial pivoting and the
 * corners are folded back in with a Sherman-Morrison-Woodbury correction. When
 * the band or the capacitance matrix is singular the solve falls back to a
 * dense LU of the full matrix.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "rimming/errors.hpp"

namespace rimming::linalg {

/// Dense LU with partial pivoting, row-major storage.
class DenseLU {
public:
    DenseLU() = default;

    /// Returns false when the matrix is numerically singular.
    bool factor(std::vector<double> a, int n) {
        n_ = n;
        a_ = std::move(a);
        piv_.assign(static_cast<std::size_t>(n), 0);
        double scale = 0.0;
        for (double v : a_) scale = std::max(scale, std::abs(v));
        const double tiny = scale * n * std::numeric_limits<double>::epsilon() * 1e-3;
        for (int k = 0; k < n; ++k) {
            int p = k;
            double best = std::abs(at(k, k));
            for (int i = k + 1; i < n; ++i) {
                if (std::abs(at(i, k)) > best) {
                    best = std::abs(at(i, k));
                    p = i;
                }
            }
            piv_[static_cast<std::size_t>(k)] = p;
            if (!(best > tiny)) return ok_ = false;
            if (p != k) {
                for (int j = 0; j < n; ++j) std::swap(at(k, j), at(p, j));
            }
            const double inv = 1.0 / at(k, k);
            for (int i = k + 1; i < n; ++i) {
                const double m = at(i, k) * inv;
                at(i, k) = m;
                if (m == 0.0) continue;
                for (int j = k + 1; j < n; ++j) at(i, j) -= m * at(k, j);
            }
        }
        return ok_ = true;
    }

    bool ok() const { return ok_; }

    void solve_in_place(std::span<double> b) const {
        // Rows of L were swapped along with U, so all interchanges come first.
        for (int k = 0; k < n_; ++k) {
            const int p = piv_[static_cast<std::size_t>(k)];
            if (p != k) std::swap(b[static_cast<std::size_t>(k)], b[static_cast<std::size_t>(p)]);
        }
        for (int k = 0; k < n_; ++k) {
            for (int i = k + 1; i < n_; ++i) b[static_cast<std::size_t>(i)] -= at(i, k) * b[static_cast<std::size_t>(k)];
        }
        for (int k = n_ - 1; k >= 0; --k) {
            double s = b[static_cast<std::size_t>(k)];
            for (int j = k + 1; j < n_; ++j) s -= at(k, j) * b[static_cast<std::size_t>(j)];
            b[static_cast<std::size_t>(k)] = s / at(k, k);
        }
    }

private:
    double& at(int i, int j) { return a_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)]; }
    double at(int i, int j) const { return a_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)]; }

    int n_ = 0;
    std::vector<double> a_;
    std::vector<int> piv_;
    bool ok_ = false;
};

/// Banded LU with partial pivoting (kl = ku = w on input; fill raises the
/// upper bandwidth to 2w). Row i stores columns [i - w, i + 2w].
class BandedLU {
public:
    bool factor(int n, int w, std::vector<double> rows) {
        n_ = n;
        w_ = w;
        width_ = 3 * w + 1;
        rows_ = std::move(rows);
        mult_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(w), 0.0);
        piv_.assign(static_cast<std::size_t>(n), 0);
        double scale = 0.0;
        for (double v : rows_) scale = std::max(scale, std::abs(v));
        const double tiny = scale * n * std::numeric_limits<double>::epsilon() * 1e-3;

        for (int k = 0; k < n; ++k) {
            const int last = std::min(n - 1, k + w);
            int p = k;
            double best = std::abs(get(k, k));
            for (int i = k + 1; i <= last; ++i) {
                if (std::abs(get(i, k)) > best) {
                    best = std::abs(get(i, k));
                    p = i;
                }
            }
            piv_[static_cast<std::size_t>(k)] = p;
            if (!(best > tiny)) return ok_ = false;
            const int jend = std::min(n - 1, k + 2 * w);
            if (p != k) {
                for (int j = k; j <= jend; ++j) {
                    const double t = get(k, j);
                    set(k, j, get(p, j));
                    set(p, j, t);
                }
            }
            const double inv = 1.0 / get(k, k);
            for (int i = k + 1; i <= last; ++i) {
                const double m = get(i, k) * inv;
                mult_[static_cast<std::size_t>(k) * static_cast<std::size_t>(w) + static_cast<std::size_t>(i - k - 1)] = m;
                set(i, k, 0.0);
                if (m == 0.0) continue;
                for (int j = k + 1; j <= jend; ++j) set(i, j, get(i, j) - m * get(k, j));
            }
        }
        return ok_ = true;
    }

    bool ok() const { return ok_; }

    void solve_in_place(std::span<double> b) const {
        for (int k = 0; k < n_; ++k) {
            const int p = piv_[static_cast<std::size_t>(k)];
            if (p != k) std::swap(b[static_cast<std::size_t>(k)], b[static_cast<std::size_t>(p)]);
            const int last = std::min(n_ - 1, k + w_);
            for (int i = k + 1; i <= last; ++i) {
                b[static_cast<std::size_t>(i)] -=
                    mult_[static_cast<std::size_t>(k) * static_cast<std::size_t>(w_) + static_cast<std::size_t>(i - k - 1)] *
                    b[static_cast<std::size_t>(k)];
            }
        }
        for (int k = n_ - 1; k >= 0; --k) {
            double s = b[static_cast<std::size_t>(k)];
            const int jend = std::min(n_ - 1, k + 2 * w_);
            for (int j = k + 1; j <= jend; ++j) s -= get(k, j) * b[static_cast<std::size_t>(j)];
            b[static_cast<std::size_t>(k)] = s / get(k, k);
        }
    }

private:
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(j - i + w_);
    }
    double get(int i, int j) const {
        const int off = j - i + w_;
        if (off < 0 || off >= width_) return 0.0;
        return rows_[index(i, j)];
    }
    void set(int i, int j, double v) {
        const int off = j - i + w_;
        if (off < 0 || off >= width_) return;
        rows_[index(i, j)] = v;
    }

    int n_ = 0;
    int w_ = 0;
    int width_ = 0;
    std::vector<double> rows_;
    std::vector<double> mult_;
    std::vector<int> piv_;
    bool ok_ = false;
};

/// n x n matrix whose nonzeros lie on the periodic diagonals i - w .. i + w
/// (column indices taken modulo n).
class PeriodicBandMatrix {
public:
    PeriodicBandMatrix(int n, int bandwidth) : n_(n), w_(bandwidth), band_(static_cast<std::size_t>(n) * static_cast<std::size_t>(2 * bandwidth + 1), 0.0) {
        if (n < 4 * bandwidth) throw ParameterError("periodic band matrix: n too small for bandwidth");
    }

    int n() const { return n_; }
    int bandwidth() const { return w_; }

    /// Entry A(i, i + offset mod n), |offset| <= bandwidth.
    double& operator()(int i, int offset) {
        return band_[static_cast<std::size_t>(i) * static_cast<std::size_t>(2 * w_ + 1) + static_cast<std::size_t>(offset + w_)];
    }
    double operator()(int i, int offset) const {
        return band_[static_cast<std::size_t>(i) * static_cast<std::size_t>(2 * w_ + 1) + static_cast<std::size_t>(offset + w_)];
    }

    void multiply(std::span<const double> x, std::span<double> y) const {
        for (int i = 0; i < n_; ++i) {
            double s = 0.0;
            for (int o = -w_; o <= w_; ++o) s += (*this)(i, o) * x[static_cast<std::size_t>(wrap(i + o))];
            y[static_cast<std::size_t>(i)] = s;
        }
    }

    std::vector<double> dense() const {
        std::vector<double> a(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_), 0.0);
        for (int i = 0; i < n_; ++i) {
            for (int o = -w_; o <= w_; ++o) {
                a[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(wrap(i + o))] += (*this)(i, o);
            }
        }
        return a;
    }

    int wrap(int j) const {
        const int r = j % n_;
        return r < 0 ? r + n_ : r;
    }

private:
    int n_;
    int w_;
    std::vector<double> band_;
};

/// Factorization of a PeriodicBandMatrix, reusable for several right-hand sides.
class PeriodicBandSolver {
public:
    explicit PeriodicBandSolver(const PeriodicBandMatrix& a) : n_(a.n()), w_(a.bandwidth()) {
        const int width = 3 * w_ + 1;
        std::vector<double> rows(static_cast<std::size_t>(n_) * static_cast<std::size_t>(width), 0.0);
        for (int i = 0; i < n_; ++i) {
            for (int o = -w_; o <= w_; ++o) {
                const int j = i + o;
                const double v = a(i, o);
                if (j >= 0 && j < n_) {
                    rows[static_cast<std::size_t>(i) * static_cast<std::size_t>(width) + static_cast<std::size_t>(o + w_)] = v;
                } else if (v != 0.0) {
                    corner_.push_back({i, a.wrap(j), v});
                }
            }
        }
        for (const auto& c : corner_) {
            if (std::find(corner_rows_.begin(), corner_rows_.end(), c.row) == corner_rows_.end()) {
                corner_rows_.push_back(c.row);
            }
        }
        std::sort(corner_rows_.begin(), corner_rows_.end());

        if (!band_.factor(n_, w_, std::move(rows)) || !build_capacitance()) {
            use_dense_ = true;
            if (!dense_.factor(a.dense(), n_)) {
                throw NumericalError("periodic band solver: singular matrix");
            }
        }
    }

    bool used_dense_fallback() const { return use_dense_; }

    void solve_in_place(std::span<double> b) const {
        if (use_dense_) {
            dense_.solve_in_place(b);
            return;
        }
        band_.solve_in_place(b);
        if (corner_rows_.empty()) return;
        // x = y - Z (I + V^T Z)^{-1} V^T y
        const std::size_t r = corner_rows_.size();
        std::vector<double> vty(r, 0.0);
        for (const auto& c : corner_) vty[row_slot(c.row)] += c.value * b[static_cast<std::size_t>(c.col)];
        cap_.solve_in_place(vty);
        for (std::size_t k = 0; k < r; ++k) {
            const double s = vty[k];
            if (s == 0.0) continue;
            const double* z = &z_[k * static_cast<std::size_t>(n_)];
            for (int i = 0; i < n_; ++i) b[static_cast<std::size_t>(i)] -= z[i] * s;
        }
    }

    std::vector<double> solve(std::span<const double> rhs) const {
        std::vector<double> x(rhs.begin(), rhs.end());
        solve_in_place(x);
        return x;
    }

private:
    struct Corner {
        int row;
        int col;
        double value;
    };

    std::size_t row_slot(int row) const {
        return static_cast<std::size_t>(std::lower_bound(corner_rows_.begin(), corner_rows_.end(), row) - corner_rows_.begin());
    }

    bool build_capacitance() {
        const std::size_t r = corner_rows_.size();
        if (r == 0) return true;
        z_.assign(r * static_cast<std::size_t>(n_), 0.0);
        for (std::size_t k = 0; k < r; ++k) {
            std::span<double> col(&z_[k * static_cast<std::size_t>(n_)], static_cast<std::size_t>(n_));
            col[static_cast<std::size_t>(corner_rows_[k])] = 1.0;
            band_.solve_in_place(col);
        }
        std::vector<double> cap(r * r, 0.0);
        for (std::size_t k = 0; k < r; ++k) cap[k * r + k] = 1.0;
        for (const auto& c : corner_) {
            const std::size_t i = row_slot(c.row);
            for (std::size_t k = 0; k < r; ++k) cap[i * r + k] += c.value * z_[k * static_cast<std::size_t>(n_) + static_cast<std::size_t>(c.col)];
        }
        return cap_.factor(std::move(cap), static_cast<int>(r));
    }

    int n_;
    int w_;
    BandedLU band_;
    DenseLU cap_;
    DenseLU dense_;
    bool use_dense_ = false;
    std::vector<Corner> corner_;
    std::vector<int> corner_rows_;
    std::vector<double> z_;
};

/// Solves [[A, b], [c^T, d]] [x; s] = [r; rho] by block elimination on A.
/// Falls back to a dense solve of the full bordered system if the Schur
/// complement vanishes.
inline std::pair<std::vector<double>, double> solve_bordered(const PeriodicBandMatrix& a, std::span<const double> b,
                                                             std::span<const double> c, double d,
                                                             std::span<const double> r, double rho) {
    const int n = a.n();
    const PeriodicBandSolver solver(a);
    std::vector<double> y = solver.solve(r);
    std::vector<double> z = solver.solve(b);
    double cty = 0.0, ctz = 0.0, scale = std::abs(d);
    for (int i = 0; i < n; ++i) {
        cty += c[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
        ctz += c[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i)];
        scale += std::abs(c[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i)]);
    }
    const double schur = d - ctz;
    if (std::abs(schur) > 1e-13 * std::max(scale, 1e-300)) {
        const double s = (rho - cty) / schur;
        for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] -= z[static_cast<std::size_t>(i)] * s;
        return {std::move(y), s};
    }
    const int m = n + 1;
    std::vector<double> full(static_cast<std::size_t>(m) * static_cast<std::size_t>(m), 0.0);
    const std::vector<double> ad = a.dense();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) full[static_cast<std::size_t>(i * m + j)] = ad[static_cast<std::size_t>(i * n + j)];
        full[static_cast<std::size_t>(i * m + n)] = b[static_cast<std::size_t>(i)];
        full[static_cast<std::size_t>(n * m + i)] = c[static_cast<std::size_t>(i)];
    }
    full[static_cast<std::size_t>(n * m + n)] = d;
    DenseLU lu;
    if (!lu.factor(std::move(full), m)) throw NumericalError("bordered solve: singular system");
    std::vector<double> rhs(r.begin(), r.end());
    rhs.push_back(rho);
    lu.solve_in_place(rhs);
    const double s = rhs.back();
    rhs.pop_back();
    return {std::move(rhs), s};
}

}  // namespace rimming::linalg
