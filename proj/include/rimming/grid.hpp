/**
 * @file grid.hpp
 * @brief Uniform periodic grid, periodic fields and second-order discrete calculus.
 *
 * Index arithmetic wraps modulo n, so periodicity of the field and of all its
 * discrete derivatives is structural. Quadrature is the periodic rectangle
 * rule, which coincides with the trapezoid rule on a uniform periodic grid.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rimming/errors.hpp"

namespace rimming {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

class Grid {
public:
    explicit Grid(int n, double length = two_pi, double origin = 0.0)
        : n_(n), length_(length), origin_(origin) {
        if (n < 8 || n % 2 != 0) {
            throw ParameterError("grid: n must be even and >= 8, got " + std::to_string(n));
        }
        if (!(length > 0.0) || !std::isfinite(length)) {
            throw ParameterError("grid: length must be positive and finite");
        }
        if (!std::isfinite(origin)) throw ParameterError("grid: origin must be finite");
    }

    int n() const { return n_; }
    double length() const { return length_; }
    double origin() const { return origin_; }
    double dx() const { return length_ / n_; }

    /// Node coordinate; i may be any integer (no wrapping of the coordinate).
    double x(int i) const { return origin_ + i * dx(); }
    /// Interface coordinate between nodes i and i+1.
    double x_half(int i) const { return origin_ + (i + 0.5) * dx(); }

    int wrap(int i) const {
        const int r = i % n_;
        return r < 0 ? r + n_ : r;
    }

    bool operator==(const Grid& other) const {
        return n_ == other.n_ && length_ == other.length_ && origin_ == other.origin_;
    }
    bool operator!=(const Grid& other) const { return !(*this == other); }

private:
    int n_;
    double length_;
    double origin_;
};

class PeriodicField {
public:
    explicit PeriodicField(Grid grid) : grid_(grid), values_(static_cast<std::size_t>(grid.n()), 0.0) {}

    PeriodicField(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        if (static_cast<int>(values_.size()) != grid_.n()) {
            throw DimensionError("field: expected " + std::to_string(grid_.n()) + " values, got " +
                                 std::to_string(values_.size()));
        }
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i])) {
                throw InputError("field: non-finite value at index " + std::to_string(i));
            }
        }
    }

    static PeriodicField constant(const Grid& grid, double c) {
        return PeriodicField(grid, std::vector<double>(static_cast<std::size_t>(grid.n()), c));
    }

    template <class F>
    static PeriodicField sample(const Grid& grid, F&& f) {
        std::vector<double> v(static_cast<std::size_t>(grid.n()));
        for (int i = 0; i < grid.n(); ++i) v[static_cast<std::size_t>(i)] = f(grid.x(i));
        return PeriodicField(grid, std::move(v));
    }

    const Grid& grid() const { return grid_; }
    int size() const { return grid_.n(); }
    std::span<const double> values() const { return values_; }
    const std::vector<double>& data() const { return values_; }

    double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
    /// Periodic access: any integer index is wrapped onto the grid.
    double at(int i) const { return values_[static_cast<std::size_t>(grid_.wrap(i))]; }

    double min() const { return *std::min_element(values_.begin(), values_.end()); }
    double max() const { return *std::max_element(values_.begin(), values_.end()); }

    /// Circular shift by k grid cells: result[i] = this[i - k].
    PeriodicField shifted(int k) const {
        std::vector<double> v(values_.size());
        for (int i = 0; i < size(); ++i) v[static_cast<std::size_t>(i)] = at(i - k);
        return PeriodicField(grid_, std::move(v));
    }

    PeriodicField scaled(double s) const {
        std::vector<double> v(values_);
        for (double& x : v) x *= s;
        return PeriodicField(grid_, std::move(v));
    }

private:
    Grid grid_;
    std::vector<double> values_;
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* context) {
    if (a != b) throw DimensionError(std::string(context) + ": grid mismatch");
}

/// Pointwise combination of two fields on the same grid.
template <class Op>
PeriodicField combine(const PeriodicField& f, const PeriodicField& g, Op op) {
    require_same_grid(f.grid(), g.grid(), "combine");
    std::vector<double> v(static_cast<std::size_t>(f.size()));
    for (int i = 0; i < f.size(); ++i) v[static_cast<std::size_t>(i)] = op(f[i], g[i]);
    return PeriodicField(f.grid(), std::move(v));
}

template <class Op>
PeriodicField transform(const PeriodicField& f, Op op) {
    std::vector<double> v(static_cast<std::size_t>(f.size()));
    for (int i = 0; i < f.size(); ++i) v[static_cast<std::size_t>(i)] = op(f[i]);
    return PeriodicField(f.grid(), std::move(v));
}

// Centered periodic differences, all second order.

inline PeriodicField d1(const PeriodicField& f) {
    const double inv = 1.0 / (2.0 * f.grid().dx());
    std::vector<double> v(static_cast<std::size_t>(f.size()));
    for (int i = 0; i < f.size(); ++i) v[static_cast<std::size_t>(i)] = (f.at(i + 1) - f.at(i - 1)) * inv;
    return PeriodicField(f.grid(), std::move(v));
}

inline PeriodicField d2(const PeriodicField& f) {
    const double dx = f.grid().dx();
    const double inv = 1.0 / (dx * dx);
    std::vector<double> v(static_cast<std::size_t>(f.size()));
    for (int i = 0; i < f.size(); ++i) {
        v[static_cast<std::size_t>(i)] = (f.at(i + 1) - 2.0 * f[i] + f.at(i - 1)) * inv;
    }
    return PeriodicField(f.grid(), std::move(v));
}

inline PeriodicField d3(const PeriodicField& f) {
    const double dx = f.grid().dx();
    const double inv = 1.0 / (2.0 * dx * dx * dx);
    std::vector<double> v(static_cast<std::size_t>(f.size()));
    for (int i = 0; i < f.size(); ++i) {
        v[static_cast<std::size_t>(i)] =
            (f.at(i + 2) - 2.0 * f.at(i + 1) + 2.0 * f.at(i - 1) - f.at(i - 2)) * inv;
    }
    return PeriodicField(f.grid(), std::move(v));
}

/// Periodic rectangle rule.
inline double integrate(std::span<const double> values, double dx) {
    double s = 0.0;
    for (double v : values) s += v;
    return s * dx;
}

inline double integrate(const PeriodicField& f) { return integrate(f.values(), f.grid().dx()); }

/// Integral of the squared one-sided (compact) difference (f_{i+1} - f_i)/dx.
///
/// This is the discrete Dirichlet integral paired by summation by parts with
/// the interface fluxes of the time integrator, so it is the gradient term used
/// in the discrete energy and in the a-priori bound monitors.
inline double dirichlet_integral(std::span<const double> f, double dx) {
    const std::size_t n = f.size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double g = (f[(i + 1) % n] - f[i]) / dx;
        s += g * g;
    }
    return s * dx;
}

inline double dirichlet_integral(const PeriodicField& f) {
    return dirichlet_integral(f.values(), f.grid().dx());
}

struct FieldNorms {
    double l2 = 0.0;
    double h1 = 0.0;
    double sup = 0.0;
    double min = 0.0;
};

inline FieldNorms norms(const PeriodicField& f) {
    const double dx = f.grid().dx();
    double sq = 0.0;
    double sup = 0.0;
    for (double v : f.values()) {
        sq += v * v;
        sup = std::max(sup, std::abs(v));
    }
    sq *= dx;
    const PeriodicField g = d1(f);
    double gsq = 0.0;
    for (double v : g.values()) gsq += v * v;
    gsq *= dx;
    return FieldNorms{std::sqrt(sq), std::sqrt(sq + gsq), sup, f.min()};
}

// CSV serialization: "x,<name>" header, one row per node, 17 significant digits.

inline void write_field_csv(std::ostream& os, const PeriodicField& f, const std::string& column = "value") {
    os << "x," << column << '\n';
    os << std::setprecision(17);
    for (int i = 0; i < f.size(); ++i) os << f.grid().x(i) << ',' << f[i] << '\n';
}

/// Reads a two-column "x,value" CSV onto `grid`; the row count and node
/// coordinates must match the grid.
inline PeriodicField read_field_csv(std::istream& is, const Grid& grid) {
    std::string line;
    if (!std::getline(is, line)) throw InputError("field csv: empty input");
    std::vector<double> values;
    int row = 0;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        std::istringstream ls(line);
        std::string xs, vs;
        if (!std::getline(ls, xs, ',') || !std::getline(ls, vs)) {
            throw InputError("field csv: malformed row " + std::to_string(row + 2));
        }
        double x = 0.0, v = 0.0;
        try {
            x = std::stod(xs);
            v = std::stod(vs);
        } catch (const std::exception&) {
            throw InputError("field csv: non-numeric row " + std::to_string(row + 2));
        }
        if (row < grid.n() && std::abs(x - grid.x(row)) > 1e-9 * std::max(1.0, grid.length())) {
            throw InputError("field csv: x at row " + std::to_string(row + 2) + " does not match the grid");
        }
        values.push_back(v);
        ++row;
    }
    if (static_cast<int>(values.size()) != grid.n()) {
        throw InputError("field csv: expected " + std::to_string(grid.n()) + " rows, got " +
                         std::to_string(values.size()));
    }
    return PeriodicField(grid, std::move(values));
}

}  // namespace rimming
