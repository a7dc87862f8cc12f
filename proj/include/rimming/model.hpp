/**
 * @file model.hpp
 * @brief Coefficients, regularized mobility, entropies and energy of the
 *        rimming-flow thin film equation
 *
 *   h_t + (f(h) (a0 h_xxx + a1 h_x + a2 w'(x)))_x + a3 h_x = 0
 *
 * on a periodic domain.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "rimming/errors.hpp"
#include "rimming/grid.hpp"

namespace rimming {

struct RegularizationKnobs {
    double delta = 0.0;
    double epsilon = 1e-8;
    double theta = 0.3;

    void validate() const {
        if (!(delta >= 0.0) || !std::isfinite(delta)) throw ParameterError("knobs: delta must be >= 0");
        if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ParameterError("knobs: epsilon must be >= 0");
        if (!(theta > 0.0 && theta < 0.4)) throw ParameterError("knobs: theta must lie in (0, 2/5)");
    }
};

/// f(z) = |z|^4 / (|z| + eps) + delta; reduces to |z|^3 + delta for eps = 0.
inline double mobility(double z, double delta, double epsilon) {
    const double a = std::abs(z);
    if (epsilon == 0.0) return a * a * a + delta;
    const double a2 = a * a;
    return a2 * a2 / (a + epsilon) + delta;
}

inline double mobility(double z, const RegularizationKnobs& k) { return mobility(z, k.delta, k.epsilon); }

/// d/dz of the mobility.
inline double mobility_derivative(double z, double epsilon) {
    const double a = std::abs(z);
    const double s = z < 0.0 ? -1.0 : 1.0;
    if (epsilon == 0.0) return s * 3.0 * a * a;
    const double d = a + epsilon;
    return s * a * a * a * (3.0 * a + 4.0 * epsilon) / (d * d);
}

/// Entropy density with G'' = 1 / f (delta = 0).
inline double entropy_G(double z, double epsilon) {
    if (!(z > 0.0)) throw DomainError("entropy_G: z must be positive");
    return 1.0 / (2.0 * z) + epsilon / (6.0 * z * z);
}

/// Alpha-entropy density with second derivative z^alpha / f (delta = 0).
inline double alpha_entropy(double z, double epsilon, double alpha) {
    if (!(alpha > -0.5 && alpha < 1.0) || alpha == 0.0) {
        throw ParameterError("alpha_entropy: alpha must lie in (-1/2, 1) and be nonzero");
    }
    if (!(z > 0.0)) throw DomainError("alpha_entropy: z must be positive");
    return std::pow(z, alpha - 1.0) / ((alpha - 1.0) * (alpha - 2.0)) +
           epsilon * std::pow(z, alpha - 2.0) / ((alpha - 3.0) * (alpha - 2.0));
}

/// Periodic forcing w sampled on a grid together with w', w''.
class Forcing {
public:
    enum class Kind { Sine, Tabulated };

    /// w(x) = sin(2 pi x / L), one full period over the domain.
    static Forcing sine(const Grid& grid) {
        const double k = two_pi / grid.length();
        return Forcing(Kind::Sine, PeriodicField::sample(grid, [k](double x) { return std::sin(k * x); }),
                       PeriodicField::sample(grid, [k](double x) { return k * std::cos(k * x); }),
                       PeriodicField::sample(grid, [k](double x) { return -k * k * std::sin(k * x); }));
    }

    static Forcing constant(const Grid& grid, double c) {
        return Forcing(Kind::Tabulated, PeriodicField::constant(grid, c), PeriodicField(grid), PeriodicField(grid));
    }

    /// Samples of w, w', w''. The derivatives must agree with centered
    /// differences of w to second order.
    static Forcing tabulated(PeriodicField w, PeriodicField wp, PeriodicField wpp) {
        require_same_grid(w.grid(), wp.grid(), "forcing");
        require_same_grid(w.grid(), wpp.grid(), "forcing");
        const double dx = w.grid().dx();
        const auto sup = [](const PeriodicField& f) {
            double s = 0.0;
            for (double v : f.values()) s = std::max(s, std::abs(v));
            return s;
        };
        const PeriodicField dw = d1(w);
        const PeriodicField ddw = d2(w);
        const double tol1 = dx * dx * std::max(1.0, sup(d3(w))) + 1e-10 * std::max(1.0, sup(wp));
        const double tol2 = dx * dx * std::max(1.0, sup(d2(ddw))) + 1e-10 * std::max(1.0, sup(wpp));
        for (int i = 0; i < w.size(); ++i) {
            if (std::abs(wp[i] - dw[i]) > tol1) {
                throw InputError("forcing: w' inconsistent with w at index " + std::to_string(i));
            }
            if (std::abs(wpp[i] - ddw[i]) > tol2) {
                throw InputError("forcing: w'' inconsistent with w at index " + std::to_string(i));
            }
        }
        return Forcing(Kind::Tabulated, std::move(w), std::move(wp), std::move(wpp));
    }

    Kind kind() const { return kind_; }
    const Grid& grid() const { return w_.grid(); }
    const PeriodicField& w() const { return w_; }
    const PeriodicField& wp() const { return wp_; }
    const PeriodicField& wpp() const { return wpp_; }

    /// w' at interface i+1/2 as the compact difference (w_{i+1} - w_i)/dx.
    /// Pairing with the compact gradient in the energy makes the discrete
    /// energy balance exact.
    double wp_half(int i) const { return wp_half_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& wp_half_values() const { return wp_half_; }

    double wp_l2() const { return wp_l2_; }
    double wp_sup() const { return wp_sup_; }
    double wpp_sup() const { return wpp_sup_; }
    double w_sup() const { return w_sup_; }

private:
    Forcing(Kind kind, PeriodicField w, PeriodicField wp, PeriodicField wpp)
        : kind_(kind), w_(std::move(w)), wp_(std::move(wp)), wpp_(std::move(wpp)) {
        const int n = w_.size();
        const double dx = w_.grid().dx();
        wp_half_.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) wp_half_[static_cast<std::size_t>(i)] = (w_.at(i + 1) - w_[i]) / dx;
        double sq = 0.0;
        for (int i = 0; i < n; ++i) {
            sq += wp_[i] * wp_[i];
            wp_sup_ = std::max(wp_sup_, std::abs(wp_[i]));
            wpp_sup_ = std::max(wpp_sup_, std::abs(wpp_[i]));
            w_sup_ = std::max(w_sup_, std::abs(w_[i]));
        }
        wp_l2_ = std::sqrt(sq * dx);
    }

    Kind kind_;
    PeriodicField w_;
    PeriodicField wp_;
    PeriodicField wpp_;
    std::vector<double> wp_half_;
    double wp_l2_ = 0.0;
    double wp_sup_ = 0.0;
    double wpp_sup_ = 0.0;
    double w_sup_ = 0.0;
};

struct Params {
    double a0 = 1.0;
    double a1 = 0.0;
    double a2 = 0.0;
    double a3 = 0.0;
    Forcing w;

    Params(double a0_, double a1_, double a2_, double a3_, Forcing w_)
        : a0(a0_), a1(a1_), a2(a2_), a3(a3_), w(std::move(w_)) {
        if (!(a0 > 0.0) || !std::isfinite(a0)) throw ParameterError("params: a0 must be > 0");
        if (!std::isfinite(a1) || !std::isfinite(a2) || !std::isfinite(a3)) {
            throw ParameterError("params: coefficients must be finite");
        }
    }

    const Grid& grid() const { return w.grid(); }
    double omega() const { return grid().length(); }
};

/// Physical rimming-flow coefficients: a0 = a1 = chi/3, a2 = -mu/3, a3 = 1, w = sin x.
inline Params from_physical(double chi, double mu, const Grid& grid) {
    if (!(chi > 0.0)) throw ParameterError("from_physical: chi must be > 0 (a0 > 0)");
    if (!(mu >= 0.0)) throw ParameterError("from_physical: mu must be >= 0");
    if (std::abs(grid.length() - two_pi) > 1e-12) throw ParameterError("from_physical: domain length must be 2 pi");
    return Params(chi / 3.0, chi / 3.0, -mu / 3.0, 1.0, Forcing::sine(grid));
}

/// E = 1/2 int (a0 h_x^2 - a1 h^2 - 2 a2 w h), h_x the compact difference.
inline double energy(const PeriodicField& h, const Params& p) {
    require_same_grid(h.grid(), p.grid(), "energy");
    const double dx = h.grid().dx();
    double s = 0.0;
    for (int i = 0; i < h.size(); ++i) s += -p.a1 * h[i] * h[i] - 2.0 * p.a2 * p.w.w()[i] * h[i];
    return 0.5 * (p.a0 * dirichlet_integral(h) + s * dx);
}

/// int G_eps(h); +inf when min h <= 0.
inline double entropy_integral(const PeriodicField& h, double epsilon) {
    if (!(h.min() > 0.0)) return std::numeric_limits<double>::infinity();
    double s = 0.0;
    for (double v : h.values()) s += entropy_G(v, epsilon);
    return s * h.grid().dx();
}

/// int G^(alpha)_eps(h); +inf when min h <= 0.
inline double alpha_entropy_integral(const PeriodicField& h, double epsilon, double alpha) {
    if (!(h.min() > 0.0)) return std::numeric_limits<double>::infinity();
    double s = 0.0;
    for (double v : h.values()) s += alpha_entropy(v, epsilon, alpha);
    return s * h.grid().dx();
}

}  // namespace rimming
