/**
 * @file steady.hpp
 * @brief Steady rimming flows: the zero-surface-tension cubic
 *
 *   h - (mu/3) h^3 cos x = q
 *
 * and the capillary periodic problem
 *
 *   h - (mu/3) h^3 cos x + (chi/3) h^3 (h_x + h_xxx) = q,
 *
 * solved by Newton's method with natural-parameter continuation.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "rimming/errors.hpp"
#include "rimming/grid.hpp"
#include "rimming/linalg.hpp"

namespace rimming {

struct SteadyProfile {
    PeriodicField h;
    double q = 0.0;
    double mu = 0.0;
    /// 0 for the zero-surface-tension profile.
    double chi = 0.0;
    double residual_sup = 0.0;
    double mass = 0.0;
};

enum class ContinuationMode { FixedFlux, FixedMass };

struct ContinuationStep {
    ContinuationMode mode = ContinuationMode::FixedFlux;
    /// Flux q (FixedFlux) or mass (FixedMass).
    double target = 0.0;
    int max_newton = 50;
    double tol = 1e-10;
};

inline double critical_flux(double mu) {
    if (!(mu > 0.0)) throw DomainError("critical_flux: mu must be > 0");
    return 2.0 / (3.0 * std::sqrt(mu));
}

/// Flux above which no positive capillary steady state exists.
inline double nonexistence_threshold(double mu) {
    if (!(mu > 0.0)) throw DomainError("nonexistence_threshold: mu must be > 0");
    return 2.0 / 3.0 * std::sqrt(2.0 / mu);
}

/// Older, weaker nonexistence bound, kept for comparison.
inline double pukhnachov_bound(double mu) {
    if (!(mu > 0.0)) throw DomainError("pukhnachov_bound: mu must be > 0");
    return 2.0 * std::sqrt(3.0 / mu);
}

namespace detail {

/// cos x with values within rounding of zero snapped to zero, so that nodes at
/// x = pi/2 reproduce h = q exactly.
inline double snapped_cos(double x) {
    const double c = std::cos(x);
    return std::abs(c) <= 1e-14 ? 0.0 : c;
}

inline double bracket_root(double c, double q, double lo, double hi) {
    auto g = [c, q](double h) { return c * h * h * h - h + q; };
    const double glo = g(lo);
    const double ghi = g(hi);
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi,
                                                     boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (r.first + r.second);
}

}  // namespace detail

/// Positive roots of (mu cos x / 3) h^3 - h + q = 0 in ascending order.
/// A double root is reported once.
inline std::vector<double> moffatt_roots(double mu, double q, double x) {
    if (!(mu > 0.0)) throw DomainError("moffatt_roots: mu must be > 0");
    if (!(q > 0.0)) throw DomainError("moffatt_roots: q must be > 0");
    const double c = mu * detail::snapped_cos(x) / 3.0;
    if (c == 0.0) return {q};
    if (c < 0.0) return {detail::bracket_root(c, q, 0.0, q)};
    // Convex on h > 0 with minimum at h* = 1/sqrt(3c).
    const double hs = 1.0 / std::sqrt(3.0 * c);
    const double gmin = c * hs * hs * hs - hs + q;
    if (gmin > 4.0 * std::numeric_limits<double>::epsilon() * q) return {};
    if (gmin >= -4.0 * std::numeric_limits<double>::epsilon() * q) return {hs};
    return {detail::bracket_root(c, q, 0.0, hs), detail::bracket_root(c, q, hs, 1.0 / std::sqrt(c))};
}

/// Smooth zero-surface-tension steady state, or nullopt when q >= 2/(3 sqrt mu).
/// Selects the branch continuous with h = q where cos x = 0.
inline std::optional<SteadyProfile> moffatt_profile(double mu, double q, const Grid& grid) {
    if (!(q > 0.0)) throw DomainError("moffatt_profile: q must be > 0");
    if (q >= critical_flux(mu)) return std::nullopt;
    std::vector<double> h(static_cast<std::size_t>(grid.n()));
    double res = 0.0;
    for (int i = 0; i < grid.n(); ++i) {
        const double x = grid.x(i);
        const std::vector<double> roots = moffatt_roots(mu, q, x);
        if (roots.empty()) throw NumericalError("moffatt_profile: no root at x = " + std::to_string(x));
        const double v = roots.front();
        h[static_cast<std::size_t>(i)] = v;
        res = std::max(res, std::abs(v - mu / 3.0 * v * v * v * detail::snapped_cos(x) - q));
    }
    PeriodicField f(grid, std::move(h));
    const double mass = integrate(f);
    return SteadyProfile{std::move(f), q, mu, 0.0, res, mass};
}

/// Pointwise residual h - (mu/3) h^3 cos x + (chi/3) h^3 (d1 h + d3 h) - q.
inline PeriodicField capillary_residual(const SteadyProfile& prof, const Grid& grid) {
    require_same_grid(prof.h.grid(), grid, "capillary_residual");
    const PeriodicField a = d1(prof.h);
    const PeriodicField b = d3(prof.h);
    std::vector<double> r(static_cast<std::size_t>(grid.n()));
    for (int i = 0; i < grid.n(); ++i) {
        const double h = prof.h[i];
        const double h3 = h * h * h;
        r[static_cast<std::size_t>(i)] =
            h - prof.mu / 3.0 * h3 * detail::snapped_cos(grid.x(i)) + prof.chi / 3.0 * h3 * (a[i] + b[i]) - prof.q;
    }
    return PeriodicField(grid, std::move(r));
}

/// q + (mu/3) q^3 cos x.
inline PeriodicField asymptotic_guess(double q, const Grid& grid, double mu = 1.0) {
    if (!(q > 0.0)) throw DomainError("asymptotic_guess: q must be > 0");
    return PeriodicField::sample(grid, [q, mu](double x) { return q + mu / 3.0 * q * q * q * detail::snapped_cos(x); });
}

namespace detail {

inline double sup_abs(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

inline linalg::PeriodicBandMatrix capillary_jacobian(const SteadyProfile& prof) {
    const Grid& g = prof.h.grid();
    const int n = g.n();
    const double dx = g.dx();
    const PeriodicField a = d1(prof.h);
    const PeriodicField b = d3(prof.h);
    const double c1 = 1.0 / (2.0 * dx);
    const double c3 = 1.0 / (2.0 * dx * dx * dx);
    linalg::PeriodicBandMatrix J(n, 2);
    for (int i = 0; i < n; ++i) {
        const double h = prof.h[i];
        const double s = prof.chi / 3.0 * h * h * h;
        J(i, 0) = 1.0 - prof.mu * h * h * snapped_cos(g.x(i)) + prof.chi * h * h * (a[i] + b[i]);
        J(i, 1) = s * (c1 - 2.0 * c3);
        J(i, -1) = s * (-c1 + 2.0 * c3);
        J(i, 2) = s * c3;
        J(i, -2) = -s * c3;
    }
    return J;
}

}  // namespace detail

/// Newton solve of the capillary problem from init. FixedFlux holds q at
/// step.target; FixedMass adds q as an unknown and imposes int h = step.target.
inline SteadyProfile capillary_solve(const SteadyProfile& init, const ContinuationStep& step) {
    if (!(step.tol > 0.0)) throw ParameterError("capillary_solve: tol must be > 0");
    if (!(init.h.min() > 0.0)) throw DomainError("capillary_solve: initial profile must be positive");
    const Grid& g = init.h.grid();
    const int n = g.n();
    const double dx = g.dx();
    const bool fixed_mass = step.mode == ContinuationMode::FixedMass;

    SteadyProfile cur = init;
    if (!fixed_mass) cur.q = step.target;

    auto evaluate = [&](const SteadyProfile& s, std::vector<double>& r, double& mass_res) {
        const PeriodicField res = capillary_residual(s, g);
        r.assign(res.values().begin(), res.values().end());
        mass_res = fixed_mass ? integrate(s.h) - step.target : 0.0;
        // Mass residual scaled to the units of h.
        return std::max(detail::sup_abs(r), std::abs(mass_res) / g.length());
    };

    std::vector<double> r;
    double mres = 0.0;
    double res = evaluate(cur, r, mres);
    for (int it = 0;; ++it) {
        if (!std::isfinite(res)) throw NoConvergence("capillary_solve: non-finite residual", res);
        if (res <= step.tol) break;
        if (it >= step.max_newton) {
            throw NoConvergence("capillary_solve: no convergence after " + std::to_string(step.max_newton) +
                                    " iterations (residual " + std::to_string(res) + ")",
                                res);
        }
        const linalg::PeriodicBandMatrix J = detail::capillary_jacobian(cur);
        std::vector<double> dh(static_cast<std::size_t>(n));
        double dq = 0.0;
        try {
            if (fixed_mass) {
                const std::vector<double> col(static_cast<std::size_t>(n), -1.0);
                const std::vector<double> row(static_cast<std::size_t>(n), dx);
                std::vector<double> rhs(r.size());
                for (std::size_t i = 0; i < r.size(); ++i) rhs[i] = -r[i];
                auto sol = linalg::solve_bordered(J, col, row, 0.0, rhs, -mres);
                dh = std::move(sol.first);
                dq = sol.second;
            } else {
                for (std::size_t i = 0; i < r.size(); ++i) dh[i] = -r[i];
                linalg::PeriodicBandSolver(J).solve_in_place(dh);
            }
        } catch (const NumericalError&) {
            throw NoConvergence("capillary_solve: singular Jacobian", res);
        }

        double lambda = 1.0;
        SteadyProfile trial = cur;
        std::vector<double> rt;
        double mt = 0.0, res_t = 0.0;
        for (int damp = 0;; ++damp) {
            std::vector<double> hv(static_cast<std::size_t>(n));
            bool finite = true;
            for (int i = 0; i < n; ++i) {
                hv[static_cast<std::size_t>(i)] = cur.h[i] + lambda * dh[static_cast<std::size_t>(i)];
                finite = finite && std::isfinite(hv[static_cast<std::size_t>(i)]);
            }
            if (!finite) throw NoConvergence("capillary_solve: non-finite iterate", res);
            trial.h = PeriodicField(g, std::move(hv));
            trial.q = cur.q + lambda * dq;
            res_t = evaluate(trial, rt, mt);
            if ((std::isfinite(res_t) && res_t <= res) || damp == 4) break;
            lambda *= 0.5;
        }
        if (!(trial.h.min() > 0.0)) {
            throw BranchLost("capillary_solve: iterate left the positive region (min h = " +
                             std::to_string(trial.h.min()) + ")");
        }
        cur = std::move(trial);
        r = std::move(rt);
        mres = mt;
        res = res_t;
    }
    cur.residual_sup = detail::sup_abs(r);
    cur.mass = integrate(cur.h);
    return cur;
}

struct SolvabilityResiduals {
    double r0 = 0.0;
    double r1 = 0.0;
    double beta = 0.0;
    /// beta > 8/27, impossible for a positive steady state.
    bool nonexistence_violated = false;
};

/// With y = h/q and beta = q^2 mu / 3: r0 = int (1/y^2 - 1/y^3) and
/// r1 = int (1/y^2 - 1/y^3) cos x - pi beta. Both vanish for a steady state.
inline SolvabilityResiduals solvability_residuals(const SteadyProfile& prof) {
    if (!(prof.q > 0.0)) throw DomainError("solvability_residuals: q must be > 0");
    if (!(prof.h.min() > 0.0)) throw DomainError("solvability_residuals: h must be positive");
    const Grid& g = prof.h.grid();
    double s0 = 0.0, s1 = 0.0;
    for (int i = 0; i < g.n(); ++i) {
        const double y = prof.h[i] / prof.q;
        const double v = 1.0 / (y * y) - 1.0 / (y * y * y);
        s0 += v;
        s1 += v * detail::snapped_cos(g.x(i));
    }
    SolvabilityResiduals out;
    out.beta = prof.q * prof.q * prof.mu / 3.0;
    out.r0 = s0 * g.dx();
    out.r1 = s1 * g.dx() - std::numbers::pi * out.beta;
    out.nonexistence_violated = out.beta > 8.0 / 27.0;
    return out;
}

/// Natural-parameter continuation. A failed step is bisected towards its
/// target; once the increment drops below min_increment the branch ends there.
inline std::vector<SteadyProfile> continue_branch(const SteadyProfile& start, const std::vector<ContinuationStep>& schedule,
                                                  double min_increment = 1e-6, std::ostream* log = nullptr) {
    std::vector<SteadyProfile> branch{start};
    auto value_of = [](const SteadyProfile& s, ContinuationMode m) {
        return m == ContinuationMode::FixedFlux ? s.q : s.mass;
    };
    for (const ContinuationStep& st : schedule) {
        double reached = value_of(branch.back(), st.mode);
        double inc = st.target - reached;
        while (reached != st.target) {
            ContinuationStep sub = st;
            sub.target = std::abs(st.target - reached) <= std::abs(inc) ? st.target : reached + inc;
            try {
                branch.push_back(capillary_solve(branch.back(), sub));
                reached = sub.target;
                if (log) *log << "continuation: reached " << reached << '\n';
            } catch (const Error& e) {
                const bool retryable = dynamic_cast<const BranchLost*>(&e) || dynamic_cast<const NoConvergence*>(&e);
                if (!retryable) throw;
                if (log) *log << "continuation: step to " << sub.target << " failed (" << e.what() << ")\n";
                inc *= 0.5;
                if (std::abs(inc) < min_increment) {
                    if (branch.size() == 1) throw;
                    if (log) *log << "continuation: branch ends at " << reached << '\n';
                    return branch;
                }
            }
        }
    }
    return branch;
}

}  // namespace rimming
