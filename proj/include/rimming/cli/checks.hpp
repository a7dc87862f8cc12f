/**
 * @file checks.hpp
 * @brief Seeded property suites behind `rimming check`.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "rimming/bounds.hpp"
#include "rimming/evolve.hpp"
#include "rimming/grid.hpp"
#include "rimming/model.hpp"

namespace rimming::cli {

struct SuiteResult {
    std::string name;
    bool passed = true;
    long cases = 0;
    long failures = 0;
    /// Largest observed violation measure (suite specific).
    double worst = 0.0;
    std::string detail;
};

/// Random nonnegative trigonometric polynomial of degree 1..max_degree.
/// Draws with negative minimum are rejected and redrawn.
inline PeriodicField random_nonnegative_trig(const Grid& g, std::mt19937_64& rng, int max_degree = 8) {
    std::uniform_int_distribution<int> deg(1, max_degree);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> lift(0.0, 1.5);
    const double k0 = two_pi / g.length();
    while (true) {
        const int d = deg(rng);
        std::vector<double> a(static_cast<std::size_t>(d)), b(static_cast<std::size_t>(d));
        double amp = 0.0;
        for (int k = 0; k < d; ++k) {
            a[k] = u(rng);
            b[k] = u(rng);
            amp += std::abs(a[k]) + std::abs(b[k]);
        }
        const double c0 = lift(rng) * amp;
        PeriodicField f = PeriodicField::sample(g, [&](double x) {
            double v = c0;
            for (int k = 0; k < d; ++k) v += a[k] * std::cos((k + 1) * k0 * x) + b[k] * std::sin((k + 1) * k0 * x);
            return v;
        });
        if (f.min() >= 0.0) return f;
    }
}

inline SuiteResult interpolation_suite(const Grid& g, int trials, unsigned long seed) {
    SuiteResult r{"interpolation_random", true, 0, 0, 0.0, ""};
    std::mt19937_64 rng(seed);
    double worst = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
        const BoundReport rep = interpolation_check(random_nonnegative_trig(g, rng));
        ++r.cases;
        if (!rep.satisfied) ++r.failures;
        worst = std::max(worst, -rep.slack / std::max(1.0, rep.rhs));
    }
    r.worst = trials > 0 ? worst : 0.0;
    r.passed = r.failures == 0;
    r.detail = "worst relative (lhs - rhs)";
    return r;
}

/// Constants give equality in the interpolation inequality.
inline SuiteResult interpolation_sharpness_suite(const Grid& g) {
    SuiteResult r{"interpolation_constant_equality", true, 0, 0, 0.0, ""};
    for (double c : {1e-3, 0.3, 1.0, 7.5}) {
        const BoundReport rep = interpolation_check(PeriodicField::constant(g, c));
        const double rel = std::abs(rep.lhs - rep.rhs) / rep.rhs;
        ++r.cases;
        if (rel > 1e-12) ++r.failures;
        r.worst = std::max(r.worst, rel);
    }
    r.passed = r.failures == 0;
    r.detail = "max |lhs - rhs| / rhs";
    return r;
}

/// Central second differences of G and G^(alpha) against 1/f and z^alpha/f.
inline SuiteResult entropy_identity_suite() {
    SuiteResult r{"entropy_second_derivative", true, 0, 0, 0.0, ""};
    const auto check = [&](auto&& G, auto&& target, double z) {
        const double hstep = 1e-4 * z;
        const double fd = (G(z + hstep) - 2.0 * G(z) + G(z - hstep)) / (hstep * hstep);
        const double rel = std::abs(fd - target(z)) / std::abs(target(z));
        ++r.cases;
        if (rel > 1e-6) ++r.failures;
        r.worst = std::max(r.worst, rel);
    };
    for (double eps : {0.0, 0.1}) {
        for (int k = 0; k <= 200; ++k) {
            const double z = 0.1 * std::pow(100.0, k / 200.0);
            check([eps](double s) { return entropy_G(s, eps); }, [eps](double s) { return 1.0 / mobility(s, 0.0, eps); },
                  z);
            for (double a : {-0.25, 0.5}) {
                check([eps, a](double s) { return alpha_entropy(s, eps, a); },
                      [eps, a](double s) { return std::pow(s, a) / mobility(s, 0.0, eps); }, z);
            }
        }
    }
    r.passed = r.failures == 0;
    r.detail = "max relative error";
    return r;
}

/// 0 <= |z|^3 - f_eps(z) <= eps z^2 and f_{delta,eps} >= delta.
inline SuiteResult mobility_suite(unsigned long seed) {
    SuiteResult r{"mobility_bounds", true, 0, 0, 0.0, ""};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> zd(-5.0, 5.0), ed(0.0, 1.0), dd(0.0, 1.0);
    for (int t = 0; t < 10000; ++t) {
        const double z = zd(rng), eps = ed(rng), delta = dd(rng);
        const double gap = std::abs(z * z * z) - mobility(z, 0.0, eps);
        const double slack = 1e-14 * std::max(1.0, std::abs(z * z * z));
        const bool ok = gap >= -slack && gap <= eps * z * z + slack && mobility(z, delta, eps) >= delta;
        ++r.cases;
        if (!ok) ++r.failures;
    }
    r.passed = r.failures == 0;
    return r;
}

/// Flat film with a2 = 0 stays exactly flat.
inline SuiteResult constant_preservation_suite(const Grid& g) {
    SuiteResult r{"constant_preservation", true, 0, 0, 0.0, ""};
    const Params p(1.0, 1.0, 0.0, 5.0, Forcing::sine(g));
    EvolveConfig cfg;
    cfg.t_end = 1.0;
    cfg.dt_max = 0.1;
    cfg.knobs.epsilon = 0.0;
    const Trajectory tr = run(PeriodicField::constant(g, 0.3), p, cfg);
    for (const Snapshot& s : tr.snapshots) {
        for (double v : s.h.values()) r.worst = std::max(r.worst, std::abs(v - 0.3));
    }
    r.cases = static_cast<long>(tr.snapshots.size());
    r.passed = r.worst <= 1e-12;
    if (!r.passed) r.failures = 1;
    r.detail = "sup |h - 0.3|";
    return r;
}

/// Recomputing the b and c constants is bit-identical.
inline SuiteResult constants_determinism_suite(const Grid& g) {
    SuiteResult r{"constants_deterministic", true, 0, 0, 0.0, ""};
    const Params p(1.0, 16.0, 8.0, 3.0, Forcing::sine(g));
    for (double pe : {2.0, 3.0, 4.0, 6.0}) {
        const BConstants x = b_constants(pe, 2.0, g.length()), y = b_constants(pe, 2.0, g.length());
        ++r.cases;
        if (x.b1 != y.b1 || x.b2 != y.b2 || x.b3 != y.b3 || x.b4 != y.b4 || x.b5 != y.b5) ++r.failures;
    }
    const CConstants x = c_constants(p, 0.6 * std::numbers::pi, 0.0), y = c_constants(p, 0.6 * std::numbers::pi, 0.0);
    ++r.cases;
    if (x.c9 != y.c9 || x.c7 != y.c7 || x.c3 != y.c3) ++r.failures;
    r.passed = r.failures == 0;
    return r;
}

/// Reports on a finished trajectory. The interpolation report is the
/// worst snapshot among those with h >= 0.
inline std::vector<BoundReport> trajectory_reports(const Trajectory& traj, const Params& p) {
    std::vector<BoundReport> out;
    out.push_back(mass_check(traj, 1e-11));
    BoundReport interp{"interpolation", 0.0, 0.0, true, std::numeric_limits<double>::infinity()};
    for (const Snapshot& s : traj.snapshots) {
        if (s.h.min() < 0.0) continue;
        const BoundReport r = interpolation_check(s.h);
        if (!r.satisfied || r.slack < interp.slack) interp = r;
    }
    if (traj.snapshots.empty()) interp.slack = 0.0;
    out.push_back(interp);
    out.push_back(dissipation_check(traj, p));
    out.push_back(gradient_bound_check(traj, p));
    out.push_back(h1_control_check(traj, p));
    return out;
}

}  // namespace rimming::cli
