/**
 * @file bounds.hpp
 * @brief Explicit constants, a-priori bounds and runtime monitors.
 *
 * Monitors never abort a run; they return BoundReport values and the caller
 * decides which failures are fatal.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "rimming/errors.hpp"
#include "rimming/grid.hpp"
#include "rimming/model.hpp"
#include "rimming/trajectory.hpp"

namespace rimming {

struct BConstants {
    double b1 = 0.0, b2 = 0.0, b3 = 0.0, b4 = 0.0, b5 = 0.0;
};

/// Poincare/Gagliardo-Nirenberg type constants for exponents p >= r >= 1.
inline BConstants b_constants(double p, double r, double omega_len) {
    if (!(r >= 1.0) || !(p >= r)) throw ParameterError("b_constants: need p >= r >= 1");
    if (!(omega_len > 0.0)) throw ParameterError("b_constants: domain length must be > 0");
    BConstants b;
    b.b1 = std::pow(omega_len, p) / (p * std::pow(2.0, p - 1.0));
    const double a = (1.0 / r - 1.0 / p) / (1.0 / r + 0.5);
    b.b2 = std::pow(1.0 + r / 2.0, a * p);
    b.b3 = p <= 2.0 ? b.b1 * std::pow(omega_len, (2.0 - p) / p) : std::pow(b.b1, (p + 2.0) / 2.0) * b.b2;
    b.b4 = std::pow(2.0, p - 1.0) * b.b3;
    b.b5 = std::pow(2.0 / omega_len, p - 1.0);
    return b;
}

struct CConstants {
    double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0, c5 = 0.0, c6 = 0.0, c7 = 0.0, c8 = 0.0, c9 = 0.0;
};

/// c1..c9 with r = 2 throughout: c1 takes b2 at p = 4 and b4 at p = 6,
/// c2 takes b5 at p = 6, c5 and c6 take b4, b5 at p = 3.
inline CConstants c_constants(const Params& p, double M, double delta) {
    if (!(M > 0.0)) throw ParameterError("c_constants: M must be > 0");
    const double L = p.omega();
    const BConstants b4_2 = b_constants(4.0, 2.0, L);
    const BConstants b6 = b_constants(6.0, 2.0, L);
    const BConstants b3 = b_constants(3.0, 2.0, L);
    const double wp_inf2 = p.w.wp_sup() * p.w.wp_sup();
    const double wp_l22 = p.w.wp_l2() * p.w.wp_l2();
    const double a1sq = p.a1 * p.a1 / p.a0;
    const double a2sq = p.a2 * p.a2 / p.a0;
    CConstants c;
    c.c1 = b4_2.b2 * b4_2.b2 / 8.0 + b6.b4 / 2.0;
    c.c2 = std::pow(M, 6.0) * b6.b5 / 2.0;
    c.c3 = p.a1 * p.a1 / (2.0 * p.a0) + delta * std::abs(p.a1);
    c.c4 = a1sq * c.c1;
    c.c5 = a2sq * wp_inf2 * b3.b4;
    c.c6 = a1sq * c.c2 + a2sq * wp_inf2 * b3.b5 * M * M * M + delta * a2sq * wp_l22;
    c.c7 = c.c4 + c.c5 + c.c6;
    c.c8 = std::abs(p.a1) + std::abs(p.a2) * p.w.wp_l2();
    c.c9 = 2.0 * c.c3 * c.c8 / p.a0 + 2.0 * c.c7;
    return c;
}

enum class ExistenceStatus { Finite, Unbounded, InfiniteEntropy };

struct ExistenceTime {
    double value = 0.0;
    ExistenceStatus status = ExistenceStatus::Finite;
};

/// 9/(40 c9) min{1, (int h_x^2 + 2 (c3/a0) int 1/(2h))^-2} with delta = 0.
inline ExistenceTime local_existence_time(const PeriodicField& h, const Params& p) {
    require_same_grid(h.grid(), p.grid(), "local_existence_time");
    if (!(h.min() > 0.0)) return {0.0, ExistenceStatus::InfiniteEntropy};
    const double M = integrate(h);
    const CConstants c = c_constants(p, M, 0.0);
    if (c.c9 == 0.0) return {std::numeric_limits<double>::infinity(), ExistenceStatus::Unbounded};
    const double v = dirichlet_integral(h) + 2.0 * c.c3 / p.a0 * entropy_integral(h, 0.0);
    return {9.0 / (40.0 * c.c9) * std::min(1.0, 1.0 / (v * v)), ExistenceStatus::Finite};
}

struct BoundReport {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool satisfied = true;
    /// rhs - lhs.
    double slack = 0.0;
};

inline BoundReport make_report(std::string name, double lhs, double rhs, double tol) {
    return BoundReport{std::move(name), lhs, rhs, lhs <= rhs + tol, rhs - lhs};
}

/// int h^2 <= 6^(2/3) M^(4/3) (int h_x^2)^(1/3) + M^2/|Omega| for h >= 0.
inline BoundReport interpolation_check(const PeriodicField& h) {
    for (int i = 0; i < h.size(); ++i) {
        if (h[i] < 0.0) throw InputError("interpolation_check: negative value at index " + std::to_string(i));
    }
    double sq = 0.0;
    for (double v : h.values()) sq += v * v;
    const double lhs = sq * h.grid().dx();
    const double M = integrate(h);
    const double rhs = std::pow(6.0, 2.0 / 3.0) * std::pow(M, 4.0 / 3.0) * std::cbrt(dirichlet_integral(h)) +
                       M * M / h.grid().length();
    return make_report("interpolation", lhs, rhs, 1e-12 * std::max(1.0, rhs));
}

/// Constant of the H^1 growth bound, split on the sign of a0 + a1.
inline double lemma_k3(const Params& p, double M) {
    const double base = std::abs(p.a2) * p.w.w_sup() * M;
    const double s = p.a0 + p.a1;
    if (s <= 0.0) return base;
    return base + M * M * (2.0 * std::sqrt(6.0) * std::pow(s, 1.5) / (3.0 * std::sqrt(p.a0)) + s / (2.0 * p.omega()));
}

/// Slope of the linear-in-time energy bound: |a2 a3| |w'|_inf (|Omega|^2 sqrt(K1) + 2M).
inline double k_constant(const Params& p, double K1, double M) {
    if (!(K1 >= 0.0)) throw ParameterError("k_constant: K1 must be >= 0");
    const double L = p.omega();
    return std::abs(p.a2 * p.a3) * p.w.wp_sup() * (L * L * std::sqrt(K1) + 2.0 * M);
}

/// (4/a0)(E0 + K T + K3): upper bound for |h(T)|_{H^1}^2.
inline double h1_growth_bound(double E0_initial, double M, double T, const Params& p, double K1) {
    if (!(T >= 0.0)) throw ParameterError("h1_growth_bound: T must be >= 0");
    return 4.0 / p.a0 * (E0_initial + k_constant(p, K1, M) * T + lemma_k3(p, M));
}

/// Largest monitored K1 over a trajectory.
inline double trajectory_k1(const Trajectory& traj) {
    double k1 = 0.0;
    for (const Snapshot& s : traj.snapshots) k1 = std::max({k1, s.diag.k1_max, s.diag.k1_lhs});
    return k1;
}

/// E(T) + int_0^T D <= E(0) + K T, up to the solver tolerance and the
/// trajectory's backward-Euler slack.
inline BoundReport dissipation_check(const Trajectory& traj, const Params& p) {
    if (traj.snapshots.size() < 2) return BoundReport{"dissipation", 0.0, 0.0, true, 0.0};
    const DiagnosticsRecord& first = traj.snapshots.front().diag;
    const DiagnosticsRecord& last = traj.snapshots.back().diag;
    const double K = k_constant(p, trajectory_k1(traj), first.mass);
    const double lhs = last.energy + last.dissipation_cum;
    const double rhs = first.energy + K * (last.t - first.t);
    const double tol = 1e-6 * std::abs(rhs) +
                       static_cast<double>(traj.accepted_steps) * traj.newton_tol * p.omega() + traj.time_slack;
    return make_report("dissipation", lhs, rhs, tol);
}

/// int h_x^2(T) <= max{|w'|_2^2, int h_x^2(0)} exp(2 (a1^2 + a2^2)/a0 int_0^T sup|h|^3)
/// at every snapshot; returns the report with the least slack.
inline BoundReport gradient_bound_check(const Trajectory& traj, const Params& p) {
    BoundReport worst{"gradient_growth", 0.0, 0.0, true, std::numeric_limits<double>::infinity()};
    if (traj.snapshots.empty()) return BoundReport{"gradient_growth", 0.0, 0.0, true, 0.0};
    const double base = std::max(p.w.wp_l2() * p.w.wp_l2(), traj.snapshots.front().diag.gradient_sq);
    const double rate = 2.0 * (p.a1 * p.a1 + p.a2 * p.a2) / p.a0;
    for (const Snapshot& s : traj.snapshots) {
        const double expo = rate * s.diag.sup_cubed_integral;
        const double rhs = expo > 700.0 ? std::numeric_limits<double>::infinity() : base * std::exp(expo);
        const BoundReport r = make_report("gradient_growth", s.diag.gradient_sq, rhs, 1e-9 * std::max(1.0, base));
        if (!r.satisfied || r.slack < worst.slack) worst = r;
        if (!worst.satisfied) break;
    }
    return worst;
}

/// |h(t)|_{H^1}^2 <= (4/a0)(E0(0) + K t + K3) at every snapshot; returns the
/// report with the least slack.
inline BoundReport h1_control_check(const Trajectory& traj, const Params& p) {
    if (traj.snapshots.empty()) return BoundReport{"h1_control", 0.0, 0.0, true, 0.0};
    const DiagnosticsRecord& first = traj.snapshots.front().diag;
    const double K1 = trajectory_k1(traj);
    BoundReport worst{"h1_control", 0.0, 0.0, true, std::numeric_limits<double>::infinity()};
    for (const Snapshot& s : traj.snapshots) {
        const double rhs = h1_growth_bound(first.energy, first.mass, s.t - first.t, p, K1);
        const BoundReport r = make_report("h1_control", s.diag.h1 * s.diag.h1, rhs, 1e-9 * std::max(1.0, std::abs(rhs)));
        if (!r.satisfied || r.slack < worst.slack) worst = r;
        if (!worst.satisfied) break;
    }
    return worst;
}

/// Mass drift relative to the first snapshot.
inline BoundReport mass_check(const Trajectory& traj, double rel_tol) {
    if (traj.snapshots.empty()) return BoundReport{"mass", 0.0, 0.0, true, 0.0};
    const double m0 = traj.snapshots.front().diag.mass;
    double worst = 0.0;
    for (const Snapshot& s : traj.snapshots) worst = std::max(worst, std::abs(s.diag.mass - m0));
    return make_report("mass", worst, rel_tol * std::abs(m0), 0.0);
}

/// int zeta^4 / h per snapshot; +inf if h <= 0 where zeta > 0.
inline std::vector<double> positivity_monitor(const Trajectory& traj, const PeriodicField& zeta) {
    for (int i = 0; i < zeta.size(); ++i) {
        if (zeta[i] < 0.0) throw InputError("positivity_monitor: zeta must be nonnegative");
    }
    std::vector<double> out;
    out.reserve(traj.snapshots.size());
    for (const Snapshot& s : traj.snapshots) {
        require_same_grid(s.h.grid(), zeta.grid(), "positivity_monitor");
        double sum = 0.0;
        for (int i = 0; i < zeta.size(); ++i) {
            const double z2 = zeta[i] * zeta[i];
            if (z2 == 0.0) continue;
            if (!(s.h[i] > 0.0)) {
                sum = std::numeric_limits<double>::infinity();
                break;
            }
            sum += z2 * z2 / s.h[i];
        }
        out.push_back(sum * zeta.grid().dx());
    }
    return out;
}

enum class PeriodStatus { Found, Absent, Inconclusive };

struct PeriodEstimate {
    PeriodStatus status = PeriodStatus::Inconclusive;
    double period = 0.0;
    /// Autocorrelation at the detected lag.
    double correlation = 0.0;
};

/// Period of a (t, value) series from the first autocorrelation peak after
/// the first zero crossing. A peak counts only if its Pearson correlation is
/// at least 1 - tol. The series is resampled onto a uniform grid first.
inline PeriodEstimate detect_period(const std::vector<std::pair<double, double>>& series, double tol = 0.05) {
    if (series.size() < 16) return {};
    std::vector<std::pair<double, double>> s(series);
    std::sort(s.begin(), s.end());
    const double t0 = s.front().first;
    const double span = s.back().first - t0;
    if (!(span > 0.0)) return {};
    const std::size_t N = s.size();
    const double h = span / static_cast<double>(N - 1);
    std::vector<double> v(N);
    std::size_t j = 0;
    for (std::size_t i = 0; i < N; ++i) {
        const double t = t0 + h * static_cast<double>(i);
        while (j + 2 < N && s[j + 1].first < t) ++j;
        const double ta = s[j].first, tb = s[j + 1].first;
        const double w = tb > ta ? std::clamp((t - ta) / (tb - ta), 0.0, 1.0) : 0.0;
        v[i] = (1.0 - w) * s[j].second + w * s[j + 1].second;
    }
    double lo = v[0], hi = v[0];
    for (double x : v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    if (hi - lo <= tol * 1e-6 * std::max(std::abs(hi), std::abs(lo)) || hi == lo) {
        return {PeriodStatus::Absent, 0.0, 0.0};
    }
    auto pearson = [&](std::size_t lag) {
        const std::size_t m = N - lag;
        double ma = 0.0, mb = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            ma += v[i];
            mb += v[i + lag];
        }
        ma /= static_cast<double>(m);
        mb /= static_cast<double>(m);
        double sab = 0.0, saa = 0.0, sbb = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double a = v[i] - ma, b = v[i + lag] - mb;
            sab += a * b;
            saa += a * a;
            sbb += b * b;
        }
        return saa > 0.0 && sbb > 0.0 ? sab / std::sqrt(saa * sbb) : 0.0;
    };
    const std::size_t max_lag = N / 2;
    std::vector<double> r(max_lag + 1);
    for (std::size_t lag = 0; lag <= max_lag; ++lag) r[lag] = pearson(lag);
    std::size_t lag = 1;
    while (lag <= max_lag && r[lag] > 0.0) ++lag;
    if (lag > max_lag) return {PeriodStatus::Absent, 0.0, 0.0};
    std::size_t best = 0;
    for (std::size_t k = lag + 1; k < max_lag; ++k) {
        if (r[k] >= r[k - 1] && r[k] >= r[k + 1] && r[k] > 0.0) {
            best = k;
            break;
        }
    }
    if (best == 0) return {PeriodStatus::Inconclusive, 0.0, 0.0};
    if (r[best] < 1.0 - tol) return {PeriodStatus::Absent, 0.0, r[best]};
    // Parabolic refinement of the peak.
    double offset = 0.0;
    const double den = r[best - 1] - 2.0 * r[best] + r[best + 1];
    if (den < 0.0) offset = 0.5 * (r[best - 1] - r[best + 1]) / den;
    return {PeriodStatus::Found, (static_cast<double>(best) + offset) * h, r[best]};
}

}  // namespace rimming
