/**
 * @file evolve.hpp
 * @brief Conservative backward-Euler integrator for the regularized film equation.
 *
 * Semi-discrete form: dh_i/dt = -(F_{i+1/2} - F_{i-1/2}) / dx with
 *
 *   F_{i+1/2} = f(hm) (a0 D3 + a1 D1 + a2 Dw) + a3 hm,
 *   hm = (h_i + h_{i+1}) / 2,  D1 = (h_{i+1} - h_i) / dx,
 *   D3 = (h_{i+2} - 3 h_{i+1} + 3 h_i - h_{i-1}) / dx^3,
 *
 * Each step solves the nonlinear system by Newton's method with the analytic
 * periodic pentadiagonal Jacobian.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rimming/errors.hpp"
#include "rimming/grid.hpp"
#include "rimming/linalg.hpp"
#include "rimming/model.hpp"
#include "rimming/trajectory.hpp"

namespace rimming {

/// How the mobility is evaluated at cell interfaces.
enum class InterfaceMobility {
    /// f((h_i + h_{i+1}) / 2).
    Arithmetic,
    /// (b - a) / (G'(b) - G'(a)) with G'' = 1/f_eps, plus delta. Vanishes when
    /// either neighbour does, so a one-cell dimple cannot drain through it.
    Entropy,
};

struct EvolveConfig {
    InterfaceMobility interface_mobility = InterfaceMobility::Arithmetic;
    double dt_init = 1e-4;
    double dt_min = 1e-12;
    double dt_max = 1e-2;
    double t_end = 1.0;
    double newton_tol = 1e-10;
    int newton_max_iter = 12;
    std::vector<double> snapshot_times;
    /// Snapshot cadence; 0 disables.
    double snapshot_every = 0.0;
    RegularizationKnobs knobs;
    /// Diagnostic threshold for min h, never a clamp.
    double positivity_floor = 0.0;
    bool stop_when_steady = false;
    double steady_rate = 1e-9;
    int steady_window = 10;
    bool record_steps = true;
    std::optional<double> alpha;

    void validate() const {
        if (!(dt_min > 0.0)) throw ParameterError("evolve: dt_min must be > 0");
        if (!(dt_min <= dt_init && dt_init <= dt_max)) throw ParameterError("evolve: need dt_min <= dt_init <= dt_max");
        if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ParameterError("evolve: t_end must be > 0");
        if (!(newton_tol > 0.0)) throw ParameterError("evolve: newton_tol must be > 0");
        if (newton_max_iter < 1) throw ParameterError("evolve: newton_max_iter must be >= 1");
        if (!(snapshot_every >= 0.0)) throw ParameterError("evolve: snapshot_every must be >= 0");
        if (!(positivity_floor >= 0.0)) throw ParameterError("evolve: positivity_floor must be >= 0");
        if (steady_window < 1) throw ParameterError("evolve: steady_window must be >= 1");
        for (double t : snapshot_times) {
            if (!(t >= 0.0) || !std::isfinite(t)) throw ParameterError("evolve: snapshot times must be >= 0");
        }
        if (alpha && (!(*alpha > -0.5 && *alpha < 1.0) || *alpha == 0.0)) {
            throw ParameterError("evolve: alpha must lie in (-1/2, 1) and be nonzero");
        }
        knobs.validate();
    }
};

struct EvolveState {
    double t = 0.0;
    PeriodicField h;
    double dt = 0.0;
    long step_count = 0;
    int newton_iters_last = 0;
};

/// Thrown by run(); carries everything recorded before the failure.
class RunFailure : public StepFailure {
public:
    RunFailure(const std::string& what, double last_residual, bool diverged, Trajectory partial)
        : StepFailure(what, last_residual), diverged_(diverged), partial_(std::move(partial)) {}
    bool diverged() const { return diverged_; }
    const Trajectory& partial() const { return partial_; }

private:
    bool diverged_;
    Trajectory partial_;
};

/// h0 + eps^theta.
inline PeriodicField initial_lift(const PeriodicField& h0, const RegularizationKnobs& knobs) {
    knobs.validate();
    for (int i = 0; i < h0.size(); ++i) {
        if (h0[i] < 0.0) throw InputError("initial_lift: negative initial data at index " + std::to_string(i));
    }
    if (knobs.epsilon == 0.0) return h0;
    const double lift = std::pow(knobs.epsilon, knobs.theta);
    return transform(h0, [lift](double v) { return v + lift; });
}

namespace detail {

struct InterfaceTerms {
    std::vector<double> hm;    // interface mean
    std::vector<double> mob;   // interface mobility
    std::vector<double> dm0;   // d mob / d h_i
    std::vector<double> dm1;   // d mob / d h_{i+1}
    std::vector<double> g;     // a0 D3 + a1 D1 + a2 Dw
    std::vector<double> d3;    // D3
    std::vector<double> flux;  // F
    std::vector<double> scale; // sum of magnitudes of the terms in F
};

/// Entropy-consistent mean of the mobility and its partial derivatives.
inline void entropy_mobility(double a, double b, const RegularizationKnobs& k, double& m, double& ma, double& mb) {
    if (!(a > 0.0) || !(b > 0.0)) {
        m = k.delta;
        ma = mb = 0.0;
        return;
    }
    const double e = k.epsilon;
    const double N = 6.0 * a * a * a * b * b * b;
    const double D = 3.0 * a * b * (a + b) + 2.0 * e * (a * a + a * b + b * b);
    const double Na = 18.0 * a * a * b * b * b, Nb = 18.0 * a * a * a * b * b;
    const double Da = 6.0 * a * b + 3.0 * b * b + 2.0 * e * (2.0 * a + b);
    const double Db = 6.0 * a * b + 3.0 * a * a + 2.0 * e * (2.0 * b + a);
    m = N / D + k.delta;
    ma = (Na * D - N * Da) / (D * D);
    mb = (Nb * D - N * Db) / (D * D);
}

inline void interface_terms(std::span<const double> h, double dx, const Params& p, const RegularizationKnobs& k,
                            InterfaceTerms& out, InterfaceMobility mean = InterfaceMobility::Arithmetic) {
    const int n = static_cast<int>(h.size());
    const auto N = static_cast<std::size_t>(n);
    out.hm.resize(N);
    out.mob.resize(N);
    out.dm0.resize(N);
    out.dm1.resize(N);
    out.g.resize(N);
    out.d3.resize(N);
    out.flux.resize(N);
    out.scale.resize(N);
    const double inv1 = 1.0 / dx;
    const double inv3 = inv1 * inv1 * inv1;
    const auto& wph = p.w.wp_half_values();
    for (int i = 0; i < n; ++i) {
        const double hm1 = h[static_cast<std::size_t>((i - 1 + n) % n)];
        const double h0 = h[static_cast<std::size_t>(i)];
        const double h1 = h[static_cast<std::size_t>((i + 1) % n)];
        const double h2 = h[static_cast<std::size_t>((i + 2) % n)];
        const auto I = static_cast<std::size_t>(i);
        const double hm = 0.5 * (h0 + h1);
        const double D1 = (h1 - h0) * inv1;
        const double D3 = (h2 - 3.0 * h1 + 3.0 * h0 - hm1) * inv3;
        const double g = p.a0 * D3 + p.a1 * D1 + p.a2 * wph[I];
        double m, m0, m1;
        if (mean == InterfaceMobility::Entropy) {
            entropy_mobility(h0, h1, k, m, m0, m1);
        } else {
            m = mobility(hm, k);
            m0 = m1 = 0.5 * mobility_derivative(hm, k.epsilon);
        }
        out.hm[I] = hm;
        out.mob[I] = m;
        out.dm0[I] = m0;
        out.dm1[I] = m1;
        out.g[I] = g;
        out.d3[I] = D3;
        out.flux[I] = m * g + p.a3 * hm;
        out.scale[I] = m * (std::abs(p.a0) * (std::abs(h2) + 3.0 * std::abs(h1) + 3.0 * std::abs(h0) + std::abs(hm1)) * inv3 +
                            std::abs(p.a1) * (std::abs(h1) + std::abs(h0)) * inv1 + std::abs(p.a2 * wph[I])) +
                       std::abs(p.a3 * hm);
    }
}

}  // namespace detail

/// Interface fluxes; entry i holds F_{i+1/2}.
inline PeriodicField flux(const PeriodicField& h, const Params& p, const RegularizationKnobs& knobs,
                          InterfaceMobility mean = InterfaceMobility::Arithmetic) {
    require_same_grid(h.grid(), p.grid(), "flux");
    detail::InterfaceTerms t;
    detail::interface_terms(h.values(), h.grid().dx(), p, knobs, t, mean);
    return PeriodicField(h.grid(), std::move(t.flux));
}

/// Semi-discrete right-hand side dh/dt = -(F_{i+1/2} - F_{i-1/2}) / dx.
inline PeriodicField rate(const PeriodicField& h, const Params& p, const RegularizationKnobs& knobs,
                          InterfaceMobility mean = InterfaceMobility::Arithmetic) {
    const PeriodicField f = flux(h, p, knobs, mean);
    const double inv = 1.0 / h.grid().dx();
    std::vector<double> v(static_cast<std::size_t>(h.size()));
    for (int i = 0; i < h.size(); ++i) v[static_cast<std::size_t>(i)] = -(f[i] - f.at(i - 1)) * inv;
    return PeriodicField(h.grid(), std::move(v));
}

/// Backward-Euler residual R(h) = h - h_old + dt/dx (F_{i+1/2} - F_{i-1/2}).
class BackwardEulerSystem {
public:
    BackwardEulerSystem(const Params& p, const RegularizationKnobs& k, std::span<const double> h_old, double dt,
                        InterfaceMobility mean = InterfaceMobility::Arithmetic)
        : p_(p), k_(k), h_old_(h_old), dt_(dt), dx_(p.grid().dx()), mean_(mean) {}

    /// Evaluates the residual at h; returns its sup norm (NaN if non-finite).
    double residual(std::span<const double> h, std::vector<double>& r) {
        const int n = static_cast<int>(h.size());
        detail::interface_terms(h, dx_, p_, k_, terms_, mean_);
        r.resize(static_cast<std::size_t>(n));
        const double c = dt_ / dx_;
        const double eps = std::numeric_limits<double>::epsilon();
        double sup = 0.0;
        at_roundoff_ = true;
        for (int i = 0; i < n; ++i) {
            const auto I = static_cast<std::size_t>(i);
            const auto Im = static_cast<std::size_t>((i - 1 + n) % n);
            const double v = h[I] - h_old_[I] + c * (terms_.flux[I] - terms_.flux[Im]);
            r[I] = v;
            if (!std::isfinite(v)) return std::numeric_limits<double>::quiet_NaN();
            sup = std::max(sup, std::abs(v));
            const double noise = eps * (std::abs(h[I]) + std::abs(h_old_[I]) + c * (terms_.scale[I] + terms_.scale[Im]));
            if (std::abs(v) > 16.0 * noise) at_roundoff_ = false;
        }
        return sup;
    }

    /// True if every residual entry of the last evaluation is at the level of
    /// the rounding error in its flux difference.
    bool at_roundoff() const { return at_roundoff_; }

    /// Jacobian at the state of the last residual() call.
    linalg::PeriodicBandMatrix jacobian() const {
        const int n = static_cast<int>(terms_.flux.size());
        linalg::PeriodicBandMatrix J(n, 2);
        const double inv1 = 1.0 / dx_;
        const double inv3 = inv1 * inv1 * inv1;
        const double c = dt_ / dx_;
        // dF_{i+1/2}/dh_{i+o}, o = -1..2.
        double dF[4];
        for (int i = 0; i < n; ++i) {
            const auto I = static_cast<std::size_t>(i);
            const double m = terms_.mob[I];
            const double g = terms_.g[I];
            dF[0] = m * (-p_.a0 * inv3);
            dF[1] = m * (3.0 * p_.a0 * inv3 - p_.a1 * inv1) + terms_.dm0[I] * g + 0.5 * p_.a3;
            dF[2] = m * (-3.0 * p_.a0 * inv3 + p_.a1 * inv1) + terms_.dm1[I] * g + 0.5 * p_.a3;
            dF[3] = m * (p_.a0 * inv3);
            // F_{i+1/2} enters rows i (+) and i+1 (-).
            const int row_plus = i;
            const int row_minus = (i + 1) % n;
            for (int o = -1; o <= 2; ++o) {
                J(row_plus, o) += c * dF[o + 1];
                J(row_minus, o - 1) -= c * dF[o + 1];
            }
        }
        for (int i = 0; i < n; ++i) J(i, 0) += 1.0;
        return J;
    }

    const detail::InterfaceTerms& terms() const { return terms_; }

private:
    const Params& p_;
    const RegularizationKnobs& k_;
    std::span<const double> h_old_;
    double dt_;
    double dx_;
    InterfaceMobility mean_;
    bool at_roundoff_ = false;
    detail::InterfaceTerms terms_;
};

struct NewtonOutcome {
    bool converged = false;
    bool diverged = false;
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> h;
};

/// Newton's method for one backward-Euler step of size dt from h_old.
inline NewtonOutcome newton_solve(std::span<const double> h_old, const Params& p, const EvolveConfig& cfg, double dt) {
    NewtonOutcome out;
    out.h.assign(h_old.begin(), h_old.end());
    BackwardEulerSystem sys(p, cfg.knobs, h_old, dt, cfg.interface_mobility);
    std::vector<double> r, trial, r_trial;
    double res = sys.residual(out.h, r);
    double hsup = 0.0;
    for (double v : h_old) hsup = std::max(hsup, std::abs(v));
    const double tol = cfg.newton_tol * std::max(1.0, hsup);
    double last_update = -1.0;
    for (int it = 1; it <= cfg.newton_max_iter + 1; ++it) {
        out.iterations = it;
        out.residual = res;
        if (!std::isfinite(res)) {
            out.diverged = true;
            return out;
        }
        // At fine grids and large dt the residual stalls at the rounding error
        // of the flux differences (which grows like dt / dx^4); accept once a
        // Newton update no longer moves the iterate.
        if (res <= tol || (last_update >= 0.0 && last_update <= tol && sys.at_roundoff())) {
            out.converged = true;
            return out;
        }
        if (it > cfg.newton_max_iter) break;
        std::vector<double> delta(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) delta[i] = -r[i];
        try {
            linalg::PeriodicBandSolver solver(sys.jacobian());
            solver.solve_in_place(delta);
        } catch (const NumericalError&) {
            return out;
        }
        double lambda = 1.0;
        double res_trial = 0.0;
        trial.resize(out.h.size());
        for (int damp = 0;; ++damp) {
            for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = out.h[i] + lambda * delta[i];
            res_trial = sys.residual(trial, r_trial);
            if ((std::isfinite(res_trial) && res_trial <= res) || damp == 4) break;
            lambda *= 0.5;
        }
        double dsup = 0.0;
        for (double d : delta) dsup = std::max(dsup, std::abs(d));
        last_update = lambda * dsup;
        out.h.swap(trial);
        r.swap(r_trial);
        res = res_trial;
    }
    return out;
}

/// One accepted backward-Euler step. The step size is clipped so that t does
/// not pass t_stop. On Newton failure dt is halved and the step retried.
inline EvolveState step(const EvolveState& state, const Params& p, const EvolveConfig& cfg,
                        double t_stop = std::numeric_limits<double>::infinity()) {
    require_same_grid(state.h.grid(), p.grid(), "step");
    for (double v : state.h.values()) {
        if (!std::isfinite(v)) throw InputError("step: non-finite state");
    }
    double dt = std::min(state.dt, cfg.dt_max);
    bool clipped = false;
    if (state.t + dt >= t_stop) {
        dt = t_stop - state.t;
        clipped = true;
    }
    const double floor_dt = std::min(cfg.dt_min, dt);
    double last_res = 0.0;
    bool last_diverged = false;
    while (true) {
        NewtonOutcome o = newton_solve(state.h.values(), p, cfg, dt);
        last_res = o.residual;
        last_diverged = o.diverged;
        if (o.converged) {
            double hmin = o.h[0], hsup = 0.0;
            for (double v : o.h) {
                hmin = std::min(hmin, v);
                hsup = std::max(hsup, std::abs(v));
            }
            if (hmin >= -10.0 * cfg.newton_tol * std::max(1.0, hsup)) {
                EvolveState next{clipped && dt == t_stop - state.t ? t_stop : state.t + dt,
                                 PeriodicField(state.h.grid(), std::move(o.h)), 0.0, state.step_count + 1,
                                 o.iterations};
                const double base = clipped ? std::max(state.dt, dt) : dt;
                next.dt = o.iterations <= 5 ? std::min(base * 1.2, cfg.dt_max) : base;
                next.dt = std::max(next.dt, cfg.dt_min);
                return next;
            }
        }
        dt *= 0.5;
        clipped = false;
        if (dt < floor_dt * (1.0 - 1e-12)) {
            if (last_diverged) throw Diverged("step: Newton iterate became non-finite at minimum step", last_res);
            throw StepFailure("step: no convergence at minimum step size (t = " + std::to_string(state.t) + ")",
                              last_res);
        }
    }
}

namespace detail {

struct RunningIntegrals {
    double dissipation = 0.0;
    double hxxx = 0.0;
    double sup_cubed = 0.0;
    double k1_max = 0.0;
};

inline DiagnosticsRecord diagnose(double t, const PeriodicField& h, const Params& p, const EvolveConfig& cfg,
                                  const RunningIntegrals& acc) {
    DiagnosticsRecord d;
    d.t = t;
    d.mass = integrate(h);
    const FieldNorms nm = norms(h);
    d.l2 = nm.l2;
    d.h1 = nm.h1;
    d.min_h = nm.min;
    d.max_h = h.max();
    d.energy = energy(h, p);
    d.entropy0 = entropy_integral(h, 0.0);
    d.entropy_eps = entropy_integral(h, cfg.knobs.epsilon);
    if (cfg.alpha) d.alpha_entropy = alpha_entropy_integral(h, cfg.knobs.epsilon, *cfg.alpha);
    d.dissipation_cum = acc.dissipation;
    d.gradient_sq = dirichlet_integral(h);
    const double r = std::abs(p.a1) / p.a0;
    d.k1_lhs = d.gradient_sq + r * (r + 2.0 * cfg.knobs.delta) * d.entropy_eps + p.a0 * acc.hxxx;
    d.k1_max = std::max(acc.k1_max, d.k1_lhs);
    d.sup_cubed_integral = acc.sup_cubed;
    return d;
}

}  // namespace detail

/// Integrates from h0 (lifted by eps^theta) to cfg.t_end, recording a snapshot
/// at t = 0, at every requested time, and at the final time.
inline Trajectory run(const PeriodicField& h0, const Params& p, const EvolveConfig& cfg) {
    cfg.validate();
    require_same_grid(h0.grid(), p.grid(), "run");
    Trajectory traj;
    traj.newton_tol = cfg.newton_tol;

    std::vector<double> targets;
    for (double t : cfg.snapshot_times) {
        if (t > 0.0 && t < cfg.t_end) targets.push_back(t);
    }
    if (cfg.snapshot_every > 0.0) {
        for (long k = 1;; ++k) {
            const double t = static_cast<double>(k) * cfg.snapshot_every;
            if (t >= cfg.t_end * (1.0 - 1e-12)) break;
            targets.push_back(t);
        }
    }
    targets.push_back(cfg.t_end);
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end(),
                              [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }),
                  targets.end());

    EvolveState st{0.0, initial_lift(h0, cfg.knobs), cfg.dt_init, 0, 0};
    detail::RunningIntegrals acc;
    const double dx = p.grid().dx();

    auto snap = [&](const EvolveState& s) {
        DiagnosticsRecord d = detail::diagnose(s.t, s.h, p, cfg, acc);
        acc.k1_max = d.k1_max;
        if (d.min_h < cfg.positivity_floor) ++traj.below_floor;
        traj.snapshots.push_back(Snapshot{s.t, s.h, d});
    };
    {
        DiagnosticsRecord d0 = detail::diagnose(0.0, st.h, p, cfg, acc);
        acc.k1_max = d0.k1_lhs;
    }
    snap(st);

    int quiet = 0;
    std::size_t next = 0;
    while (next < targets.size()) {
        const double target = targets[next];
        std::optional<EvolveState> stepped;
        try {
            stepped = step(st, p, cfg, target);
        } catch (const StepFailure& e) {
            traj.termination = Termination::Failed;
            traj.message = e.what();
            snap(st);
            throw RunFailure(e.what(), e.last_residual(), dynamic_cast<const Diverged*>(&e) != nullptr,
                             std::move(traj));
        }
        EvolveState& nx = *stepped;
        const double dt = nx.t - st.t;

        // Running integrals at the new state (backward-Euler quadrature in time).
        detail::InterfaceTerms terms;
        detail::interface_terms(nx.h.values(), dx, p, cfg.knobs, terms, cfg.interface_mobility);
        double dis = 0.0, hx3 = 0.0;
        for (std::size_t i = 0; i < terms.g.size(); ++i) {
            dis += terms.mob[i] * terms.g[i] * terms.g[i];
            hx3 += terms.mob[i] * terms.d3[i] * terms.d3[i];
        }
        acc.dissipation += dt * dx * dis;
        acc.hxxx += dt * dx * hx3;
        double sup = 0.0, max_rate = 0.0, dh2 = 0.0;
        for (int i = 0; i < nx.h.size(); ++i) {
            const double dh = nx.h[i] - st.h[i];
            sup = std::max(sup, std::abs(nx.h[i]));
            max_rate = std::max(max_rate, std::abs(dh));
            dh2 += dh * dh;
        }
        traj.time_slack += 0.5 * std::max(p.a1, 0.0) * dh2 * dx;
        max_rate /= dt;
        acc.sup_cubed += dt * sup * sup * sup;
        {
            const double gsq = dirichlet_integral(nx.h);
            const double r = std::abs(p.a1) / p.a0;
            const double k1 = gsq + r * (r + 2.0 * cfg.knobs.delta) * entropy_integral(nx.h, cfg.knobs.epsilon) +
                              p.a0 * acc.hxxx;
            acc.k1_max = std::max(acc.k1_max, k1);
        }
        const double e = energy(nx.h, p);
        if (cfg.record_steps) {
            traj.steps.push_back(StepLog{nx.t, dt, e, integrate(nx.h), nx.h.min(), nx.newton_iters_last, max_rate});
        }
        ++traj.accepted_steps;
        st = std::move(nx);

        if (st.t == target) {
            snap(st);
            ++next;
        }
        quiet = max_rate < cfg.steady_rate ? quiet + 1 : 0;
        if (cfg.stop_when_steady && quiet >= cfg.steady_window) {
            if (traj.snapshots.back().t != st.t) snap(st);
            traj.termination = Termination::SteadyReached;
            traj.message = "steady state reached at t = " + std::to_string(st.t);
            return traj;
        }
    }
    traj.termination = Termination::Completed;
    return traj;
}

}  // namespace rimming
