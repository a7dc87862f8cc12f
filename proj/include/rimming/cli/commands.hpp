/**
 * @file commands.hpp
 * @brief Run orchestration for the evolve, steady, sweep and check commands.
 *
 * Each command writes into one output directory and returns a process exit
 * code: 0 success, 1 a hard check failed, 2 bad input, 3 solver failure.
 * Failures also leave an error.json record in the output directory.
 */

#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "rimming/bounds.hpp"
#include "rimming/cli/checks.hpp"
#include "rimming/cli/config.hpp"
#include "rimming/evolve.hpp"
#include "rimming/io.hpp"
#include "rimming/steady.hpp"

namespace rimming::cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode { kOk = 0, kCheckFailed = 1, kBadInput = 2, kSolverFailed = 3 };

namespace detail {

inline std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot write '" + path.string() + "'");
    return os;
}

inline void write_json(const fs::path& path, const json& j) { open_out(path) << j.dump(2) << '\n'; }

inline std::string index_name(const std::string& stem, std::size_t k) {
    std::ostringstream os;
    os << stem << '_' << std::setw(4) << std::setfill('0') << k << ".csv";
    return os.str();
}

inline json error_record(const std::string& kind, const std::string& message, const std::string& mode) {
    return {{"error", kind}, {"message", message}, {"mode", mode}, {"version", io::artifact_version}};
}

inline json config_echo(const RunConfig& cfg) {
    json j = {{"mode", to_string(cfg.mode)},
              {"grid", {{"n", cfg.grid.n()}, {"length", cfg.grid.length()}, {"origin", cfg.grid.origin()}}},
              {"seed", cfg.seed},
              {"source", cfg.source}};
    if (cfg.params) {
        const ParamSpec& p = *cfg.params;
        if (p.physical) j["physical"] = {{"chi", p.chi}, {"mu", p.mu}};
        else j["params"] = {{"a0", p.a0}, {"a1", p.a1}, {"a2", p.a2}, {"a3", p.a3}, {"forcing", p.sine_forcing ? "sine" : "none"}};
    }
    return j;
}

inline json evolve_echo(const EvolveConfig& c) {
    json j = {{"t_end", c.t_end},
              {"dt_init", c.dt_init},
              {"dt_min", c.dt_min},
              {"dt_max", c.dt_max},
              {"newton_tol", c.newton_tol},
              {"newton_max_iter", c.newton_max_iter},
              {"snapshot_times", c.snapshot_times},
              {"snapshot_every", c.snapshot_every},
              {"delta", c.knobs.delta},
              {"epsilon", c.knobs.epsilon},
              {"theta", c.knobs.theta},
              {"positivity_floor", c.positivity_floor},
              {"stop_when_steady", c.stop_when_steady},
              {"interface_mobility", c.interface_mobility == InterfaceMobility::Entropy ? "entropy" : "arithmetic"}};
    if (c.alpha) j["alpha"] = *c.alpha;
    return j;
}

/// Snapshots, diagnostics, step log, bound reports and a manifest.
inline json write_trajectory(const fs::path& dir, const Trajectory& traj, const Params& p, const RunConfig& cfg,
                             const EvolveConfig& ecfg) {
    fs::create_directories(dir / "snapshots");
    json index = json::array();
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
        const std::string name = index_name("snapshot", k);
        auto os = open_out(dir / "snapshots" / name);
        write_field_csv(os, traj.snapshots[k].h, "h");
        index.push_back({{"t", traj.snapshots[k].t}, {"file", "snapshots/" + name}});
    }
    {
        auto os = open_out(dir / "diagnostics.csv");
        io::write_diagnostics_csv(os, traj);
    }
    if (!traj.steps.empty()) {
        auto os = open_out(dir / "steps.csv");
        io::write_steps_csv(os, traj.steps);
    }
    const std::vector<BoundReport> reports = trajectory_reports(traj, p);
    write_json(dir / "bounds.json", io::to_json(reports));

    json positivity = json::array();
    const std::vector<double> inv = positivity_monitor(traj, PeriodicField::constant(p.grid(), 1.0));
    for (std::size_t k = 0; k < inv.size(); ++k) {
        positivity.push_back({{"t", traj.snapshots[k].t}, {"int_inv_h", io::number(inv[k])}});
    }
    json manifest = {{"version", io::artifact_version},
                     {"config", config_echo(cfg)},
                     {"evolve", evolve_echo(ecfg)},
                     {"coefficients", {{"a0", p.a0}, {"a1", p.a1}, {"a2", p.a2}, {"a3", p.a3}}},
                     {"snapshots", index},
                     {"termination", to_string(traj.termination)},
                     {"message", traj.message},
                     {"accepted_steps", traj.accepted_steps},
                     {"snapshots_below_floor", traj.below_floor},
                     {"positivity", positivity}};
    if (!traj.snapshots.empty()) {
        const ExistenceTime tl = local_existence_time(traj.snapshots.front().h, p);
        manifest["t_loc"] = io::number(tl.value);
    }
    write_json(dir / "manifest.json", manifest);
    return manifest;
}

inline void report_error(const fs::path& dir, const json& rec) {
    std::cerr << rec.dump() << '\n';
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ofstream os(dir / "error.json");
    if (os) os << rec.dump(2) << '\n';
}

inline Params with_parameter(const RunConfig& cfg, const std::string& name, double v) {
    ParamSpec s = *cfg.params;
    if (name == "a0") s.a0 = v;
    else if (name == "a1") s.a1 = v;
    else if (name == "a2") s.a2 = v;
    else if (name == "a3") s.a3 = v;
    else if (name == "chi") s.chi = v;
    else if (name == "mu") s.mu = v;
    return s.build(cfg.grid);
}

}  // namespace detail

inline int cmd_evolve(const RunConfig& cfg, const fs::path& dir) {
    fs::create_directories(dir);
    const Params p = cfg.params->build(cfg.grid);
    const PeriodicField h0 = cfg.initial->evaluate(cfg.grid);
    try {
        const Trajectory traj = run(h0, p, cfg.evolve);
        detail::write_trajectory(dir, traj, p, cfg, cfg.evolve);
    } catch (const RunFailure& e) {
        detail::write_trajectory(dir, e.partial(), p, cfg, cfg.evolve);
        json rec = detail::error_record(e.diverged() ? "Diverged" : "StepFailure", e.what(), "evolve");
        rec["last_residual"] = io::number(e.last_residual());
        rec["t_reached"] = e.partial().snapshots.empty() ? 0.0 : e.partial().snapshots.back().t;
        detail::report_error(dir, rec);
        return kSolverFailed;
    }
    return kOk;
}

inline int cmd_steady(const RunConfig& cfg, const fs::path& dir) {
    fs::create_directories(dir);
    const SteadySpec& s = cfg.steady;
    json manifest = {{"version", io::artifact_version}, {"config", detail::config_echo(cfg)}};
    std::vector<SteadyProfile> branch;

    if (s.chi == 0.0) {
        // Cubic profile: positive roots at every grid point plus the smooth
        // branch for each flux in [start, stop].
        {
            auto os = detail::open_out(dir / "moffatt_roots.csv");
            os << "x,root_0,root_1\n" << std::setprecision(17);
            for (int i = 0; i < cfg.grid.n(); ++i) {
                const std::vector<double> r = moffatt_roots(s.mu, s.start, cfg.grid.x(i));
                os << cfg.grid.x(i) << ',';
                if (!r.empty()) os << r[0];
                os << ',';
                if (r.size() > 1) os << r[1];
                os << '\n';
            }
        }
        manifest["critical_flux"] = critical_flux(s.mu);
        for (double q = s.start; q <= s.stop * (1.0 + 1e-12); q += s.step) {
            const std::optional<SteadyProfile> prof = moffatt_profile(s.mu, q, cfg.grid);
            if (!prof) {
                manifest["not_exists_from_q"] = q;
                break;
            }
            branch.push_back(*prof);
        }
    } else {
        std::ostringstream log;
        try {
            SteadyProfile init{asymptotic_guess(s.start, cfg.grid, s.mu), s.start, s.mu, s.chi};
            if (s.moffatt_guess) {
                const std::optional<SteadyProfile> m = moffatt_profile(s.mu, s.start, cfg.grid);
                if (!m) throw InputError("steady: no cubic profile at q = start to use as guess");
                init.h = m->h;
            }
            const ContinuationStep first{ContinuationMode::FixedFlux, s.start, s.max_newton, s.tol};
            const SteadyProfile start = capillary_solve(init, first);
            std::vector<ContinuationStep> schedule;
            const double from = s.mode == ContinuationMode::FixedFlux ? s.start : start.mass;
            const double dir_sign = s.stop >= from ? 1.0 : -1.0;
            for (int k = 1;; ++k) {
                const double v = from + dir_sign * k * s.step;
                const bool last = dir_sign * (v - s.stop) >= -1e-12 * std::max(1.0, std::abs(s.stop));
                schedule.push_back({s.mode, last ? s.stop : v, s.max_newton, s.tol});
                if (last || s.stop == from) break;
            }
            if (s.stop == from) schedule.clear();
            branch = continue_branch(start, schedule, s.min_increment, &log);
        } catch (const NoConvergence& e) {
            json rec = detail::error_record("NoConvergence", e.what(), "steady");
            rec["last_residual"] = io::number(e.last_residual());
            detail::report_error(dir, rec);
            return kSolverFailed;
        } catch (const BranchLost& e) {
            detail::report_error(dir, detail::error_record("BranchLost", e.what(), "steady"));
            return kSolverFailed;
        }
        auto os = detail::open_out(dir / "continuation.log");
        os << log.str();
    }

    {
        auto os = detail::open_out(dir / "branch.csv");
        io::write_branch_csv(os, branch);
    }
    json profiles = json::array();
    for (std::size_t k = 0; k < branch.size(); ++k) {
        const std::string name = detail::index_name("profile", k);
        auto os = detail::open_out(dir / name);
        write_field_csv(os, branch[k].h, "h");
        const SolvabilityResiduals sr = solvability_residuals(branch[k]);
        profiles.push_back({{"file", name},
                            {"q", branch[k].q},
                            {"mass", branch[k].mass},
                            {"residual_sup", branch[k].residual_sup},
                            {"r0", sr.r0},
                            {"r1", sr.r1},
                            {"beta", sr.beta},
                            {"nonexistence_violated", sr.nonexistence_violated}});
    }
    manifest["profiles"] = profiles;
    manifest["nonexistence_threshold"] = nonexistence_threshold(s.mu);
    if (!branch.empty()) manifest["endpoint_q"] = branch.back().q;
    detail::write_json(dir / "manifest.json", manifest);
    return kOk;
}

inline int cmd_sweep(const RunConfig& cfg, const fs::path& dir) {
    fs::create_directories(dir);
    struct Result {
        std::string status = "ok";
        std::string message;
        double t_final = 0.0, min_h = 0.0, max_h = 0.0, l2 = 0.0;
        PeriodEstimate period;
    };
    const std::size_t count = cfg.sweep.values.size();
    std::vector<Result> results(count);
    std::atomic<std::size_t> next{0};
    const PeriodicField h0 = cfg.initial->evaluate(cfg.grid);

    auto worker = [&]() {
        for (std::size_t k = next++; k < count; k = next++) {
            Result& res = results[k];
            const fs::path sub = dir / ("run_" + std::to_string(k));
            try {
                const Params p = detail::with_parameter(cfg, cfg.sweep.parameter, cfg.sweep.values[k]);
                Trajectory traj;
                try {
                    traj = run(h0, p, cfg.evolve);
                } catch (const RunFailure& e) {
                    traj = e.partial();
                    res.status = "failed";
                    res.message = e.what();
                }
                detail::write_trajectory(sub, traj, p, cfg, cfg.evolve);
                const DiagnosticsRecord& last = traj.snapshots.back().diag;
                res.t_final = last.t;
                res.min_h = last.min_h;
                res.max_h = last.max_h;
                res.l2 = last.l2;
                std::vector<std::pair<double, double>> series;
                const double t_cut = cfg.sweep.trim * cfg.evolve.t_end;
                for (const Snapshot& s : traj.snapshots) {
                    if (s.t >= t_cut) series.emplace_back(s.t, s.diag.l2);
                }
                res.period = detect_period(series, cfg.sweep.period_tol);
            } catch (const std::exception& e) {
                res.status = "error";
                res.message = e.what();
            }
        }
    };
    const int nworkers = std::min<int>(cfg.sweep.workers, static_cast<int>(count));
    std::vector<std::thread> pool;
    for (int w = 1; w < nworkers; ++w) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();

    auto os = detail::open_out(dir / "sweep_index.csv");
    os << "value,dir,status,t_final,min_h,max_h,l2,period_status,period,correlation\n" << std::setprecision(17);
    json runs = json::array();
    bool any_failed = false;
    for (std::size_t k = 0; k < count; ++k) {
        const Result& r = results[k];
        const char* ps = r.period.status == PeriodStatus::Found    ? "found"
                         : r.period.status == PeriodStatus::Absent ? "absent"
                                                                   : "inconclusive";
        os << cfg.sweep.values[k] << ",run_" << k << ',' << r.status << ',' << r.t_final << ',' << r.min_h << ','
           << r.max_h << ',' << r.l2 << ',' << ps << ',' << r.period.period << ',' << r.period.correlation << '\n';
        runs.push_back({{"value", cfg.sweep.values[k]}, {"dir", "run_" + std::to_string(k)}, {"status", r.status},
                        {"message", r.message}});
        any_failed = any_failed || r.status != "ok";
    }
    detail::write_json(dir / "manifest.json", {{"version", io::artifact_version},
                                               {"config", detail::config_echo(cfg)},
                                               {"evolve", detail::evolve_echo(cfg.evolve)},
                                               {"parameter", cfg.sweep.parameter},
                                               {"runs", runs}});
    return any_failed ? kSolverFailed : kOk;
}

inline int cmd_check(const RunConfig& cfg, const fs::path& dir) {
    fs::create_directories(dir);
    std::vector<SuiteResult> suites;
    suites.push_back(interpolation_suite(cfg.grid, cfg.check.trials, cfg.seed));
    suites.push_back(interpolation_sharpness_suite(cfg.grid));
    suites.push_back(entropy_identity_suite());
    suites.push_back(mobility_suite(cfg.seed));
    suites.push_back(constant_preservation_suite(Grid(64)));
    suites.push_back(constants_determinism_suite(Grid(64)));

    bool passed = true;
    json js = json::array();
    for (const SuiteResult& s : suites) {
        passed = passed && s.passed;
        js.push_back({{"name", s.name}, {"passed", s.passed}, {"cases", s.cases}, {"failures", s.failures},
                      {"worst", io::number(s.worst)}, {"detail", s.detail}});
    }
    json out = {{"version", io::artifact_version}, {"config", detail::config_echo(cfg)}, {"suites", js}};

    if (cfg.check.run) {
        const Params p = cfg.params->build(cfg.grid);
        Trajectory traj;
        try {
            traj = run(cfg.initial->evaluate(cfg.grid), p, cfg.evolve);
        } catch (const RunFailure& e) {
            traj = e.partial();
            passed = false;
            out["run_failure"] = e.what();
        }
        const json manifest = detail::write_trajectory(dir / "run", traj, p, cfg, cfg.evolve);
        const std::vector<BoundReport> reports = trajectory_reports(traj, p);
        for (const BoundReport& r : reports) passed = passed && r.satisfied;
        out["reports"] = io::to_json(reports);
    }
    out["passed"] = passed;
    detail::write_json(dir / "check.json", out);
    for (const SuiteResult& s : suites) {
        std::cout << (s.passed ? "PASS " : "FAIL ") << s.name << " (" << s.cases << " cases, worst " << s.worst
                  << ")\n";
    }
    if (out.contains("reports")) {
        for (const json& r : out["reports"]) {
            std::cout << (r["satisfied"].get<bool>() ? "PASS " : "FAIL ") << r["name"].get<std::string>() << '\n';
        }
    }
    return passed ? kOk : kCheckFailed;
}

/// Dispatch with error records for input and solver failures.
inline int dispatch(const RunConfig& cfg, const fs::path& dir) {
    try {
        switch (cfg.mode) {
            case Mode::Evolve: return cmd_evolve(cfg, dir);
            case Mode::Steady: return cmd_steady(cfg, dir);
            case Mode::Sweep: return cmd_sweep(cfg, dir);
            case Mode::Check: return cmd_check(cfg, dir);
        }
    } catch (const InputError& e) {
        detail::report_error(dir, detail::error_record("InputError", e.what(), to_string(cfg.mode)));
        return kBadInput;
    } catch (const ParameterError& e) {
        detail::report_error(dir, detail::error_record("ParameterError", e.what(), to_string(cfg.mode)));
        return kBadInput;
    } catch (const Error& e) {
        detail::report_error(dir, detail::error_record("Error", e.what(), to_string(cfg.mode)));
        return kSolverFailed;
    } catch (const std::exception& e) {
        detail::report_error(dir, detail::error_record("IOError", e.what(), to_string(cfg.mode)));
        return kSolverFailed;
    }
    return kBadInput;
}

}  // namespace rimming::cli
