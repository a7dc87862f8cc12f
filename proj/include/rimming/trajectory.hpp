/**
 * @file trajectory.hpp
 * @brief Records produced by a time integration run.
 */

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rimming/grid.hpp"

namespace rimming {

/// One time-stamped row of monitored functionals. Entropy fields hold +inf
/// whenever min_h <= 0.
struct DiagnosticsRecord {
    double t = 0.0;
    double mass = 0.0;
    double l2 = 0.0;
    double h1 = 0.0;
    double min_h = 0.0;
    double max_h = 0.0;
    double energy = 0.0;
    double entropy0 = 0.0;
    double entropy_eps = 0.0;
    std::optional<double> alpha_entropy;
    /// Running int_0^t int f (a0 h_xxx + a1 h_x + a2 w')^2.
    double dissipation_cum = 0.0;
    /// int h_x^2 with the compact difference.
    double gradient_sq = 0.0;
    /// int h_x^2 + (|a1|/a0)(|a1|/a0 + 2 delta) int G_eps(h) + a0 int_0^t int f h_xxx^2.
    double k1_lhs = 0.0;
    /// Running maximum of k1_lhs over all accepted steps so far.
    double k1_max = 0.0;
    /// Running int_0^t sup|h|^3.
    double sup_cubed_integral = 0.0;
};

struct Snapshot {
    double t = 0.0;
    PeriodicField h;
    DiagnosticsRecord diag;
};

struct StepLog {
    double t = 0.0;
    double dt = 0.0;
    double energy = 0.0;
    double mass = 0.0;
    double min_h = 0.0;
    int newton_iters = 0;
    /// sup |h_new - h_old| / dt.
    double max_rate = 0.0;
};

enum class Termination { Completed, SteadyReached, Failed };

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::Completed: return "completed";
        case Termination::SteadyReached: return "steady_reached";
        case Termination::Failed: return "failed";
    }
    return "unknown";
}

struct Trajectory {
    std::vector<Snapshot> snapshots;
    std::vector<StepLog> steps;
    Termination termination = Termination::Completed;
    std::string message;
    double newton_tol = 0.0;
    /// Number of accepted steps (also counted when steps are not logged).
    long accepted_steps = 0;
    /// Count of snapshots whose min h fell below the configured positivity floor.
    int below_floor = 0;
    /// Sum over steps of a1+ |h_new - h_old|_2^2 / 2: the energy a backward-Euler
    /// step can gain from the negative part of the quadratic form.
    double time_slack = 0.0;
};

}  // namespace rimming
