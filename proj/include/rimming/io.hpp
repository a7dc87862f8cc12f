/**
 * @file io.hpp
 * @brief CSV and JSON writers for trajectories, branches and bound reports.
 */

#pragma once

#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "rimming/bounds.hpp"
#include "rimming/steady.hpp"
#include "rimming/trajectory.hpp"

namespace rimming::io {

inline constexpr const char* artifact_version = "rimming 0.1.0";

/// JSON number, or a string marker for non-finite values.
inline nlohmann::json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

inline void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticsRecord>& rows) {
    os << "t,mass,l2,h1,min_h,energy,entropy0,entropy_eps,gradient_sq,dissipation_cum\n";
    os << std::setprecision(17);
    for (const DiagnosticsRecord& d : rows) {
        os << d.t << ',' << d.mass << ',' << d.l2 << ',' << d.h1 << ',' << d.min_h << ',' << d.energy << ','
           << d.entropy0 << ',' << d.entropy_eps << ',' << d.gradient_sq << ',' << d.dissipation_cum << '\n';
    }
}

inline void write_diagnostics_csv(std::ostream& os, const Trajectory& traj) {
    std::vector<DiagnosticsRecord> rows;
    rows.reserve(traj.snapshots.size());
    for (const Snapshot& s : traj.snapshots) rows.push_back(s.diag);
    write_diagnostics_csv(os, rows);
}

inline void write_steps_csv(std::ostream& os, const std::vector<StepLog>& steps) {
    os << "t,dt,energy,mass,min_h,newton_iters,max_rate\n";
    os << std::setprecision(17);
    for (const StepLog& s : steps) {
        os << s.t << ',' << s.dt << ',' << s.energy << ',' << s.mass << ',' << s.min_h << ',' << s.newton_iters << ','
           << s.max_rate << '\n';
    }
}

inline void write_branch_csv(std::ostream& os, const std::vector<SteadyProfile>& branch) {
    os << "step,q,mass,min_h,max_h,residual_sup,beta\n";
    os << std::setprecision(17);
    for (std::size_t k = 0; k < branch.size(); ++k) {
        const SteadyProfile& s = branch[k];
        os << k << ',' << s.q << ',' << s.mass << ',' << s.h.min() << ',' << s.h.max() << ',' << s.residual_sup << ','
           << s.q * s.q * s.mu / 3.0 << '\n';
    }
}

inline nlohmann::json to_json(const BoundReport& r) {
    return {{"name", r.name}, {"lhs", number(r.lhs)}, {"rhs", number(r.rhs)}, {"satisfied", r.satisfied},
            {"slack", number(r.slack)}};
}

inline nlohmann::json to_json(const std::vector<BoundReport>& reports) {
    nlohmann::json a = nlohmann::json::array();
    for (const BoundReport& r : reports) a.push_back(to_json(r));
    return a;
}

}  // namespace rimming::io
