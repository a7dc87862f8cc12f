/**
 * @file config.hpp
 * @brief Sectioned INI run configuration with strict key checking.
 *
 * The line-level syntax (sections, `key = value`, `;`/`#` comments, comma or
 * space separated lists) is read by CLI11's INI reader; this file maps the
 * items onto a RunConfig. Every accepted key is listed in key_table(), which
 * also drives `rimming reference`.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rimming/errors.hpp"
#include "rimming/evolve.hpp"
#include "rimming/grid.hpp"
#include "rimming/model.hpp"
#include "rimming/steady.hpp"

namespace rimming::cli {

enum class Mode { Evolve, Steady, Sweep, Check };

inline const char* to_string(Mode m) {
    switch (m) {
        case Mode::Evolve: return "evolve";
        case Mode::Steady: return "steady";
        case Mode::Sweep: return "sweep";
        case Mode::Check: return "check";
    }
    return "?";
}

struct KeySpec {
    std::string section;
    std::string key;
    std::string default_value;
    std::string description;
};

/// Keys shared by [evolve], [sweep] and [check].
inline std::vector<KeySpec> evolve_keys(const std::string& section) {
    return {
        {section, "t_end", "(required)", "final time"},
        {section, "dt_init", "1e-4", "initial step size"},
        {section, "dt_min", "1e-12", "smallest step before the run fails"},
        {section, "dt_max", "1e-2", "largest step"},
        {section, "newton_tol", "1e-10", "Newton residual tolerance (sup norm, scaled by max(1, sup h))"},
        {section, "newton_max_iter", "12", "Newton iterations per attempt"},
        {section, "snapshot_times", "", "list of snapshot times"},
        {section, "snapshot_every", "0", "snapshot cadence, 0 disables"},
        {section, "delta", "0", "mobility floor delta"},
        {section, "epsilon", "1e-8", "mobility regularization epsilon"},
        {section, "theta", "0.3", "initial lift exponent, h0 + epsilon^theta"},
        {section, "positivity_floor", "0", "min h threshold counted in diagnostics"},
        {section, "stop_when_steady", "false", "stop once sup|dh/dt| stays below steady_rate"},
        {section, "steady_rate", "1e-9", "rate threshold for stop_when_steady"},
        {section, "steady_window", "10", "consecutive quiet steps for stop_when_steady"},
        {section, "alpha", "", "alpha-entropy exponent to record, in (-1/2, 1) without 0"},
        {section, "interface_mobility", "arithmetic", "interface mobility: arithmetic (f of the mean) or entropy"},
    };
}

inline const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> table = [] {
        std::vector<KeySpec> t = {
            {"params", "a0", "(required)", "coefficient of h_xxx, must be > 0"},
            {"params", "a1", "0", "coefficient of h_x"},
            {"params", "a2", "0", "coefficient of w'"},
            {"params", "a3", "0", "linear advection coefficient"},
            {"params", "forcing", "sine", "w(x): sine (sin 2 pi x / L) or none"},
            {"physical", "chi", "(required)", "surface tension group; a0 = a1 = chi/3"},
            {"physical", "mu", "(required)", "gravity group; a2 = -mu/3, a3 = 1, w = sin x"},
            {"grid", "n", "256", "number of points, even and >= 8"},
            {"grid", "length", "2pi", "domain length (number, or 2pi)"},
            {"grid", "origin", "0", "left endpoint"},
            {"initial", "constant", "0", "mean level c of h0"},
            {"initial", "cos", "", "coefficients of cos(kx), k = 1, 2, ..."},
            {"initial", "sin", "", "coefficients of sin(kx), k = 1, 2, ..."},
            {"initial", "file", "", "CSV file with columns x,h on the configured grid"},
            {"steady", "mu", "(required)", "gravity group mu > 0"},
            {"steady", "chi", "(required)", "surface tension group; 0 selects the cubic profile"},
            {"steady", "mode", "flux", "continuation parameter: flux or mass"},
            {"steady", "start", "(required)", "flux q of the first solve"},
            {"steady", "stop", "start", "final flux (mode = flux) or mass (mode = mass)"},
            {"steady", "step", "0.05", "continuation increment"},
            {"steady", "tol", "1e-10", "Newton residual tolerance"},
            {"steady", "max_newton", "50", "Newton iterations per solve"},
            {"steady", "min_increment", "1e-6", "smallest bisected increment before the branch ends"},
            {"steady", "guess", "asymptotic", "first iterate: asymptotic (q + q^3 cos x / 3) or moffatt"},
            {"sweep", "parameter", "(required)", "a0, a1, a2, a3, chi or mu"},
            {"sweep", "values", "(required)", "list of parameter values"},
            {"sweep", "workers", "1", "concurrent runs"},
            {"sweep", "trim", "0.5", "fraction of each run dropped before period detection"},
            {"sweep", "period_tol", "0.05", "autocorrelation tolerance for period detection"},
            {"check", "trials", "1000", "random trigonometric polynomials for the interpolation suite"},
            {"check", "run", "false", "also evolve and check the trajectory bounds"},
            {"output", "dir", "out", "output directory"},
            {"run", "seed", "1", "seed for randomized checks"},
        };
        for (const char* s : {"evolve", "sweep", "check"}) {
            for (KeySpec k : evolve_keys(s)) {
                if (std::string(s) == "check" && k.key == "t_end") k.default_value = "(required if run = true)";
                t.push_back(std::move(k));
            }
        }
        return t;
    }();
    return table;
}

/// Markdown-style listing of every key.
inline void write_reference(std::ostream& os) {
    std::string section;
    for (const KeySpec& k : key_table()) {
        if (k.section != section) {
            section = k.section;
            os << "\n[" << section << "]\n";
        }
        os << "  " << k.key << " = " << (k.default_value.empty() ? "(unset)" : k.default_value) << "\n      "
           << k.description << '\n';
    }
}

struct ParamSpec {
    bool physical = false;
    double a0 = 1.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    bool sine_forcing = true;
    double chi = 0.0, mu = 0.0;

    Params build(const Grid& g) const {
        if (physical) return from_physical(chi, mu, g);
        return Params(a0, a1, a2, a3, sine_forcing ? Forcing::sine(g) : Forcing::constant(g, 0.0));
    }
};

struct InitialData {
    enum class Kind { Constant, TrigPolynomial, FromFile };
    Kind kind = Kind::Constant;
    double constant = 0.0;
    std::vector<double> cos_coeffs;
    std::vector<double> sin_coeffs;
    std::string path;

    PeriodicField evaluate(const Grid& g) const {
        PeriodicField h(g);
        if (kind == Kind::FromFile) {
            std::ifstream in(path);
            if (!in) throw InputError("initial.file: cannot open '" + path + "'");
            h = read_field_csv(in, g);
        } else {
            const double k0 = two_pi / g.length();
            h = PeriodicField::sample(g, [&](double x) {
                double v = constant;
                for (std::size_t k = 0; k < cos_coeffs.size(); ++k) v += cos_coeffs[k] * std::cos((k + 1) * k0 * x);
                for (std::size_t k = 0; k < sin_coeffs.size(); ++k) v += sin_coeffs[k] * std::sin((k + 1) * k0 * x);
                return v;
            });
        }
        for (int i = 0; i < h.size(); ++i) {
            if (h[i] < 0.0) {
                throw InputError("initial: h0 is negative at x = " + std::to_string(g.x(i)) + " (h0 must be >= 0)");
            }
        }
        return h;
    }
};

struct SteadySpec {
    double mu = 1.0;
    double chi = 0.0;
    ContinuationMode mode = ContinuationMode::FixedFlux;
    double start = 0.1;
    double stop = 0.1;
    double step = 0.05;
    double tol = 1e-10;
    int max_newton = 50;
    double min_increment = 1e-6;
    bool moffatt_guess = false;
};

struct SweepSpec {
    std::string parameter;
    std::vector<double> values;
    int workers = 1;
    double trim = 0.5;
    double period_tol = 0.05;
};

struct CheckSpec {
    int trials = 1000;
    bool run = false;
};

struct RunConfig {
    Mode mode = Mode::Evolve;
    std::optional<ParamSpec> params;
    Grid grid{256};
    std::optional<InitialData> initial;
    EvolveConfig evolve;
    SteadySpec steady;
    SweepSpec sweep;
    CheckSpec check;
    std::string output_dir = "out";
    unsigned long seed = 1;
    /// Verbatim config text, echoed into manifests.
    std::string source;
};

namespace detail {

class Items {
public:
    explicit Items(const std::string& text) {
        std::istringstream in(text);
        std::vector<CLI::ConfigItem> raw;
        try {
            raw = CLI::ConfigINI().from_config(in);
        } catch (const CLI::Error& e) {
            throw InputError(std::string("config: ") + e.what());
        }
        reject_duplicates(text);
        for (const CLI::ConfigItem& it : raw) {
            std::string section;
            for (std::size_t i = 0; i < it.parents.size(); ++i) section += (i ? "." : "") + it.parents[i];
            // The reader brackets each section with "++" / "--", so empty sections still register.
            if (it.name == "++" || it.name == "--") {
                if (!section.empty()) sections_[section] = true;
                continue;
            }
            const std::string path = section.empty() ? it.name : section + "." + it.name;
            const bool known = std::any_of(key_table().begin(), key_table().end(), [&](const KeySpec& k) {
                return k.section == section && k.key == it.name;
            });
            if (!known) throw InputError("config: unknown key '" + path + "'");
            if (values_.count(path)) throw InputError("config: duplicate key '" + path + "'");
            values_[path] = it.inputs;
            sections_[section] = true;
        }
    }

    bool has_section(const std::string& s) const { return sections_.count(s) > 0; }
    bool has(const std::string& path) const { return values_.count(path) > 0; }

    std::string str(const std::string& path) const {
        const std::vector<std::string>& v = get(path);
        if (v.size() != 1) throw InputError("config: '" + path + "' expects a single value");
        return v.front();
    }

    double number(const std::string& path) const { return parse_number(path, str(path)); }

    double number(const std::string& path, double fallback) const { return has(path) ? number(path) : fallback; }

    long integer(const std::string& path, long fallback) const {
        if (!has(path)) return fallback;
        const double v = number(path);
        if (v != std::floor(v) || std::abs(v) > 1e15) throw InputError("config: '" + path + "' must be an integer");
        return static_cast<long>(v);
    }

    bool boolean(const std::string& path, bool fallback) const {
        if (!has(path)) return fallback;
        const std::string s = str(path);
        if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
        if (s == "false" || s == "0" || s == "no" || s == "off") return false;
        throw InputError("config: '" + path + "' must be true or false");
    }

    std::vector<double> list(const std::string& path) const {
        std::vector<double> out;
        if (!has(path)) return out;
        for (const std::string& tok : get(path)) {
            // Tokens may still carry commas, e.g. "1,2" inside quotes.
            std::stringstream ss(tok);
            std::string part;
            while (std::getline(ss, part, ',')) {
                if (!part.empty()) out.push_back(parse_number(path, part));
            }
        }
        return out;
    }

    double required(const std::string& path) const {
        if (!has(path)) throw InputError("config: missing required key '" + path + "'");
        return number(path);
    }

private:
    // The INI reader merges repeated keys into one list, so repeats are caught here.
    static void reject_duplicates(const std::string& text) {
        std::istringstream in(text);
        std::string line, section;
        std::set<std::string> seen;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        while (std::getline(in, line)) {
            line = trim(line);
            if (line.empty() || line[0] == ';' || line[0] == '#') continue;
            if (line.front() == '[' && line.back() == ']') {
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = trim(line.substr(0, eq));
            const std::string path = section.empty() ? key : section + "." + key;
            if (!seen.insert(path).second) throw InputError("config: duplicate key '" + path + "'");
        }
    }

    const std::vector<std::string>& get(const std::string& path) const {
        auto it = values_.find(path);
        if (it == values_.end()) throw InputError("config: missing required key '" + path + "'");
        return it->second;
    }

    static double parse_number(const std::string& path, std::string s) {
        s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
        if (s == "2pi") return two_pi;
        if (s == "pi") return std::numbers::pi;
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw InputError("config: '" + path + "' is not a number: '" + s + "'");
        }
    }

    std::map<std::string, std::vector<std::string>> values_;
    std::map<std::string, bool> sections_;
};

inline EvolveConfig read_evolve(const Items& it, const std::string& s, bool require_t_end) {
    EvolveConfig c;
    if (require_t_end) c.t_end = it.required(s + ".t_end");
    else c.t_end = it.number(s + ".t_end", c.t_end);
    c.dt_init = it.number(s + ".dt_init", c.dt_init);
    c.dt_min = it.number(s + ".dt_min", c.dt_min);
    c.dt_max = it.number(s + ".dt_max", c.dt_max);
    c.newton_tol = it.number(s + ".newton_tol", c.newton_tol);
    c.newton_max_iter = static_cast<int>(it.integer(s + ".newton_max_iter", c.newton_max_iter));
    c.snapshot_times = it.list(s + ".snapshot_times");
    c.snapshot_every = it.number(s + ".snapshot_every", c.snapshot_every);
    c.knobs.delta = it.number(s + ".delta", c.knobs.delta);
    c.knobs.epsilon = it.number(s + ".epsilon", c.knobs.epsilon);
    c.knobs.theta = it.number(s + ".theta", c.knobs.theta);
    c.positivity_floor = it.number(s + ".positivity_floor", c.positivity_floor);
    c.stop_when_steady = it.boolean(s + ".stop_when_steady", c.stop_when_steady);
    c.steady_rate = it.number(s + ".steady_rate", c.steady_rate);
    c.steady_window = static_cast<int>(it.integer(s + ".steady_window", c.steady_window));
    if (it.has(s + ".alpha")) c.alpha = it.number(s + ".alpha");
    if (it.has(s + ".interface_mobility")) {
        const std::string m = it.str(s + ".interface_mobility");
        if (m != "arithmetic" && m != "entropy") {
            throw InputError("config: '" + s + ".interface_mobility' must be arithmetic or entropy");
        }
        c.interface_mobility = m == "entropy" ? InterfaceMobility::Entropy : InterfaceMobility::Arithmetic;
    }
    try {
        c.validate();
    } catch (const ParameterError& e) {
        throw InputError(std::string("config [") + s + "]: " + e.what());
    }
    return c;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
    const detail::Items it(text);
    RunConfig cfg;
    cfg.source = text;

    int modes = 0;
    for (Mode m : {Mode::Evolve, Mode::Steady, Mode::Sweep, Mode::Check}) {
        if (it.has_section(to_string(m))) {
            cfg.mode = m;
            ++modes;
        }
    }
    if (modes != 1) throw InputError("config: exactly one of [evolve], [steady], [sweep], [check] is required");

    const double length = it.number("grid.length", two_pi);
    const long n = it.integer("grid.n", 256);
    try {
        cfg.grid = Grid(static_cast<int>(n), length, it.number("grid.origin", 0.0));
    } catch (const Error& e) {
        throw InputError(std::string("config [grid]: ") + e.what());
    }

    if (it.has_section("params") && it.has_section("physical")) {
        throw InputError("config: give either [params] or [physical], not both");
    }
    if (it.has_section("params")) {
        ParamSpec p;
        p.a0 = it.required("params.a0");
        if (!(p.a0 > 0.0)) throw InputError("config: 'params.a0' must be > 0 (a0 > 0)");
        p.a1 = it.number("params.a1", 0.0);
        p.a2 = it.number("params.a2", 0.0);
        p.a3 = it.number("params.a3", 0.0);
        if (it.has("params.forcing")) {
            const std::string f = it.str("params.forcing");
            if (f != "sine" && f != "none") throw InputError("config: 'params.forcing' must be sine or none");
            p.sine_forcing = f == "sine";
        }
        cfg.params = p;
    } else if (it.has_section("physical")) {
        ParamSpec p;
        p.physical = true;
        p.chi = it.required("physical.chi");
        p.mu = it.required("physical.mu");
        if (!(p.chi > 0.0)) throw InputError("config: 'physical.chi' must be > 0 (a0 = chi/3 > 0)");
        if (!(p.mu >= 0.0)) throw InputError("config: 'physical.mu' must be >= 0");
        if (std::abs(length - two_pi) > 1e-12) throw InputError("config: [physical] requires 'grid.length' = 2pi");
        cfg.params = p;
    }

    if (it.has_section("initial")) {
        InitialData d;
        if (it.has("initial.file")) {
            if (it.has("initial.constant") || it.has("initial.cos") || it.has("initial.sin")) {
                throw InputError("config: 'initial.file' excludes constant/cos/sin");
            }
            d.kind = InitialData::Kind::FromFile;
            d.path = it.str("initial.file");
        } else {
            d.constant = it.number("initial.constant", 0.0);
            d.cos_coeffs = it.list("initial.cos");
            d.sin_coeffs = it.list("initial.sin");
            d.kind = d.cos_coeffs.empty() && d.sin_coeffs.empty() ? InitialData::Kind::Constant
                                                                  : InitialData::Kind::TrigPolynomial;
        }
        if (d.kind != InitialData::Kind::FromFile) d.evaluate(cfg.grid);
        cfg.initial = d;
    }

    cfg.output_dir = it.has("output.dir") ? it.str("output.dir") : cfg.output_dir;
    cfg.seed = static_cast<unsigned long>(it.integer("run.seed", 1));

    const bool needs_run = cfg.mode == Mode::Evolve || cfg.mode == Mode::Sweep ||
                           (cfg.mode == Mode::Check && it.boolean("check.run", false));
    if (needs_run) {
        if (!cfg.params) throw InputError("config: [params] or [physical] is required for " + std::string(to_string(cfg.mode)));
        if (!cfg.initial) throw InputError("config: [initial] is required for " + std::string(to_string(cfg.mode)));
    }

    switch (cfg.mode) {
        case Mode::Evolve: cfg.evolve = detail::read_evolve(it, "evolve", true); break;
        case Mode::Sweep: {
            cfg.evolve = detail::read_evolve(it, "sweep", true);
            if (!it.has("sweep.parameter")) throw InputError("config: missing required key 'sweep.parameter'");
            cfg.sweep.parameter = it.str("sweep.parameter");
            static const std::vector<std::string> direct = {"a0", "a1", "a2", "a3"};
            static const std::vector<std::string> phys = {"chi", "mu"};
            const bool is_direct = std::find(direct.begin(), direct.end(), cfg.sweep.parameter) != direct.end();
            const bool is_phys = std::find(phys.begin(), phys.end(), cfg.sweep.parameter) != phys.end();
            if (!is_direct && !is_phys) throw InputError("config: 'sweep.parameter' must be one of a0..a3, chi, mu");
            if (is_direct == cfg.params->physical) {
                throw InputError("config: 'sweep.parameter' " + cfg.sweep.parameter + " does not match the " +
                                 (cfg.params->physical ? "[physical]" : "[params]") + " block");
            }
            cfg.sweep.values = it.list("sweep.values");
            if (cfg.sweep.values.empty()) throw InputError("config: 'sweep.values' must list at least one value");
            cfg.sweep.workers = static_cast<int>(it.integer("sweep.workers", 1));
            if (cfg.sweep.workers < 1) throw InputError("config: 'sweep.workers' must be >= 1");
            cfg.sweep.trim = it.number("sweep.trim", 0.5);
            if (!(cfg.sweep.trim >= 0.0 && cfg.sweep.trim < 1.0)) throw InputError("config: 'sweep.trim' must lie in [0, 1)");
            cfg.sweep.period_tol = it.number("sweep.period_tol", 0.05);
            if (!(cfg.sweep.period_tol > 0.0)) throw InputError("config: 'sweep.period_tol' must be > 0");
            break;
        }
        case Mode::Check:
            cfg.check.run = it.boolean("check.run", false);
            cfg.check.trials = static_cast<int>(it.integer("check.trials", 1000));
            if (cfg.check.trials < 0) throw InputError("config: 'check.trials' must be >= 0");
            if (cfg.check.run) cfg.evolve = detail::read_evolve(it, "check", true);
            break;
        case Mode::Steady: {
            SteadySpec& s = cfg.steady;
            s.mu = it.required("steady.mu");
            s.chi = it.required("steady.chi");
            if (!(s.mu > 0.0)) throw InputError("config: 'steady.mu' must be > 0");
            if (!(s.chi >= 0.0)) throw InputError("config: 'steady.chi' must be >= 0");
            if (it.has("steady.mode")) {
                const std::string m = it.str("steady.mode");
                if (m != "flux" && m != "mass") throw InputError("config: 'steady.mode' must be flux or mass");
                s.mode = m == "flux" ? ContinuationMode::FixedFlux : ContinuationMode::FixedMass;
            }
            s.start = it.required("steady.start");
            if (!(s.start > 0.0)) throw InputError("config: 'steady.start' must be > 0");
            s.stop = it.number("steady.stop", s.mode == ContinuationMode::FixedFlux ? s.start : 0.0);
            if (s.mode == ContinuationMode::FixedMass && !it.has("steady.stop")) {
                throw InputError("config: 'steady.stop' is required when 'steady.mode' = mass");
            }
            s.step = it.number("steady.step", 0.05);
            if (!(s.step > 0.0)) throw InputError("config: 'steady.step' must be > 0");
            s.tol = it.number("steady.tol", 1e-10);
            if (!(s.tol > 0.0)) throw InputError("config: 'steady.tol' must be > 0");
            s.max_newton = static_cast<int>(it.integer("steady.max_newton", 50));
            s.min_increment = it.number("steady.min_increment", 1e-6);
            if (it.has("steady.guess")) {
                const std::string gname = it.str("steady.guess");
                if (gname != "asymptotic" && gname != "moffatt") {
                    throw InputError("config: 'steady.guess' must be asymptotic or moffatt");
                }
                s.moffatt_guess = gname == "moffatt";
            }
            if (std::abs(length - two_pi) > 1e-12) throw InputError("config: [steady] requires 'grid.length' = 2pi");
            break;
        }
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace rimming::cli
