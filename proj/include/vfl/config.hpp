#pragma once

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vfl/elliptic.hpp"
#include "vfl/material.hpp"
#include "vfl/mms.hpp"
#include "vfl/simulate.hpp"
#include "vfl/stepper.hpp"

namespace vfl {

enum class Command { Simulate, CheckInvariants, MmsConvergence, LameTest, StabilityProbe };

inline const char* to_string(Command c) {
    switch (c) {
        case Command::Simulate: return "simulate";
        case Command::CheckInvariants: return "check-invariants";
        case Command::MmsConvergence: return "mms-convergence";
        case Command::LameTest: return "lame-test";
        default: return "stability-probe";
    }
}

inline std::optional<Command> command_from_string(const std::string& s) {
    if (s == "simulate") return Command::Simulate;
    if (s == "check-invariants") return Command::CheckInvariants;
    if (s == "mms-convergence") return Command::MmsConvergence;
    if (s == "lame-test") return Command::LameTest;
    if (s == "stability-probe") return Command::StabilityProbe;
    return std::nullopt;
}

enum class InitKind { Equilibrium, Displacement, Mms };

/// A displacement/velocity mode as parsed from config text
/// ("w1 w2 [w3] : c1 c2 [c3] : phase").
struct ParsedMode {
    std::vector<int> wave;
    std::vector<double> coeff;
    double phase = 0.0;
};

/// Fully validated run description.
struct RunConfig {
    Command command = Command::Simulate;
    long seed = 0;
    std::string out_dir = "out";

    int dim = 2;
    std::vector<int> cells = {64};
    std::vector<double> lengths = {1.0};
    Boundary boundary = Boundary::Periodic;

    MaterialParams material;

    TimeScheme scheme = TimeScheme::RK4Explicit;
    double dt = 0.0;  // 0: CFL mode
    double cfl_advective = 0.5;
    double cfl_viscous = 0.25;
    double t_end = 1.0;
    int sample_every = 10;
    bool perturb_form = false;

    double elliptic_tolerance = 1e-10;
    int elliptic_max_iterations = 0;
    std::optional<EllipticRealization> elliptic_realization;

    InitKind init_kind = InitKind::Equilibrium;
    double amplitude = 0.01;
    double velocity_amplitude = 0.01;
    std::vector<ParsedMode> modes, velocity_modes;
    std::string mms_case = "trig2d";

    MonitorSet monitors = kDefaultMonitors;

    double check_tolerance = 1e-3;

    std::vector<int> mms_grids = {32, 64, 128};
    double expected_order = 2.0;
    double order_tolerance = 0.3;

    double probe_dt_factor = 10.0;

    double lame_spectral_tolerance = 1e-10;
    double lame_iterative_tolerance = 1e-8;

    int cells_on(int axis) const { return cells[cells.size() == 1 ? 0 : axis]; }
    double length_on(int axis) const { return lengths[lengths.size() == 1 ? 0 : axis]; }

    EllipticSolveOptions elliptic_options() const {
        EllipticSolveOptions o;
        o.tolerance = elliptic_tolerance;
        o.max_iterations = elliptic_max_iterations;
        o.realization = elliptic_realization.value_or(boundary == Boundary::Periodic
                                                          ? EllipticRealization::Spectral
                                                          : EllipticRealization::Iterative);
        return o;
    }

    TimeStepperConfig stepper_config() const {
        TimeStepperConfig c;
        c.scheme = scheme;
        c.dt = dt;
        c.cfl_advective = cfl_advective;
        c.cfl_viscous = cfl_viscous;
        c.t_end = t_end;
        c.sample_every = sample_every;
        c.elliptic = elliptic_options();
        return c;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

struct KeyLine {
    std::string value;
    int line;
};

}  // namespace detail

/// Parses the line-oriented `section.key = value` config format. Unknown
/// keys, syntax errors, and constraint violations are all collected with
/// their line numbers and thrown as one ConfigError. The command may come
/// from the CLI instead of the text; if both are present they must agree.
inline RunConfig parse_config(const std::string& text,
                              std::optional<Command> cli_command = std::nullopt) {
    static const std::set<std::string> known = {
        "run.command", "run.seed", "run.out",
        "grid.dim", "grid.cells", "grid.lengths", "grid.boundary",
        "material.mu", "material.lambda", "material.pressure_a", "material.pressure_gamma",
        "stepper.scheme", "stepper.dt", "stepper.cfl_advective", "stepper.cfl_viscous",
        "stepper.t_end", "stepper.sample_every", "stepper.form",
        "elliptic.tolerance", "elliptic.max_iterations", "elliptic.realization",
        "init.type", "init.amplitude", "init.velocity_amplitude", "init.mode",
        "init.velocity_mode", "init.case",
        "diagnostics.select",
        "check.tolerance",
        "mms.case", "mms.grids", "mms.expected_order", "mms.order_tolerance",
        "probe.dt_factor",
        "lame.spectral_tolerance", "lame.iterative_tolerance"};

    std::vector<ConfigIssue> issues;
    std::map<std::string, detail::KeyLine> kv;
    std::vector<std::pair<ParsedMode, int>> modes, velocity_modes;

    auto parse_mode = [&](const std::string& v, int line) -> std::optional<ParsedMode> {
        ParsedMode m;
        std::vector<std::string> parts;
        std::string cur;
        for (char ch : v) {
            if (ch == ':') {
                parts.push_back(cur);
                cur.clear();
            } else
                cur += ch;
        }
        parts.push_back(cur);
        if (parts.size() != 3) {
            issues.push_back({line, "mode needs 'wave : coeff : phase'"});
            return std::nullopt;
        }
        try {
            for (const auto& tok : detail::split_ws(parts[0])) m.wave.push_back(std::stoi(tok));
            for (const auto& tok : detail::split_ws(parts[1])) m.coeff.push_back(std::stod(tok));
            m.phase = std::stod(detail::trim(parts[2]).empty() ? "0" : parts[2]);
        } catch (...) {
            issues.push_back({line, "malformed mode numbers"});
            return std::nullopt;
        }
        return m;
    };

    std::istringstream stream(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(stream, raw)) {
        ++line_no;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            issues.push_back({line_no, "expected 'section.key = value'"});
            continue;
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (!known.count(key)) {
            issues.push_back({line_no, "unknown key '" + key + "'"});
            continue;
        }
        if (value.empty()) {
            issues.push_back({line_no, "empty value for '" + key + "'"});
            continue;
        }
        if (key == "init.mode" || key == "init.velocity_mode") {
            if (auto m = parse_mode(value, line_no))
                (key == "init.mode" ? modes : velocity_modes).push_back({*m, line_no});
            continue;
        }
        if (kv.count(key)) {
            issues.push_back({line_no, "duplicate key '" + key + "'"});
            continue;
        }
        kv[key] = {value, line_no};
    }

    RunConfig cfg;

    auto take = [&](const char* key) -> std::optional<detail::KeyLine> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };
    auto get_double = [&](const char* key, double& dst) -> std::optional<int> {
        if (auto e = take(key)) {
            try {
                dst = std::stod(e->value);
                return e->line;
            } catch (...) {
                issues.push_back({e->line, std::string("expected a number for '") + key + "'"});
            }
        }
        return std::nullopt;
    };
    auto get_int = [&](const char* key, auto& dst) -> std::optional<int> {
        if (auto e = take(key)) {
            try {
                dst = static_cast<std::decay_t<decltype(dst)>>(std::stol(e->value));
                return e->line;
            } catch (...) {
                issues.push_back({e->line, std::string("expected an integer for '") + key + "'"});
            }
        }
        return std::nullopt;
    };

    // command
    std::optional<Command> file_command;
    if (auto e = take("run.command")) {
        file_command = command_from_string(e->value);
        if (!file_command) issues.push_back({e->line, "unknown command '" + e->value + "'"});
    }
    if (file_command && cli_command && *file_command != *cli_command)
        issues.push_back({kv["run.command"].line, "config command disagrees with CLI command"});
    if (file_command)
        cfg.command = *file_command;
    else if (cli_command)
        cfg.command = *cli_command;
    else
        issues.push_back({0, "missing command"});

    get_int("run.seed", cfg.seed);
    if (auto e = take("run.out")) cfg.out_dir = e->value;

    int dim_line = get_int("grid.dim", cfg.dim).value_or(0);
    if (cfg.dim != 2 && cfg.dim != 3) {
        issues.push_back({dim_line, "grid.dim must be 2 or 3"});
        cfg.dim = 2;
    }
    if (auto e = take("grid.cells")) {
        cfg.cells.clear();
        for (const auto& tok : detail::split_ws(e->value)) {
            try {
                cfg.cells.push_back(std::stoi(tok));
            } catch (...) {
                issues.push_back({e->line, "malformed grid.cells"});
                break;
            }
        }
        if (cfg.cells.empty() ||
            (cfg.cells.size() != 1 && cfg.cells.size() != static_cast<std::size_t>(cfg.dim)))
            issues.push_back({e->line, "grid.cells needs 1 or dim values"});
        for (int n : cfg.cells)
            if (n < 8) issues.push_back({e->line, "grid.cells must be >= 8"});
        if (cfg.cells.empty()) cfg.cells = {64};
    }
    if (auto e = take("grid.lengths")) {
        cfg.lengths.clear();
        for (const auto& tok : detail::split_ws(e->value)) {
            try {
                cfg.lengths.push_back(std::stod(tok));
            } catch (...) {
                issues.push_back({e->line, "malformed grid.lengths"});
                break;
            }
        }
        if (cfg.lengths.empty() ||
            (cfg.lengths.size() != 1 && cfg.lengths.size() != static_cast<std::size_t>(cfg.dim)))
            issues.push_back({e->line, "grid.lengths needs 1 or dim values"});
        for (double L : cfg.lengths)
            if (!(L > 0.0)) issues.push_back({e->line, "grid.lengths must be positive"});
        if (cfg.lengths.empty()) cfg.lengths = {1.0};
    }
    if (auto e = take("grid.boundary")) {
        if (e->value == "periodic") cfg.boundary = Boundary::Periodic;
        else if (e->value == "noslip") cfg.boundary = Boundary::NoSlipBox;
        else issues.push_back({e->line, "grid.boundary must be periodic or noslip"});
    }

    int mu_line = get_double("material.mu", cfg.material.mu).value_or(0);
    int lambda_line = get_double("material.lambda", cfg.material.lambda).value_or(mu_line);
    get_double("material.pressure_a", cfg.material.pressure_a);
    get_double("material.pressure_gamma", cfg.material.pressure_gamma);
    if (!(cfg.material.mu > 0.0)) issues.push_back({mu_line, "material.mu must be positive"});
    if (!(2.0 * cfg.material.mu + cfg.dim * cfg.material.lambda > 0.0)) {
        std::ostringstream msg;
        msg << "ellipticity violated: 2mu+" << cfg.dim << "lambda <= 0";
        issues.push_back({lambda_line, msg.str()});
    }
    if (!(cfg.material.pressure_a > 0.0))
        issues.push_back({kv.count("material.pressure_a") ? kv["material.pressure_a"].line : 0,
                          "material.pressure_a must be positive"});
    if (!(cfg.material.pressure_gamma >= 1.0))
        issues.push_back({kv.count("material.pressure_gamma") ? kv["material.pressure_gamma"].line : 0,
                          "material.pressure_gamma must be >= 1"});

    if (auto e = take("stepper.scheme")) {
        if (e->value == "rk4") cfg.scheme = TimeScheme::RK4Explicit;
        else if (e->value == "imex") cfg.scheme = TimeScheme::IMEX;
        else issues.push_back({e->line, "stepper.scheme must be rk4 or imex"});
    }
    const bool dt_given = kv.count("stepper.dt") > 0;
    const bool cfl_given = kv.count("stepper.cfl_advective") || kv.count("stepper.cfl_viscous");
    if (dt_given && cfl_given)
        issues.push_back({kv["stepper.dt"].line, "give stepper.dt or CFL numbers, not both"});
    if (auto l = get_double("stepper.dt", cfg.dt)) {
        if (!(cfg.dt > 0.0)) issues.push_back({*l, "stepper.dt must be positive"});
    }
    get_double("stepper.cfl_advective", cfg.cfl_advective);
    get_double("stepper.cfl_viscous", cfg.cfl_viscous);
    if (!(cfg.cfl_advective > 0.0) || !(cfg.cfl_viscous > 0.0))
        issues.push_back({0, "CFL numbers must be positive"});
    if (auto l = get_double("stepper.t_end", cfg.t_end)) {
        if (!(cfg.t_end > 0.0)) issues.push_back({*l, "stepper.t_end must be positive"});
    }
    if (auto l = get_int("stepper.sample_every", cfg.sample_every)) {
        if (cfg.sample_every < 1) issues.push_back({*l, "stepper.sample_every must be >= 1"});
    }
    if (auto e = take("stepper.form")) {
        if (e->value == "full") cfg.perturb_form = false;
        else if (e->value == "perturb") cfg.perturb_form = true;
        else issues.push_back({e->line, "stepper.form must be full or perturb"});
    }

    if (auto l = get_double("elliptic.tolerance", cfg.elliptic_tolerance)) {
        if (!(cfg.elliptic_tolerance > 0.0 && cfg.elliptic_tolerance <= 1e-2))
            issues.push_back({*l, "elliptic.tolerance must lie in (0, 1e-2]"});
    }
    get_int("elliptic.max_iterations", cfg.elliptic_max_iterations);
    if (auto e = take("elliptic.realization")) {
        if (e->value == "spectral") cfg.elliptic_realization = EllipticRealization::Spectral;
        else if (e->value == "iterative") cfg.elliptic_realization = EllipticRealization::Iterative;
        else issues.push_back({e->line, "elliptic.realization must be spectral or iterative"});
        if (cfg.elliptic_realization == EllipticRealization::Spectral &&
            cfg.boundary == Boundary::NoSlipBox)
            issues.push_back({e->line, "spectral realization requires a periodic grid"});
    }

    if (auto e = take("init.type")) {
        if (e->value == "equilibrium") cfg.init_kind = InitKind::Equilibrium;
        else if (e->value == "displacement") cfg.init_kind = InitKind::Displacement;
        else if (e->value == "mms") cfg.init_kind = InitKind::Mms;
        else issues.push_back({e->line, "init.type must be equilibrium, displacement, or mms"});
    }
    get_double("init.amplitude", cfg.amplitude);
    get_double("init.velocity_amplitude", cfg.velocity_amplitude);
    for (auto& [m, line] : modes) {
        if (m.wave.size() != static_cast<std::size_t>(cfg.dim) ||
            m.coeff.size() != static_cast<std::size_t>(cfg.dim))
            issues.push_back({line, "mode needs dim wave numbers and dim coefficients"});
        else
            cfg.modes.push_back(m);
    }
    for (auto& [m, line] : velocity_modes) {
        if (m.wave.size() != static_cast<std::size_t>(cfg.dim) ||
            m.coeff.size() != static_cast<std::size_t>(cfg.dim))
            issues.push_back({line, "mode needs dim wave numbers and dim coefficients"});
        else
            cfg.velocity_modes.push_back(m);
    }
    if (auto e = take("init.case")) cfg.mms_case = e->value;
    if (auto e = take("mms.case")) cfg.mms_case = e->value;

    if (auto e = take("diagnostics.select")) {
        cfg.monitors = 0;
        for (const auto& tok : detail::split_ws(e->value)) {
            if (tok == "intrinsic") cfg.monitors |= MonIntrinsic;
            else if (tok == "trace") cfg.monitors |= MonTrace;
            else if (tok == "conserved") cfg.monitors |= MonConserved;
            else if (tok == "q1") cfg.monitors |= MonQ1;
            else if (tok == "z") cfg.monitors |= MonZ;
            else if (tok == "sigma") cfg.monitors |= MonSigma;
            else if (tok == "norms") cfg.monitors |= MonNorms;
            else if (tok == "all")
                cfg.monitors = MonIntrinsic | MonTrace | MonConserved | MonQ1 | MonZ |
                               MonSigma | MonNorms;
            else if (tok == "none") cfg.monitors = 0;
            else issues.push_back({e->line, "unknown diagnostic '" + tok + "'"});
        }
        if ((cfg.monitors & MonQ1) && cfg.boundary == Boundary::NoSlipBox)
            issues.push_back({e->line, "the q1 diagnostic requires a periodic grid"});
    }

    get_double("check.tolerance", cfg.check_tolerance);

    if (auto e = take("mms.grids")) {
        cfg.mms_grids.clear();
        for (const auto& tok : detail::split_ws(e->value)) {
            try {
                cfg.mms_grids.push_back(std::stoi(tok));
            } catch (...) {
                issues.push_back({e->line, "malformed mms.grids"});
                break;
            }
        }
        for (std::size_t k = 1; k < cfg.mms_grids.size(); ++k)
            if (cfg.mms_grids[k] != 2 * cfg.mms_grids[k - 1]) {
                issues.push_back({e->line, "mms.grids must double at each refinement"});
                break;
            }
    }
    get_double("mms.expected_order", cfg.expected_order);
    get_double("mms.order_tolerance", cfg.order_tolerance);
    get_double("probe.dt_factor", cfg.probe_dt_factor);
    get_double("lame.spectral_tolerance", cfg.lame_spectral_tolerance);
    get_double("lame.iterative_tolerance", cfg.lame_iterative_tolerance);

    // cross-field checks
    const bool needs_case = cfg.init_kind == InitKind::Mms ||
                            cfg.command == Command::MmsConvergence;
    if (needs_case && issues.empty()) {
        const bool exists = cfg.dim == 2 ? manufactured_case_exists<2>(cfg.mms_case)
                                         : manufactured_case_exists<3>(cfg.mms_case);
        if (!exists)
            issues.push_back({0, "unknown manufactured case '" + cfg.mms_case + "'"});
    }

    if (!issues.empty()) throw ConfigError(std::move(issues));
    return cfg;
}

}  // namespace vfl
