#pragma once

#include <cstdio>
#include <ostream>
#include <sstream>

#include "vfl/compat.hpp"
#include "vfl/stepper.hpp"

namespace vfl {

/// Monitor selection flags for simulate().
enum MonitorBit : unsigned {
    MonIntrinsic = 1u << 0,  ///< det / Piola / curl residuals
    MonTrace = 1u << 1,      ///< algebraic trace constraint
    MonConserved = 1u << 2,  ///< mass and rho F integrals
    MonQ1 = 1u << 3,         ///< divergence-transpose identity (periodic only)
    MonZ = 1u << 4,          ///< dissipative combination Z
    MonSigma = 1u << 5,      ///< co-evolved log-density gradient
    MonNorms = 1u << 6,      ///< perturbation norms
};
using MonitorSet = unsigned;

inline constexpr MonitorSet kDefaultMonitors = MonIntrinsic | MonConserved | MonNorms;

/// One sampled row of every selected residual, integral, and norm.
struct DiagnosticsRecord {
    double t = 0.0;
    double det_residual = 0.0;
    double piola_residual = 0.0;
    double curl_residual = 0.0;
    double trace_residual = 0.0;
    double q1_residual = 0.0;
    double mass_integral = 0.0;
    std::vector<double> rhoF_integrals;  ///< d*d entries of integral(rho F_ij)
    double sigma_mismatch = 0.0;
    double z_consistency = 0.0;
    std::vector<std::pair<std::string, double>> z_norms;
    std::vector<std::pair<std::string, double>> norms;
};

/// Column names, a pure function of the monitor selection (and dimension).
inline std::vector<std::string> diagnostics_columns(MonitorSet monitors, int dim) {
    std::vector<std::string> cols{"t"};
    if (monitors & MonIntrinsic) {
        cols.push_back("det_residual");
        cols.push_back("piola_residual");
        cols.push_back("curl_residual");
    }
    if (monitors & MonTrace) cols.push_back("trace_residual");
    if (monitors & MonQ1) cols.push_back("q1_residual");
    if (monitors & MonConserved) {
        cols.push_back("mass_integral");
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                cols.push_back("rhoF_" + std::to_string(i + 1) + std::to_string(j + 1));
    }
    if (monitors & MonSigma) cols.push_back("sigma_mismatch");
    if (monitors & MonZ) {
        cols.push_back("z_consistency");
        cols.push_back("z_l2");
        cols.push_back("z1_l2");
        cols.push_back("z_w14");
    }
    if (monitors & MonNorms) {
        for (const char* f : {"rho", "u", "E"}) {
            cols.push_back(std::string("norm_") + f + "_l2");
            cols.push_back(std::string("norm_") + f + "_w14");
        }
        cols.push_back("norm_u_w24");
    }
    return cols;
}

inline std::vector<double> diagnostics_row(const DiagnosticsRecord& r, MonitorSet monitors) {
    std::vector<double> row{r.t};
    if (monitors & MonIntrinsic) {
        row.push_back(r.det_residual);
        row.push_back(r.piola_residual);
        row.push_back(r.curl_residual);
    }
    if (monitors & MonTrace) row.push_back(r.trace_residual);
    if (monitors & MonQ1) row.push_back(r.q1_residual);
    if (monitors & MonConserved) {
        row.push_back(r.mass_integral);
        for (double v : r.rhoF_integrals) row.push_back(v);
    }
    if (monitors & MonSigma) row.push_back(r.sigma_mismatch);
    if (monitors & MonZ) {
        row.push_back(r.z_consistency);
        for (const auto& [k, v] : r.z_norms) row.push_back(v);
    }
    if (monitors & MonNorms)
        for (const auto& [k, v] : r.norms) row.push_back(v);
    return row;
}

inline void write_csv_header(std::ostream& os, MonitorSet monitors, int dim) {
    const auto cols = diagnostics_columns(monitors, dim);
    for (std::size_t i = 0; i < cols.size(); ++i) os << cols[i] << (i + 1 < cols.size() ? "," : "\n");
}

inline void write_csv_row(std::ostream& os, const DiagnosticsRecord& r, MonitorSet monitors) {
    const auto row = diagnostics_row(r, monitors);
    char buf[32];
    for (std::size_t i = 0; i < row.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.16e", row[i]);
        os << buf << (i + 1 < row.size() ? "," : "\n");
    }
}

namespace detail {

template <int Dim>
DiagnosticsRecord sample_diagnostics(const FlowState<Dim>& s, const MaterialParams& mp,
                                     MonitorSet monitors, const VectorField<Dim>* sigma,
                                     const EllipticSolveOptions* elliptic) {
    DiagnosticsRecord rec;
    rec.t = s.t;
    const GridSpec<Dim>& g = s.grid();

    if (monitors & MonIntrinsic) {
        const auto ir = check_intrinsic(s);
        rec.det_residual = ir.det;
        rec.piola_residual = ir.piola;
        rec.curl_residual = ir.curl;
    }

    PerturbState<Dim> p;
    const bool need_perturb = monitors & (MonTrace | MonQ1 | MonZ | MonNorms);
    if (need_perturb) p = to_perturb(s);

    if (monitors & MonTrace) rec.trace_residual = check_trace_constraint(p);
    if (monitors & MonQ1) rec.q1_residual = check_q1_identity(p);

    if (monitors & MonConserved) {
        ScalarField<Dim> tmp(g);
        for (std::int64_t n = 0; n < tmp.nodes(); ++n) tmp(n) = s.rho(n) - 1.0;
        rec.mass_integral = integrate(tmp);
        rec.rhoF_integrals.resize(Dim * Dim);
        for (int c = 0; c < Dim * Dim; ++c) {
            for (std::int64_t n = 0; n < tmp.nodes(); ++n) tmp(n) = s.rho(n) * s.F(n, c);
            rec.rhoF_integrals[static_cast<std::size_t>(c)] = integrate(tmp);
        }
    }

    if (monitors & MonSigma)
        rec.sigma_mismatch = sigma ? sigma_mismatch(*sigma, s.rho) : 0.0;

    if (monitors & MonZ) {
        const auto opts = elliptic ? *elliptic : EllipticSolveOptions::defaults_for(g);
        const auto zr = z_monitor(p, mp, opts);
        rec.z_consistency = zr.consistency;
        rec.z_norms = {{"z_l2", lq_norm(zr.Z, 2.0)},
                       {"z1_l2", lq_norm(zr.Z1, 2.0)},
                       {"z_w14", w1q_norm(zr.Z, 4.0)}};
    }

    if (monitors & MonNorms) {
        rec.norms = {{"norm_rho_l2", lq_norm(p.rho_tilde, 2.0)},
                     {"norm_rho_w14", w1q_norm(p.rho_tilde, 4.0)},
                     {"norm_u_l2", lq_norm(p.u, 2.0)},
                     {"norm_u_w14", w1q_norm(p.u, 4.0)},
                     {"norm_E_l2", lq_norm(p.E, 2.0)},
                     {"norm_E_w14", w1q_norm(p.E, 4.0)},
                     {"norm_u_w24", sobolev_norm(p.u, NormSpec::w2q(4.0))}};
    }
    return rec;
}

template <int Dim>
FlowState<Dim> as_flow(const FlowState<Dim>& s) { return s; }
template <int Dim>
FlowState<Dim> as_flow(const PerturbState<Dim>& s) { return to_flow(s); }

template <int Dim>
const ScalarField<Dim>& density_field(const FlowState<Dim>& s) { return s.rho; }
template <int Dim>
ScalarField<Dim> density_field(const PerturbState<Dim>& s) {
    ScalarField<Dim> rho(s.grid());
    for (std::int64_t n = 0; n < rho.nodes(); ++n) rho(n) = 1.0 + s.rho_tilde(n);
    return rho;
}

}  // namespace detail

template <class StateT>
struct SimulationResult {
    std::vector<DiagnosticsRecord> series;
    StateT final_state;
    bool aborted = false;
    int abort_stage = -1;
    std::string abort_reason;
};

/// Drives advance() from init to t_end, sampling the selected monitors every
/// sample_every steps (plus the initial and final instants). Rows stream to
/// `csv` when given. On NaN the partial series is returned with the abort
/// marker set (and an "# aborted" comment in the CSV).
template <int Dim, class StateT>
SimulationResult<StateT> simulate_state(const StateT& init, const TimeStepperConfig& cfg,
                                        const MaterialParams& mp, MonitorSet monitors,
                                        const Forcing<Dim>* forcing = nullptr,
                                        std::ostream* csv = nullptr) {
    cfg.validate();
    mp.validate(Dim);
    if ((monitors & MonQ1) && init.grid().boundary != Boundary::Periodic)
        throw InvalidArgument("simulate: the q1 monitor needs a periodic grid");

    SimulationResult<StateT> result;
    result.final_state = init;
    StateT& s = result.final_state;

    VectorField<Dim> sigma;
    const bool with_sigma = monitors & MonSigma;
    if (with_sigma) sigma = sigma_init(detail::density_field(s));

    RhsWorkspace<Dim> ws;
    const EllipticSolveOptions ell =
        cfg.elliptic ? *cfg.elliptic : EllipticSolveOptions::defaults_for(init.grid());

    if (csv) write_csv_header(*csv, monitors, Dim);
    auto sample = [&] {
        auto rec = detail::sample_diagnostics(detail::as_flow(s), mp, monitors,
                                              with_sigma ? &sigma : nullptr, &ell);
        if (csv) write_csv_row(*csv, rec, monitors);
        result.series.push_back(std::move(rec));
    };

    sample();
    long step = 0;
    const double t_tiny = 1e-12 * cfg.t_end;
    while (s.t < cfg.t_end - t_tiny) {
        double dt = stable_dt(s, mp, cfg);
        dt = std::min(dt, cfg.t_end - s.t);
        try {
            advance(s, dt, cfg, mp, forcing, ws, with_sigma ? &sigma : nullptr);
        } catch (const NumericsError& e) {
            result.aborted = true;
            result.abort_stage = e.stage();
            result.abort_reason = e.what();
            if (csv) *csv << "# aborted stage=" << e.stage() << " reason=" << e.what() << "\n";
            return result;
        }
        ++step;
        if (step % cfg.sample_every == 0 || s.t >= cfg.t_end - t_tiny) sample();
    }
    return result;
}

template <int Dim>
SimulationResult<FlowState<Dim>> simulate(const FlowState<Dim>& init,
                                          const TimeStepperConfig& cfg, const MaterialParams& mp,
                                          MonitorSet monitors = kDefaultMonitors,
                                          const Forcing<Dim>* forcing = nullptr,
                                          std::ostream* csv = nullptr) {
    return simulate_state<Dim>(init, cfg, mp, monitors, forcing, csv);
}

template <int Dim>
SimulationResult<PerturbState<Dim>> simulate(const PerturbState<Dim>& init,
                                             const TimeStepperConfig& cfg,
                                             const MaterialParams& mp,
                                             MonitorSet monitors = kDefaultMonitors,
                                             const Forcing<Dim>* forcing = nullptr,
                                             std::ostream* csv = nullptr) {
    return simulate_state<Dim>(init, cfg, mp, monitors, forcing, csv);
}

/// Unforced runs that only want the CSV stream.
template <int Dim>
SimulationResult<FlowState<Dim>> simulate(const FlowState<Dim>& init,
                                          const TimeStepperConfig& cfg, const MaterialParams& mp,
                                          MonitorSet monitors, std::ostream* csv) {
    return simulate_state<Dim>(init, cfg, mp, monitors, nullptr, csv);
}

template <int Dim>
SimulationResult<PerturbState<Dim>> simulate(const PerturbState<Dim>& init,
                                             const TimeStepperConfig& cfg,
                                             const MaterialParams& mp, MonitorSet monitors,
                                             std::ostream* csv) {
    return simulate_state<Dim>(init, cfg, mp, monitors, nullptr, csv);
}

/// Per-unit-time drift report of the conserved integrals in a series.
struct ConservedDrift {
    double mass_drift = 0.0;      ///< max |m(t) - m(0)| / (t_last - t_0)
    double max_rhoF_drift = 0.0;  ///< same for the worst rho F entry
};

inline ConservedDrift check_conserved(const std::vector<DiagnosticsRecord>& series) {
    if (series.size() < 2) throw InvalidArgument("check_conserved: need at least two samples");
    ConservedDrift d;
    const double span = series.back().t - series.front().t;
    if (!(span > 0.0)) throw InvalidArgument("check_conserved: zero time span");
    const auto& first = series.front();
    for (const auto& rec : series) {
        d.mass_drift = std::max(d.mass_drift, std::abs(rec.mass_integral - first.mass_integral));
        for (std::size_t c = 0; c < rec.rhoF_integrals.size(); ++c)
            d.max_rhoF_drift = std::max(
                d.max_rhoF_drift, std::abs(rec.rhoF_integrals[c] - first.rhoF_integrals[c]));
    }
    d.mass_drift /= span;
    d.max_rhoF_drift /= span;
    return d;
}

}  // namespace vfl
