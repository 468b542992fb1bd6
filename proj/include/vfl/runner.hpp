#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>

#include "vfl/config.hpp"
#include "vfl/mms.hpp"

namespace vfl {

/// Exit-code contract of run(): 0 success, 1 config error, 2 numerical
/// failure (NaN / non-convergence), 3 acceptance-threshold failure in check
/// modes. The CLI maps exceptions from parse_config to 1 before run() is
/// reached.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitNumerical = 2,
    kExitThreshold = 3,
};

namespace detail {

template <int Dim>
GridSpec<Dim> grid_from_config(const RunConfig& cfg) {
    std::array<int, Dim> cells;
    std::array<double, Dim> lengths;
    for (int a = 0; a < Dim; ++a) {
        cells[a] = cfg.cells_on(a);
        lengths[a] = cfg.length_on(a);
    }
    return make_grid<Dim>(cells, lengths, cfg.boundary);
}

template <int Dim>
DisplacementSpec<Dim> displacement_from_config(const RunConfig& cfg) {
    DisplacementSpec<Dim> spec;
    spec.amplitude = cfg.amplitude;
    spec.velocity_amplitude = cfg.velocity_amplitude;
    auto convert = [](const ParsedMode& m) {
        WaveMode<Dim> w;
        for (int a = 0; a < Dim; ++a) {
            w.wave[a] = m.wave[a];
            w.coeff[a] = m.coeff[a];
        }
        w.phase = m.phase;
        return w;
    };
    for (const auto& m : cfg.modes) spec.modes.push_back(convert(m));
    for (const auto& m : cfg.velocity_modes) spec.velocity_modes.push_back(convert(m));
    if (spec.modes.empty()) {
        const auto std_spec =
            DisplacementSpec<Dim>::standard(cfg.amplitude, cfg.velocity_amplitude);
        spec.modes = std_spec.modes;
        if (spec.velocity_modes.empty()) spec.velocity_modes = std_spec.velocity_modes;
    }
    return spec;
}

template <int Dim>
FlowState<Dim> initial_state_from_config(const RunConfig& cfg, const GridSpec<Dim>& g) {
    switch (cfg.init_kind) {
        case InitKind::Equilibrium: return FlowState<Dim>(g);
        case InitKind::Displacement:
            return gen_initial_from_displacement(displacement_from_config<Dim>(cfg), g);
        default: return make_manufactured_case<Dim>(cfg.mms_case).sample(g, 0.0);
    }
}

inline std::ofstream open_output(const RunConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream os(std::filesystem::path(cfg.out_dir) / name);
    if (!os) throw Error("cannot open output file " + name + " under " + cfg.out_dir);
    return os;
}

template <int Dim>
int run_simulate(const RunConfig& cfg, bool probe) {
    const auto g = grid_from_config<Dim>(cfg);
    TimeStepperConfig scfg = cfg.stepper_config();
    FlowState<Dim> init = initial_state_from_config<Dim>(cfg, g);

    std::unique_ptr<MmsForcing<Dim>> forcing;
    if (cfg.init_kind == InitKind::Mms) {
        const auto mc = make_manufactured_case<Dim>(cfg.mms_case);
        forcing = std::make_unique<MmsForcing<Dim>>(mc, cfg.material, g);
    }

    if (probe) {
        // deliberately exceed the stability bound
        scfg.dt = cfg.probe_dt_factor * stable_dt(init, cfg.material, scfg);
    }

    auto csv = open_output(cfg, probe ? "probe.csv" : "simulate.csv");
    if (cfg.perturb_form) {
        PerturbState<Dim> pinit = to_perturb(init);
        auto result = simulate(pinit, scfg, cfg.material, cfg.monitors, forcing.get(), &csv);
        if (result.aborted) {
            std::fprintf(stderr, "vfl: kind=numeric stage=%d msg=\"%s\"\n", result.abort_stage,
                         result.abort_reason.c_str());
            return kExitNumerical;
        }
    } else {
        auto result = simulate(init, scfg, cfg.material, cfg.monitors, forcing.get(), &csv);
        if (result.aborted) {
            std::fprintf(stderr, "vfl: kind=numeric stage=%d msg=\"%s\"\n", result.abort_stage,
                         result.abort_reason.c_str());
            return kExitNumerical;
        }
    }
    return kExitOk;
}

template <int Dim>
int run_check_invariants(const RunConfig& cfg) {
    const auto g = grid_from_config<Dim>(cfg);
    FlowState<Dim> s = initial_state_from_config<Dim>(cfg, g);
    MonitorSet monitors = cfg.monitors & ~MonSigma;  // sigma needs evolution
    const auto ell = cfg.elliptic_options();
    const auto rec = sample_diagnostics<Dim>(s, cfg.material, monitors, nullptr, &ell);
    auto csv = open_output(cfg, "check.csv");
    write_csv_header(csv, monitors, Dim);
    write_csv_row(csv, rec, monitors);

    double worst = 0.0;
    if (monitors & MonIntrinsic)
        worst = std::max({worst, rec.det_residual, rec.piola_residual, rec.curl_residual});
    if (monitors & MonTrace) worst = std::max(worst, rec.trace_residual);
    if (monitors & MonQ1) worst = std::max(worst, rec.q1_residual);
    if (worst > cfg.check_tolerance) {
        std::fprintf(stderr, "vfl: kind=threshold msg=\"residual %.3e exceeds tolerance %.3e\"\n",
                     worst, cfg.check_tolerance);
        return kExitThreshold;
    }
    return kExitOk;
}

template <int Dim>
int run_mms_convergence(const RunConfig& cfg) {
    const auto mc = make_manufactured_case<Dim>(cfg.mms_case);
    const auto report =
        convergence_study(mc, cfg.mms_grids, cfg.stepper_config(), cfg.material, cfg.boundary);
    auto csv = open_output(cfg, "convergence.csv");
    report.write_csv(csv);
    auto txt = open_output(cfg, "convergence.txt");
    const bool pass = report.orders_within(cfg.expected_order, cfg.order_tolerance);
    txt << "case " << cfg.mms_case << ": observed orders";
    for (std::size_t k = 0; k < report.order_rho.size(); ++k)
        txt << " rho=" << report.order_rho[k] << " u=" << report.order_u[k]
            << " F=" << report.order_F[k] << ";";
    txt << (report.monotone ? "" : " NON-MONOTONE;") << (pass ? " PASS" : " FAIL") << "\n";
    if (!pass) {
        std::fprintf(stderr, "vfl: kind=threshold msg=\"observed order outside %.2f +/- %.2f\"\n",
                     cfg.expected_order, cfg.order_tolerance);
        return kExitThreshold;
    }
    return kExitOk;
}

template <int Dim>
int run_lame_test(const RunConfig& cfg) {
    const auto g = grid_from_config<Dim>(cfg);
    const auto opts = cfg.elliptic_options();
    const MaterialParams& mp = cfg.material;
    auto csv = open_output(cfg, "lame.csv");
    csv << "check,value,threshold\n";

    bool pass = true;
    auto record = [&](const char* name, double v, double tol) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s,%.16e,%.16e\n", name, v, tol);
        csv << buf;
        pass = pass && v <= tol;
    };

    if (opts.realization == EllipticRealization::Spectral) {
        // single gradient-type and divergence-free modes against the exact
        // coefficients 1/(2mu+lambda) and 1/mu
        VectorField<Dim> f1(g), f2(g);
        for_each_node(g, [&](const std::array<int, Dim>& idx, std::int64_t n) {
            const auto x = g.point(idx);
            f1(n, 0) = std::sin(2.0 * M_PI * x[0] / g.lengths[0]);
            f2(n, 0) = std::sin(2.0 * M_PI * x[1] / g.lengths[1]);
        });
        const double k1 = 2.0 * M_PI / g.lengths[0];
        const double k2 = 2.0 * M_PI / g.lengths[1];
        auto w1 = lame_solve(f1, mp, opts);
        auto w2 = lame_solve(f2, mp, opts);
        double e1 = 0.0, e2 = 0.0;
        for (std::int64_t n = 0; n < w1.nodes(); ++n) {
            e1 = std::max(e1, std::abs(w1(n, 0) - f1(n, 0) / ((2.0 * mp.mu + mp.lambda) * k1 * k1)));
            e2 = std::max(e2, std::abs(w2(n, 0) - f2(n, 0) / (mp.mu * k2 * k2)));
            for (int c = 1; c < Dim; ++c) {
                e1 = std::max(e1, std::abs(w1(n, c)));
                e2 = std::max(e2, std::abs(w2(n, c)));
            }
        }
        record("gradient_mode_error", e1, cfg.lame_spectral_tolerance);
        record("solenoidal_mode_error", e2, cfg.lame_spectral_tolerance);
    }

    {
        // operator residual on a seeded random right-hand side
        std::mt19937_64 rng(static_cast<std::uint64_t>(cfg.seed));
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        VectorField<Dim> f(g);
        for_each_node(g, [&](const std::array<int, Dim>& idx, std::int64_t n) {
            (void)idx;
            for (int c = 0; c < Dim; ++c) f(n, c) = dist(rng);
        });
        if (g.boundary == Boundary::Periodic) detail::subtract_component_means(f);
        else detail::zero_boundary(f);
        try {
            auto w = lame_solve(f, mp, opts);
            auto back = lame_apply(w, mp, opts.realization);
            back.add_scaled(f, -1.0);
            double denom = lq_norm(f, 2.0);
            double resid = lq_norm(back, 2.0) / (denom > 0 ? denom : 1.0);
            const double tol = opts.realization == EllipticRealization::Spectral
                                   ? cfg.lame_spectral_tolerance * 100
                                   : cfg.lame_iterative_tolerance;
            record("random_rhs_operator_residual", resid, tol);
        } catch (const SolveError& e) {
            std::fprintf(stderr, "vfl: kind=solver msg=\"%s\"\n", e.what());
            return kExitNumerical;
        }
    }

    if (!pass) {
        std::fprintf(stderr, "vfl: kind=threshold msg=\"lame solver outside tolerance\"\n");
        return kExitThreshold;
    }
    return kExitOk;
}

template <int Dim>
int run_dim(const RunConfig& cfg) {
    switch (cfg.command) {
        case Command::Simulate: return run_simulate<Dim>(cfg, false);
        case Command::StabilityProbe: return run_simulate<Dim>(cfg, true);
        case Command::CheckInvariants: return run_check_invariants<Dim>(cfg);
        case Command::MmsConvergence: return run_mms_convergence<Dim>(cfg);
        default: return run_lame_test<Dim>(cfg);
    }
}

}  // namespace detail

/// Executes a validated config; returns the process exit code and prints a
/// one-line machine-parsable reason to stderr on failure.
inline int run(const RunConfig& cfg) {
    try {
        return cfg.dim == 2 ? detail::run_dim<2>(cfg) : detail::run_dim<3>(cfg);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "vfl: kind=config msg=\"%s\"\n", e.what());
        return kExitConfig;
    } catch (const SolveError& e) {
        std::fprintf(stderr, "vfl: kind=solver residual=%.3e msg=\"%s\"\n", e.final_residual(),
                     e.what());
        return kExitNumerical;
    } catch (const NumericsError& e) {
        std::fprintf(stderr, "vfl: kind=numeric stage=%d msg=\"%s\"\n", e.stage(), e.what());
        return kExitNumerical;
    } catch (const InvalidArgument& e) {
        std::fprintf(stderr, "vfl: kind=config msg=\"%s\"\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "vfl: kind=error msg=\"%s\"\n", e.what());
        return kExitNumerical;
    }
}

}  // namespace vfl
