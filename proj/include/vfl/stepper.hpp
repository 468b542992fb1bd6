#pragma once

#include <optional>

#include "vfl/dynamics.hpp"
#include "vfl/elliptic.hpp"

namespace vfl {

enum class TimeScheme { RK4Explicit, IMEX };

struct TimeStepperConfig {
    TimeScheme scheme = TimeScheme::RK4Explicit;
    double dt = 0.0;  ///< fixed step when > 0, otherwise the CFL bound below
    double cfl_advective = 0.5;
    double cfl_viscous = 0.25;
    double t_end = 1.0;
    int sample_every = 10;
    std::optional<EllipticSolveOptions> elliptic;  ///< IMEX solve controls

    void validate() const {
        if (!(t_end > 0.0)) throw InvalidArgument("stepper: t_end must be positive");
        if (sample_every < 1) throw InvalidArgument("stepper: sample_every must be >= 1");
        if (dt < 0.0) throw InvalidArgument("stepper: dt must be positive");
        if (dt == 0.0 && (!(cfl_advective > 0.0) || !(cfl_viscous > 0.0)))
            throw InvalidArgument("stepper: CFL numbers must be positive");
    }
};

namespace detail {

template <int Dim>
double max_speed(const VectorField<Dim>& u) {
    double m2 = 0.0;
    for (std::int64_t n = 0; n < u.nodes(); ++n) {
        double s = 0.0;
        for (int c = 0; c < Dim; ++c) s += u(n, c) * u(n, c);
        m2 = std::max(m2, s);
    }
    return std::sqrt(m2);
}

template <int Dim>
double max_total_density(const ScalarField<Dim>& rho, bool perturb) {
    double m = perturb ? 1.0 + rho.data()[0] : rho.data()[0];
    for (double v : rho.data()) m = std::max(m, perturb ? 1.0 + v : v);
    return m;
}

// rhs dispatch and field access shared by the stepper templates
template <int Dim>
void form_rhs(const FlowState<Dim>& s, const MaterialParams& mp, const Forcing<Dim>* f,
              ViscousMode vm, StateDelta<Dim>& out, RhsWorkspace<Dim>& ws) {
    rhs_full(s, mp, f, vm, out, ws);
}
template <int Dim>
void form_rhs(const PerturbState<Dim>& s, const MaterialParams& mp, const Forcing<Dim>* f,
              ViscousMode vm, StateDelta<Dim>& out, RhsWorkspace<Dim>& ws) {
    rhs_perturb(s, mp, f, vm, out, ws);
}

template <int Dim>
ScalarField<Dim>& scalar_of(FlowState<Dim>& s) { return s.rho; }
template <int Dim>
ScalarField<Dim>& scalar_of(PerturbState<Dim>& s) { return s.rho_tilde; }
template <int Dim>
const ScalarField<Dim>& scalar_of(const FlowState<Dim>& s) { return s.rho; }
template <int Dim>
const ScalarField<Dim>& scalar_of(const PerturbState<Dim>& s) { return s.rho_tilde; }
template <int Dim>
TensorField<Dim>& tensor_of(FlowState<Dim>& s) { return s.F; }
template <int Dim>
TensorField<Dim>& tensor_of(PerturbState<Dim>& s) { return s.E; }

template <int Dim, class StateT>
double apply_delta(StateT& s, const StateDelta<Dim>& d, double c) {
    double acc = scalar_of(s).add_scaled_sum(d.dscalar, c);
    acc += s.u.add_scaled_sum(d.dvector, c);
    acc += tensor_of(s).add_scaled_sum(d.dtensor, c);
    return acc;
}

}  // namespace detail

/// CFL-limited step size: advective bound always, viscous bound only for the
/// fully explicit scheme (IMEX integrates the stiff operator implicitly).
template <int Dim>
double stable_dt(const GridSpec<Dim>& grid, double max_speed, double max_rho,
                 const MaterialParams& mp, const TimeStepperConfig& cfg) {
    if (cfg.dt > 0.0) return cfg.dt;
    const double h = grid.min_spacing();
    const double cs = mp.sound_speed(max_rho);
    double dt = cfg.cfl_advective * h / (max_speed + cs);
    if (cfg.scheme == TimeScheme::RK4Explicit)
        dt = std::min(dt, cfg.cfl_viscous * h * h / (2.0 * mp.mu + mp.lambda));
    return dt;
}

template <int Dim>
double stable_dt(const FlowState<Dim>& s, const MaterialParams& mp,
                 const TimeStepperConfig& cfg) {
    return stable_dt(s.grid(), detail::max_speed(s.u),
                     detail::max_total_density(s.rho, false), mp, cfg);
}

template <int Dim>
double stable_dt(const PerturbState<Dim>& s, const MaterialParams& mp,
                 const TimeStepperConfig& cfg) {
    return stable_dt(s.grid(), detail::max_speed(s.u),
                     detail::max_total_density(s.rho_tilde, true), mp, cfg);
}

/// -grad(u . sigma + div u), the transport right-hand side of sigma.
template <int Dim>
VectorField<Dim> sigma_rhs(const VectorField<Dim>& u, const VectorField<Dim>& sigma) {
    ScalarField<Dim> s = div_vec(u);
    for (std::int64_t n = 0; n < s.nodes(); ++n) {
        double dot = 0.0;
        for (int c = 0; c < Dim; ++c) dot += u(n, c) * sigma(n, c);
        s(n) += dot;
    }
    VectorField<Dim> out = gradient(s);
    out.scale(-1.0);
    return out;
}

/// One time step of the chosen scheme. `sigma`, when given, is co-evolved
/// with the same scheme (stage-coupled in RK4, forward Euler inside IMEX).
/// Throws NumericsError with the offending stage on NaN/Inf.
template <int Dim, class StateT>
void advance(StateT& s, double dt, const TimeStepperConfig& cfg, const MaterialParams& mp,
             const Forcing<Dim>* forcing, RhsWorkspace<Dim>& ws,
             VectorField<Dim>* sigma = nullptr) {
    if (!(dt > 0.0)) throw InvalidArgument("advance: dt must be positive");
    const GridSpec<Dim>& g = s.grid();
    auto check = [&](double acc, int stage) {
        if (!std::isfinite(acc))
            throw NumericsError("advance: NaN/Inf detected at stage " + std::to_string(stage) +
                                    ", t = " + std::to_string(s.t),
                                stage);
    };
    // A state that went invalid mid-step (negative density) is a numerical
    // breakdown of the integrator, not a caller mistake.
    auto rhs_checked = [&](const StateT& y, ViscousMode vm, StateDelta<Dim>& out, int stage) {
        try {
            detail::form_rhs(y, mp, forcing, vm, out, ws);
        } catch (const InvalidArgument& e) {
            throw NumericsError("advance: stage " + std::to_string(stage) + ": " + e.what(),
                                stage);
        }
    };

    if (cfg.scheme == TimeScheme::RK4Explicit) {
        StateDelta<Dim> k1(g), k2(g), k3(g), k4(g);
        VectorField<Dim> sk1, sk2, sk3, sk4;

        rhs_checked(s, ViscousMode::Full, k1, 1);
        if (sigma) sk1 = sigma_rhs(s.u, *sigma);

        StateT stage = s;
        VectorField<Dim> sigma_stage;
        check(detail::apply_delta(stage, k1, 0.5 * dt), 1);
        stage.t = s.t + 0.5 * dt;
        impose_velocity_bc(stage.u);
        if (sigma) {
            sigma_stage = *sigma;
            sigma_stage.add_scaled(sk1, 0.5 * dt);
        }
        rhs_checked(stage, ViscousMode::Full, k2, 2);
        if (sigma) sk2 = sigma_rhs(stage.u, sigma_stage);

        stage = s;
        check(detail::apply_delta(stage, k2, 0.5 * dt), 2);
        stage.t = s.t + 0.5 * dt;
        impose_velocity_bc(stage.u);
        if (sigma) {
            sigma_stage = *sigma;
            sigma_stage.add_scaled(sk2, 0.5 * dt);
        }
        rhs_checked(stage, ViscousMode::Full, k3, 3);
        if (sigma) sk3 = sigma_rhs(stage.u, sigma_stage);

        stage = s;
        check(detail::apply_delta(stage, k3, dt), 3);
        stage.t = s.t + dt;
        impose_velocity_bc(stage.u);
        if (sigma) {
            sigma_stage = *sigma;
            sigma_stage.add_scaled(sk3, dt);
        }
        rhs_checked(stage, ViscousMode::Full, k4, 4);
        if (sigma) sk4 = sigma_rhs(stage.u, sigma_stage);

        const double c16 = dt / 6.0, c13 = dt / 3.0;
        double acc = detail::apply_delta(s, k1, c16);
        acc += detail::apply_delta(s, k2, c13);
        acc += detail::apply_delta(s, k3, c13);
        acc += detail::apply_delta(s, k4, c16);
        check(acc, 4);
        if (sigma) {
            sigma->add_scaled(sk1, c16);
            sigma->add_scaled(sk2, c13);
            sigma->add_scaled(sk3, c13);
            sigma->add_scaled(sk4, c16);
        }
        s.t += dt;
        impose_velocity_bc(s.u);
        return;
    }

    // IMEX: explicit transport and nonlinear terms, implicit equilibrium
    // viscous operator.
    StateDelta<Dim> d(g);
    rhs_checked(s, ViscousMode::ImexExplicit, d, 1);
    VectorField<Dim> sk;
    if (sigma) sk = sigma_rhs(s.u, *sigma);
    check(detail::apply_delta(s, d, dt), 1);
    impose_velocity_bc(s.u);
    EllipticSolveOptions opts =
        cfg.elliptic ? *cfg.elliptic : EllipticSolveOptions::defaults_for(g);
    s.u = imex_viscous_solve(s.u, dt, mp, opts);
    if (!s.u.all_finite()) throw NumericsError("advance: NaN/Inf after implicit solve", 2);
    if (sigma) sigma->add_scaled(sk, dt);
    s.t += dt;
    impose_velocity_bc(s.u);
}

/// Unforced step.
template <int Dim, class StateT>
void advance(StateT& s, double dt, const TimeStepperConfig& cfg, const MaterialParams& mp,
             RhsWorkspace<Dim>& ws, VectorField<Dim>* sigma = nullptr) {
    advance<Dim, StateT>(s, dt, cfg, mp, nullptr, ws, sigma);
}

}  // namespace vfl
