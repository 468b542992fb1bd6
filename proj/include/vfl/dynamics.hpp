#pragma once

#include "vfl/material.hpp"
#include "vfl/operators.hpp"
#include "vfl/state.hpp"
#include "vfl/threads.hpp"

namespace vfl {

/// Right-hand-side triple for either state form.
template <int Dim>
struct StateDelta {
    ScalarField<Dim> dscalar;
    VectorField<Dim> dvector;
    TensorField<Dim> dtensor;

    StateDelta() = default;
    explicit StateDelta(const GridSpec<Dim>& g) : dscalar(g), dvector(g), dtensor(g) {}

    StateDelta& add_scaled(const StateDelta& o, double c) {
        dscalar.add_scaled(o.dscalar, c);
        dvector.add_scaled(o.dvector, c);
        dtensor.add_scaled(o.dtensor, c);
        return *this;
    }

    bool all_finite() const {
        return dscalar.all_finite() && dvector.all_finite() && dtensor.all_finite();
    }
};

/// Source terms added to the assembled right-hand sides (manufactured-solution
/// forcing). Evaluated at the stage time, so implementations must be
/// time-aware.
template <int Dim>
class Forcing {
public:
    virtual ~Forcing() = default;
    virtual void add(double t, ScalarField<Dim>& g_scalar, VectorField<Dim>& g_vector,
                     TensorField<Dim>& g_tensor) const = 0;
};

/// How the assembled kernel weighs the viscous operator V u = mu Lap u +
/// (mu+lambda) grad div u inside the velocity equation:
///   Full          du += V u / rho          (explicit schemes)
///   ImexExplicit  du += (1/rho - 1) V u    (the equilibrium part V u is
///                                           handled implicitly elsewhere)
enum class ViscousMode { Full, ImexExplicit };

namespace detail {

struct StencilEntry {
    std::int64_t off;
    double coef;
};

struct StencilDesc {
    int count = 0;
    StencilEntry e[4];
};

/// Per-axis, per-coordinate derivative descriptors (periodic wrap or
/// second-order one-sided stencils at no-slip faces).
template <int Dim>
struct StencilTables {
    std::array<std::vector<StencilDesc>, Dim> d1, d2;
    std::array<std::int64_t, Dim> stride{};
    std::array<double, Dim> inv2h{}, invh2{};
    std::array<int, Dim> n{};
    GridSpec<Dim> grid;

    StencilTables() = default;

    explicit StencilTables(const GridSpec<Dim>& g) : grid(g) {
        stride[0] = 1;
        for (int a = 1; a < Dim; ++a) stride[a] = stride[a - 1] * g.nodes(a - 1);
        const bool periodic = g.boundary == Boundary::Periodic;
        for (int a = 0; a < Dim; ++a) {
            n[a] = g.nodes(a);
            const double h = g.spacing(a);
            inv2h[a] = 1.0 / (2.0 * h);
            invh2[a] = 1.0 / (h * h);
            d1[a].resize(n[a]);
            d2[a].resize(n[a]);
            const std::int64_t s = stride[a];
            for (int i = 0; i < n[a]; ++i) {
                StencilDesc& f = d1[a][i];
                StencilDesc& sec = d2[a][i];
                const bool lo = i == 0, hi = i == n[a] - 1;
                if (!lo && !hi) {
                    f = {2, {{+s, inv2h[a]}, {-s, -inv2h[a]}}};
                    sec = {3, {{+s, invh2[a]}, {0, -2.0 * invh2[a]}, {-s, invh2[a]}}};
                } else if (periodic) {
                    const std::int64_t up = lo ? +s : -(n[a] - 1) * s;
                    const std::int64_t dn = lo ? +(n[a] - 1) * s : -s;
                    f = {2, {{up, inv2h[a]}, {dn, -inv2h[a]}}};
                    sec = {3, {{up, invh2[a]}, {0, -2.0 * invh2[a]}, {dn, invh2[a]}}};
                } else if (lo) {
                    f = {3, {{0, -3.0 * inv2h[a]}, {+s, 4.0 * inv2h[a]}, {2 * s, -inv2h[a]}}};
                    sec = {4,
                           {{0, 2.0 * invh2[a]},
                            {+s, -5.0 * invh2[a]},
                            {2 * s, 4.0 * invh2[a]},
                            {3 * s, -invh2[a]}}};
                } else {
                    f = {3, {{0, 3.0 * inv2h[a]}, {-s, -4.0 * inv2h[a]}, {-2 * s, inv2h[a]}}};
                    sec = {4,
                           {{0, 2.0 * invh2[a]},
                            {-s, -5.0 * invh2[a]},
                            {-2 * s, 4.0 * invh2[a]},
                            {-3 * s, -invh2[a]}}};
                }
            }
        }
    }

    bool interior(const std::array<int, Dim>& idx) const {
        for (int a = 0; a < Dim; ++a)
            if (idx[a] == 0 || idx[a] == n[a] - 1) return false;
        return true;
    }
};

template <int Dim>
struct CentralEval {
    const StencilTables<Dim>* t;
    std::int64_t p;

    double d1(int a, auto&& f) const {
        return (f(p + t->stride[a]) - f(p - t->stride[a])) * t->inv2h[a];
    }
    double d2(int a, auto&& f) const {
        return (f(p + t->stride[a]) - 2.0 * f(p) + f(p - t->stride[a])) * t->invh2[a];
    }
};

template <int Dim>
struct TableEval {
    const StencilTables<Dim>* t;
    std::array<int, Dim> idx;
    std::int64_t p;

    double d1(int a, auto&& f) const {
        const StencilDesc& d = t->d1[a][idx[a]];
        double acc = 0.0;
        for (int k = 0; k < d.count; ++k) acc += d.e[k].coef * f(p + d.e[k].off);
        return acc;
    }
    double d2(int a, auto&& f) const {
        const StencilDesc& d = t->d2[a][idx[a]];
        double acc = 0.0;
        for (int k = 0; k < d.count; ++k) acc += d.e[k].coef * f(p + d.e[k].off);
        return acc;
    }
};

}  // namespace detail

/// Reusable scratch for the fused RHS kernels.
template <int Dim>
struct RhsWorkspace {
    ScalarField<Dim> pressure, divu;
    detail::StencilTables<Dim> tables;

    void prepare(const GridSpec<Dim>& g) {
        if (!(pressure.grid() == g)) {
            pressure = ScalarField<Dim>(g);
            divu = ScalarField<Dim>(g);
            tables = detail::StencilTables<Dim>(g);
        }
    }
};

namespace detail {

/// One fused pass assembling the full or perturbation right-hand side.
template <int Dim, bool Perturb>
void assemble_rhs(const ScalarField<Dim>& rho_in, const VectorField<Dim>& u_in,
                  const TensorField<Dim>& FE_in, const MaterialParams& mp, ViscousMode vm,
                  StateDelta<Dim>& out, RhsWorkspace<Dim>& ws) {
    const GridSpec<Dim>& g = rho_in.grid();
    ws.prepare(g);
    constexpr int DD = Dim * Dim;

    const double* rho = rho_in.data().data();
    const double* u = u_in.data().data();
    const double* FE = FE_in.data().data();

    // Pointwise total density and pressure; composed divergence of u.
    for (std::int64_t q = 0; q < rho_in.nodes(); ++q) {
        const double rt = Perturb ? 1.0 + rho[q] : rho[q];
        if (!(rt > 0.0)) {
            const auto idx = rho_in.node_multi_index(q);
            std::string loc;
            for (int a = 0; a < Dim; ++a) loc += (a ? "," : "(") + std::to_string(idx[a]);
            throw InvalidArgument("rhs: density not positive at node " + loc + "): " +
                                  std::to_string(rt));
        }
        ws.pressure(q) = mp.pressure(rt);
    }
    axis_derivative<Deriv::First, false>(u_in, 0, 0, ws.divu, 0);
    for (int a = 1; a < Dim; ++a)
        axis_derivative<Deriv::First, true>(u_in, a, a, ws.divu, 0);

    const double* P = ws.pressure.data().data();
    const double* divu = ws.divu.data().data();
    double* dr_out = out.dscalar.data().data();
    double* du_out = out.dvector.data().data();
    double* dF_out = out.dtensor.data().data();

    const double mu = mp.mu;
    const double mul = mp.mu + mp.lambda;
    const bool imex = vm == ViscousMode::ImexExplicit;
    const detail::StencilTables<Dim>& tables = ws.tables;

    auto rho_tot = [rho](std::int64_t q) { return Perturb ? 1.0 + rho[q] : rho[q]; };
    auto F_tot = [FE](std::int64_t q, int i, int k) {
        const double v = FE[q * DD + i * Dim + k];
        if constexpr (Perturb) return i == k ? 1.0 + v : v;
        return v;
    };

    auto body = [&](const auto& ev, std::int64_t p) {
        const double rt = rho_tot(p);

        double dr = 0.0;
        for (int a = 0; a < Dim; ++a)
            dr -= ev.d1(a, [&](std::int64_t q) { return rho[q] * u[q * Dim + a]; });
        if constexpr (Perturb) dr -= divu[p];
        dr_out[p] = dr;

        const double coef = imex ? (1.0 / rt - 1.0) : (1.0 / rt);
        for (int i = 0; i < Dim; ++i) {
            double num = 0.0;
            for (int j = 0; j < Dim; ++j)
                num -= ev.d1(j, [&](std::int64_t q) {
                    return rho_tot(q) * u[q * Dim + i] * u[q * Dim + j];
                });
            num -= ev.d1(i, [&](std::int64_t q) { return P[q]; });
            for (int j = 0; j < Dim; ++j)
                num += ev.d1(j, [&](std::int64_t q) {
                    double s = 0.0;
                    for (int k = 0; k < Dim; ++k) s += F_tot(q, i, k) * F_tot(q, j, k);
                    return rho_tot(q) * s;
                });
            num -= u[p * Dim + i] * dr;
            double lap = 0.0;
            for (int a = 0; a < Dim; ++a)
                lap += ev.d2(a, [&](std::int64_t q) { return u[q * Dim + i]; });
            const double gdiv = ev.d1(i, [&](std::int64_t q) { return divu[q]; });
            du_out[p * Dim + i] = num / rt + coef * (mu * lap + mul * gdiv);
        }

        double Du[Dim][Dim];
        for (int i = 0; i < Dim; ++i)
            for (int k = 0; k < Dim; ++k)
                Du[i][k] = ev.d1(k, [&](std::int64_t q) { return u[q * Dim + i]; });
        for (int i = 0; i < Dim; ++i)
            for (int j = 0; j < Dim; ++j) {
                const int c = i * Dim + j;
                double adv = 0.0;
                for (int k = 0; k < Dim; ++k)
                    adv += u[p * Dim + k] *
                           ev.d1(k, [&](std::int64_t q) { return FE[q * DD + c]; });
                double src = 0.0;
                for (int k = 0; k < Dim; ++k) src += Du[i][k] * F_tot(p, k, j);
                dF_out[p * DD + c] = src - adv;
            }
    };

    const int outer_n = g.nodes(Dim - 1);
    parallel_chunks(outer_n, [&](int ob, int oe) {
        std::array<int, Dim> idx{};
        std::int64_t inner = 1;
        for (int a = 0; a < Dim - 1; ++a) inner *= g.nodes(a);
        for (int o = ob; o < oe; ++o) {
            idx[Dim - 1] = o;
            std::int64_t p = o * inner;
            if constexpr (Dim == 2) {
                for (idx[0] = 0; idx[0] < g.nodes(0); ++idx[0], ++p) {
                    if (tables.interior(idx))
                        body(detail::CentralEval<Dim>{&tables, p}, p);
                    else
                        body(detail::TableEval<Dim>{&tables, idx, p}, p);
                }
            } else {
                for (idx[1] = 0; idx[1] < g.nodes(1); ++idx[1])
                    for (idx[0] = 0; idx[0] < g.nodes(0); ++idx[0], ++p) {
                        if (tables.interior(idx))
                            body(detail::CentralEval<Dim>{&tables, p}, p);
                        else
                            body(detail::TableEval<Dim>{&tables, idx, p}, p);
                    }
            }
        }
    });
}

}  // namespace detail

/// Right-hand side of the full system: flux-form continuity, momentum in
/// velocity form, and the deformation transport F_t = -(u . grad) F +
/// (grad u) F. Optional forcing is added after assembly.
template <int Dim>
void rhs_full(const FlowState<Dim>& s, const MaterialParams& mp, const Forcing<Dim>* forcing,
              ViscousMode vm, StateDelta<Dim>& out, RhsWorkspace<Dim>& ws) {
    detail::assemble_rhs<Dim, false>(s.rho, s.u, s.F, mp, vm, out, ws);
    if (forcing) forcing->add(s.t, out.dscalar, out.dvector, out.dtensor);
}

template <int Dim>
StateDelta<Dim> rhs_full(const FlowState<Dim>& s, const MaterialParams& mp,
                         const Forcing<Dim>* forcing = nullptr,
                         ViscousMode vm = ViscousMode::Full) {
    StateDelta<Dim> out(s.grid());
    RhsWorkspace<Dim> ws;
    rhs_full(s, mp, forcing, vm, out, ws);
    return out;
}

/// Right-hand side of the perturbation system; algebraically equivalent to
/// rhs_full under rho = 1 + rho~, F = I + E.
template <int Dim>
void rhs_perturb(const PerturbState<Dim>& s, const MaterialParams& mp,
                 const Forcing<Dim>* forcing, ViscousMode vm, StateDelta<Dim>& out,
                 RhsWorkspace<Dim>& ws) {
    detail::assemble_rhs<Dim, true>(s.rho_tilde, s.u, s.E, mp, vm, out, ws);
    if (forcing) forcing->add(s.t, out.dscalar, out.dvector, out.dtensor);
}

template <int Dim>
StateDelta<Dim> rhs_perturb(const PerturbState<Dim>& s, const MaterialParams& mp,
                            const Forcing<Dim>* forcing = nullptr,
                            ViscousMode vm = ViscousMode::Full) {
    StateDelta<Dim> out(s.grid());
    RhsWorkspace<Dim> ws;
    rhs_perturb(s, mp, forcing, vm, out, ws);
    return out;
}

}  // namespace vfl
