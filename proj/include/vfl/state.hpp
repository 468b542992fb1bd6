#pragma once

#include <string>

#include "vfl/field.hpp"

namespace vfl {

/// Full-form unknowns (rho, u, F) at one instant.
template <int Dim>
struct FlowState {
    ScalarField<Dim> rho;
    VectorField<Dim> u;
    TensorField<Dim> F;
    double t = 0.0;

    FlowState() = default;
    explicit FlowState(const GridSpec<Dim>& g) : rho(g), u(g), F(g) {
        rho.fill(1.0);
        for (std::int64_t n = 0; n < F.nodes(); ++n)
            for (int i = 0; i < Dim; ++i) F(n, tc<Dim>(i, i)) = 1.0;
    }

    const GridSpec<Dim>& grid() const { return rho.grid(); }
};

/// Perturbation-form unknowns (rho~, u, E) with rho = 1 + rho~, F = I + E.
template <int Dim>
struct PerturbState {
    ScalarField<Dim> rho_tilde;
    VectorField<Dim> u;
    TensorField<Dim> E;
    double t = 0.0;

    PerturbState() = default;
    explicit PerturbState(const GridSpec<Dim>& g) : rho_tilde(g), u(g), E(g) {}

    const GridSpec<Dim>& grid() const { return rho_tilde.grid(); }
};

template <int Dim>
FlowState<Dim> to_flow(const PerturbState<Dim>& p) {
    FlowState<Dim> s(p.grid());
    for (std::int64_t n = 0; n < s.rho.nodes(); ++n) s.rho(n) = 1.0 + p.rho_tilde(n);
    s.u = p.u;
    for (std::int64_t n = 0; n < s.F.nodes(); ++n)
        for (int c = 0; c < Dim * Dim; ++c)
            s.F(n, c) = p.E(n, c) + (c % (Dim + 1) == 0 ? 1.0 : 0.0);
    s.t = p.t;
    return s;
}

template <int Dim>
PerturbState<Dim> to_perturb(const FlowState<Dim>& s) {
    PerturbState<Dim> p(s.grid());
    for (std::int64_t n = 0; n < p.rho_tilde.nodes(); ++n) p.rho_tilde(n) = s.rho(n) - 1.0;
    p.u = s.u;
    for (std::int64_t n = 0; n < p.E.nodes(); ++n)
        for (int c = 0; c < Dim * Dim; ++c)
            p.E(n, c) = s.F(n, c) - (c % (Dim + 1) == 0 ? 1.0 : 0.0);
    p.t = s.t;
    return p;
}

/// Force u = 0 on the boundary nodes of a no-slip box (no-op on the torus).
template <int Dim>
void impose_velocity_bc(VectorField<Dim>& u) {
    const GridSpec<Dim>& g = u.grid();
    if (g.boundary != Boundary::NoSlipBox) return;
    for_each_node(g, [&](const std::array<int, Dim>& idx, std::int64_t n) {
        if (g.on_boundary(idx))
            for (int c = 0; c < Dim; ++c) u(n, c) = 0.0;
    });
}

/// Positive density everywhere; reports the first offending node.
template <int Dim>
void require_positive_density(const ScalarField<Dim>& rho, double floor = 0.0) {
    for (std::int64_t n = 0; n < rho.nodes(); ++n) {
        if (!(rho(n) > floor)) {
            const auto idx = rho.node_multi_index(n);
            std::string loc = "(";
            for (int a = 0; a < Dim; ++a) loc += std::to_string(idx[a]) + (a + 1 < Dim ? "," : ")");
            throw InvalidArgument("density not positive at node " + loc + ": " +
                                  std::to_string(rho(n)));
        }
    }
}

}  // namespace vfl
