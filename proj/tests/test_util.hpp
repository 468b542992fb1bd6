#pragma once

#include <random>

#include "vfl/field.hpp"
#include "vfl/state.hpp"

namespace vfl::testing {

/// Uniform noise in [-1, 1], node by node.
template <int Dim, int NC>
void fill_random(Field<Dim, NC>& f, std::mt19937_64& rng, double amp = 1.0) {
    std::uniform_real_distribution<double> dist(-amp, amp);
    for (double& v : f.data()) v = dist(rng);
}

/// Smooth random field: a handful of low-wavenumber trig modes per component.
/// Periodic by construction; on a no-slip box the modes become sine products
/// that vanish on the faces when `face_zero` is set.
template <int Dim, int NC>
void fill_smooth(Field<Dim, NC>& f, std::mt19937_64& rng, double amp = 0.1,
                 bool face_zero = false) {
    const GridSpec<Dim>& g = f.grid();
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    std::uniform_int_distribution<int> wave(1, 2);
    std::uniform_real_distribution<double> coef(0.5, 1.0);
    for (int c = 0; c < NC; ++c) {
        for (int mode = 0; mode < 2; ++mode) {
            std::array<int, Dim> m;
            for (int a = 0; a < Dim; ++a) m[a] = wave(rng);
            const double A = amp * coef(rng);
            const double p0 = phase(rng);
            for_each_node(g, [&](const std::array<int, Dim>& idx, std::int64_t n) {
                const auto x = g.point(idx);
                double v;
                if (face_zero || g.boundary == Boundary::NoSlipBox) {
                    v = A;
                    for (int a = 0; a < Dim; ++a)
                        v *= std::sin(M_PI * m[a] * x[a] / g.lengths[a]);
                } else {
                    double arg = p0;
                    for (int a = 0; a < Dim; ++a)
                        arg += 2.0 * M_PI * m[a] * x[a] / g.lengths[a];
                    v = A * std::sin(arg);
                }
                f(n, c) += v;
            });
        }
    }
}

/// Random smooth full-form state with rho near 1 and F near I.
template <int Dim>
FlowState<Dim> random_smooth_state(const GridSpec<Dim>& g, std::mt19937_64& rng,
                                   double amp = 0.1) {
    FlowState<Dim> s(g);
    fill_smooth(s.rho, rng, amp);
    fill_smooth(s.u, rng, amp, g.boundary == Boundary::NoSlipBox);
    fill_smooth(s.F, rng, amp);
    impose_velocity_bc(s.u);
    return s;
}

template <int Dim, int NC>
double max_abs_diff(const Field<Dim, NC>& a, const Field<Dim, NC>& b) {
    double m = 0.0;
    for (std::int64_t n = 0; n < a.nodes(); ++n)
        for (int c = 0; c < NC; ++c) m = std::max(m, std::abs(a(n, c) - b(n, c)));
    return m;
}

}  // namespace vfl::testing
