#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "vfl/operators.hpp"

namespace vfl {

/// Discrete norm selector: L^q with `derivative_order` gradient levels added,
/// optionally composed in time with exponent p (infinity() for the sup).
struct NormSpec {
    double q = 2.0;
    int derivative_order = 0;
    double time_exponent = std::numeric_limits<double>::quiet_NaN();  // NaN: none

    static NormSpec lq(double q) { return {q, 0, std::numeric_limits<double>::quiet_NaN()}; }
    static NormSpec w1q(double q) { return {q, 1, std::numeric_limits<double>::quiet_NaN()}; }
    static NormSpec w2q(double q) { return {q, 2, std::numeric_limits<double>::quiet_NaN()}; }

    void validate() const {
        if (!(q > 1.0)) throw InvalidArgument("NormSpec: q must exceed 1");
        if (derivative_order < 0 || derivative_order > 2)
            throw InvalidArgument("NormSpec: derivative order must be 0, 1, or 2");
        if (!std::isnan(time_exponent) && !(time_exponent >= 1.0))
            throw InvalidArgument("NormSpec: time exponent must be >= 1 (or infinity)");
    }
};

/// Quadrature of a scalar field over the box (midpoint weights; trapezoid
/// end-weights on a no-slip box). Exact for constants.
template <int Dim>
double integrate(const ScalarField<Dim>& f) {
    const GridSpec<Dim>& g = f.grid();
    double sum = 0.0;
    for_each_node(g, [&](const std::array<int, Dim>& idx, std::int64_t n) {
        double w = 1.0;
        for (int a = 0; a < Dim; ++a) w *= g.quad_weight(a, idx[a]);
        sum += w * f(n);
    });
    return sum;
}

/// Discrete L^q norm; |f| is the pointwise Euclidean (Frobenius) magnitude
/// over components.
template <int Dim, int NC>
double lq_norm(const Field<Dim, NC>& f, double q) {
    if (!(q >= 1.0)) throw InvalidArgument("lq_norm: q must be >= 1");
    const GridSpec<Dim>& g = f.grid();
    double sum = 0.0;
    for_each_node(g, [&](const std::array<int, Dim>& idx, std::int64_t n) {
        double w = 1.0;
        for (int a = 0; a < Dim; ++a) w *= g.quad_weight(a, idx[a]);
        double m2 = 0.0;
        for (int c = 0; c < NC; ++c) m2 += f(n, c) * f(n, c);
        sum += w * (q == 2.0 ? m2 : std::pow(m2, 0.5 * q));
    });
    return std::pow(sum, 1.0 / q);
}

template <int Dim, int NC>
double linf_norm(const Field<Dim, NC>& f) {
    return f.max_abs();
}

/// Pointwise mean of a component (plain average over nodes).
template <int Dim, int NC>
double node_mean(const Field<Dim, NC>& f, int c = 0) {
    double s = 0.0;
    for (std::int64_t n = 0; n < f.nodes(); ++n) s += f(n, c);
    return s / static_cast<double>(f.nodes());
}

/// lq_norm(f) + lq_norm(grad f).
template <int Dim, int NC>
double w1q_norm(const Field<Dim, NC>& f, double q) {
    return lq_norm(f, q) + lq_norm(gradient(f), q);
}

/// Sobolev-style norm per NormSpec (spatial part only).
template <int Dim, int NC>
double sobolev_norm(const Field<Dim, NC>& f, const NormSpec& spec) {
    spec.validate();
    double total = lq_norm(f, spec.q);
    if (spec.derivative_order >= 1) {
        auto g1 = gradient(f);
        total += lq_norm(g1, spec.q);
        if (spec.derivative_order == 2) total += lq_norm(gradient(g1), spec.q);
    }
    return total;
}

/// Trapezoid-in-time composition of precomputed spatial norms; p = infinity
/// takes the supremum over samples. Samples must be strictly increasing in t.
inline double spacetime_norm(const std::vector<std::pair<double, double>>& samples, double p) {
    if (samples.size() < 2) throw InvalidArgument("spacetime_norm: need at least 2 samples");
    if (!(p >= 1.0)) throw InvalidArgument("spacetime_norm: p must be >= 1 or infinity");
    for (std::size_t k = 1; k < samples.size(); ++k)
        if (!(samples[k].first > samples[k - 1].first))
            throw InvalidArgument("spacetime_norm: samples must be strictly increasing in t");
    if (std::isinf(p)) {
        double m = 0.0;
        for (const auto& [t, v] : samples) m = std::max(m, std::abs(v));
        return m;
    }
    double sum = 0.0;
    for (std::size_t k = 1; k < samples.size(); ++k) {
        const double dt = samples[k].first - samples[k - 1].first;
        const double a = std::pow(std::abs(samples[k - 1].second), p);
        const double b = std::pow(std::abs(samples[k].second), p);
        sum += 0.5 * dt * (a + b);
    }
    return std::pow(sum, 1.0 / p);
}

}  // namespace vfl
