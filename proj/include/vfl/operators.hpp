#pragma once

#include <cstddef>

#include "vfl/field.hpp"

// Derivative conventions used throughout:
//   (grad u)_{ij}  = du_i/dx_j      (component i*Dim+j of the tensor output)
//   (div T)_i      = d_{x_j} T_{ij} (contraction over the second index)
// so that (grad u . F)_{ij} = (du_i/dx_k) F_{kj} and div(rho F F^T) has free
// index i. Interior stencils are second-order central; no-slip box faces use
// one-sided stencils that are also second order.

namespace vfl {

namespace detail {

/// Call f(line_base_node, node_stride, line_length) for every grid line
/// running along `axis`.
template <int Dim, typename F>
void for_each_line(const GridSpec<Dim>& g, int axis, F&& f) {
    std::array<std::int64_t, Dim> stride;
    stride[0] = 1;
    for (int a = 1; a < Dim; ++a) stride[a] = stride[a - 1] * g.nodes(a - 1);
    const int n = g.nodes(axis);
    if constexpr (Dim == 2) {
        const int other = 1 - axis;
        for (int k = 0; k < g.nodes(other); ++k) f(k * stride[other], stride[axis], n);
    } else {
        const int oa = axis == 0 ? 1 : 0;
        const int ob = axis == 2 ? 1 : 2;
        for (int kb = 0; kb < g.nodes(ob); ++kb)
            for (int ka = 0; ka < g.nodes(oa); ++ka)
                f(ka * stride[oa] + kb * stride[ob], stride[axis], n);
    }
}

enum class Deriv { First, Second };

/// out(., oc) (+)= d/dx_axis f(., c), first or second derivative.
template <Deriv Order, bool Accumulate, int Dim, int NCI, int NCO>
void axis_derivative(const Field<Dim, NCI>& f, int c, int axis,
                     Field<Dim, NCO>& out, int oc, double coef = 1.0) {
    const GridSpec<Dim>& g = f.grid();
    const bool periodic = g.boundary == Boundary::Periodic;
    const double h = g.spacing(axis);
    const double scale = (Order == Deriv::First) ? coef / (2.0 * h) : coef / (h * h);
    const double* in = f.data().data() + c;
    double* o = out.data().data() + oc;
    // Scratch-free: stencils never read `out`, and with Accumulate we add
    // into a local value before storing.
    for_each_line(g, axis, [&](std::int64_t base, std::int64_t node_stride, int n) {
        const double* ip = in + base * NCI;
        double* op = o + base * NCO;
        const std::ptrdiff_t si = node_stride * NCI;
        const std::ptrdiff_t so = node_stride * NCO;
        auto emit = [&](int k, double v) {
            if constexpr (Accumulate) op[k * so] += v;
            else op[k * so] = v;
        };
        if constexpr (Order == Deriv::First) {
            for (int k = 1; k + 1 < n; ++k)
                emit(k, (ip[(k + 1) * si] - ip[(k - 1) * si]) * scale);
            if (periodic) {
                emit(0, (ip[si] - ip[(n - 1) * si]) * scale);
                emit(n - 1, (ip[0] - ip[(n - 2) * si]) * scale);
            } else {
                emit(0, (-3.0 * ip[0] + 4.0 * ip[si] - ip[2 * si]) * scale);
                emit(n - 1, (3.0 * ip[(n - 1) * si] - 4.0 * ip[(n - 2) * si] +
                             ip[(n - 3) * si]) * scale);
            }
        } else {
            for (int k = 1; k + 1 < n; ++k)
                emit(k, (ip[(k + 1) * si] - 2.0 * ip[k * si] + ip[(k - 1) * si]) * scale);
            if (periodic) {
                emit(0, (ip[si] - 2.0 * ip[0] + ip[(n - 1) * si]) * scale);
                emit(n - 1, (ip[0] - 2.0 * ip[(n - 1) * si] + ip[(n - 2) * si]) * scale);
            } else {
                emit(0, (2.0 * ip[0] - 5.0 * ip[si] + 4.0 * ip[2 * si] - ip[3 * si]) * scale);
                emit(n - 1, (2.0 * ip[(n - 1) * si] - 5.0 * ip[(n - 2) * si] +
                             4.0 * ip[(n - 3) * si] - ip[(n - 4) * si]) * scale);
            }
        }
    });
}

}  // namespace detail

/// d/dx_axis of component c, as a standalone scalar field.
template <int Dim, int NC>
ScalarField<Dim> derivative(const Field<Dim, NC>& f, int c, int axis) {
    ScalarField<Dim> out(f.grid());
    detail::axis_derivative<detail::Deriv::First, false>(f, c, axis, out, 0);
    return out;
}

/// Gradient: component c*Dim + a of the result is d f_c / d x_a.
template <int Dim, int NC>
Field<Dim, NC * Dim> gradient(const Field<Dim, NC>& f) {
    Field<Dim, NC * Dim> out(f.grid());
    for (int c = 0; c < NC; ++c)
        for (int a = 0; a < Dim; ++a)
            detail::axis_derivative<detail::Deriv::First, false>(f, c, a, out, c * Dim + a);
    return out;
}

template <int Dim>
ScalarField<Dim> div_vec(const VectorField<Dim>& u) {
    ScalarField<Dim> out(u.grid());
    detail::axis_derivative<detail::Deriv::First, false>(u, 0, 0, out, 0);
    for (int a = 1; a < Dim; ++a)
        detail::axis_derivative<detail::Deriv::First, true>(u, a, a, out, 0);
    return out;
}

/// (div T)_i = d_{x_j} T_{ij}.
template <int Dim>
VectorField<Dim> div_tensor(const TensorField<Dim>& T) {
    VectorField<Dim> out(T.grid());
    for (int i = 0; i < Dim; ++i) {
        detail::axis_derivative<detail::Deriv::First, false>(T, tc<Dim>(i, 0), 0, out, i);
        for (int j = 1; j < Dim; ++j)
            detail::axis_derivative<detail::Deriv::First, true>(T, tc<Dim>(i, j), j, out, i);
    }
    return out;
}

/// 2D curl of a vector field: d1 u2 - d2 u1.
inline ScalarField<2> curl(const VectorField<2>& u) {
    ScalarField<2> out(u.grid());
    detail::axis_derivative<detail::Deriv::First, false>(u, 1, 0, out, 0);
    detail::axis_derivative<detail::Deriv::First, true>(u, 0, 1, out, 0, -1.0);
    return out;
}

inline VectorField<3> curl(const VectorField<3>& u) {
    VectorField<3> out(u.grid());
    // (curl u)_i = eps_{ijk} d_j u_k
    detail::axis_derivative<detail::Deriv::First, false>(u, 2, 1, out, 0);
    detail::axis_derivative<detail::Deriv::First, true>(u, 1, 2, out, 0, -1.0);
    detail::axis_derivative<detail::Deriv::First, false>(u, 0, 2, out, 1);
    detail::axis_derivative<detail::Deriv::First, true>(u, 2, 0, out, 1, -1.0);
    detail::axis_derivative<detail::Deriv::First, false>(u, 1, 0, out, 2);
    detail::axis_derivative<detail::Deriv::First, true>(u, 0, 1, out, 2, -1.0);
    return out;
}

/// Row-wise curl of a tensor: one curl per row (E_{i1},..,E_{id}).
inline VectorField<2> curl_rows(const TensorField<2>& T) {
    VectorField<2> out(T.grid());
    for (int i = 0; i < 2; ++i) {
        detail::axis_derivative<detail::Deriv::First, false>(T, tc<2>(i, 1), 0, out, i);
        detail::axis_derivative<detail::Deriv::First, true>(T, tc<2>(i, 0), 1, out, i, -1.0);
    }
    return out;
}

inline TensorField<3> curl_rows(const TensorField<3>& T) {
    TensorField<3> out(T.grid());
    for (int i = 0; i < 3; ++i) {
        detail::axis_derivative<detail::Deriv::First, false>(T, tc<3>(i, 2), 1, out, tc<3>(i, 0));
        detail::axis_derivative<detail::Deriv::First, true>(T, tc<3>(i, 1), 2, out, tc<3>(i, 0), -1.0);
        detail::axis_derivative<detail::Deriv::First, false>(T, tc<3>(i, 0), 2, out, tc<3>(i, 1));
        detail::axis_derivative<detail::Deriv::First, true>(T, tc<3>(i, 2), 0, out, tc<3>(i, 1), -1.0);
        detail::axis_derivative<detail::Deriv::First, false>(T, tc<3>(i, 1), 0, out, tc<3>(i, 2));
        detail::axis_derivative<detail::Deriv::First, true>(T, tc<3>(i, 0), 1, out, tc<3>(i, 2), -1.0);
    }
    return out;
}

/// Componentwise compact Laplacian (3-point second differences per axis).
template <int Dim, int NC>
Field<Dim, NC> laplacian(const Field<Dim, NC>& f) {
    Field<Dim, NC> out(f.grid());
    for (int c = 0; c < NC; ++c) {
        detail::axis_derivative<detail::Deriv::Second, false>(f, c, 0, out, c);
        for (int a = 1; a < Dim; ++a)
            detail::axis_derivative<detail::Deriv::Second, true>(f, c, a, out, c);
    }
    return out;
}

/// grad(div u) composed from first-derivative stencils, as the momentum
/// operator uses it.
template <int Dim>
VectorField<Dim> grad_div(const VectorField<Dim>& u) {
    return gradient(div_vec(u));
}

}  // namespace vfl
