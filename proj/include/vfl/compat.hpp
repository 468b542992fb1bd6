#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vfl/elliptic.hpp"
#include "vfl/state.hpp"

namespace vfl {

/// One trigonometric displacement/velocity mode. On periodic grids the mode
/// is coeff_c sin(2 pi wave . X / L + phase); on a no-slip box it is the
/// face-vanishing product coeff_c prod_a sin(pi wave_a X_a / L_a), which
/// requires wave_a >= 1 on every axis.
template <int Dim>
struct WaveMode {
    std::array<int, Dim> wave{};
    std::array<double, Dim> coeff{};
    double phase = 0.0;
};

/// Recipe for compatible initial data: a deformation map phi(X) = X + psi(X)
/// with psi = amplitude * sum of modes, plus an independent small velocity.
template <int Dim>
struct DisplacementSpec {
    double amplitude = 0.0;
    std::vector<WaveMode<Dim>> modes;
    double velocity_amplitude = 0.0;
    std::vector<WaveMode<Dim>> velocity_modes;

    /// The canonical two-mode recipe used by the verification studies.
    static DisplacementSpec standard(double eps, double vel_eps) {
        DisplacementSpec s;
        s.amplitude = eps;
        s.velocity_amplitude = vel_eps;
        WaveMode<Dim> m1, m2, v1, v2;
        m1.wave[1] = 1;
        m1.coeff[0] = 1.0;
        m2.wave[0] = 1;
        m2.coeff[1] = 0.8;
        m2.phase = 0.7;
        v1.wave[1] = 1;
        v1.coeff[0] = 1.0;
        v1.phase = 0.3;
        v2.wave[0] = 1;
        v2.coeff[1] = 0.9;
        v2.phase = 1.1;
        s.modes = {m1, m2};
        s.velocity_modes = {v1, v2};
        return s;
    }
};

namespace detail {

template <int Dim>
std::array<double, Dim> eval_modes(const std::vector<WaveMode<Dim>>& modes, double amp,
                                   const std::array<double, Dim>& lengths,
                                   const std::array<double, Dim>& X, bool periodic) {
    std::array<double, Dim> v{};
    for (const auto& m : modes) {
        if (periodic) {
            double arg = m.phase;
            for (int a = 0; a < Dim; ++a) arg += 2.0 * M_PI * m.wave[a] * X[a] / lengths[a];
            const double s = std::sin(arg);
            for (int c = 0; c < Dim; ++c) v[c] += amp * m.coeff[c] * s;
        } else {
            double prod = 1.0;
            for (int a = 0; a < Dim; ++a) prod *= std::sin(M_PI * m.wave[a] * X[a] / lengths[a]);
            for (int c = 0; c < Dim; ++c) v[c] += amp * m.coeff[c] * prod;
        }
    }
    return v;
}

/// grad[c][a] = d psi_c / d X_a, analytically.
template <int Dim>
std::array<std::array<double, Dim>, Dim> eval_modes_grad(
    const std::vector<WaveMode<Dim>>& modes, double amp,
    const std::array<double, Dim>& lengths, const std::array<double, Dim>& X, bool periodic) {
    std::array<std::array<double, Dim>, Dim> grad{};
    for (const auto& m : modes) {
        if (periodic) {
            double arg = m.phase;
            for (int a = 0; a < Dim; ++a) arg += 2.0 * M_PI * m.wave[a] * X[a] / lengths[a];
            const double co = std::cos(arg);
            for (int c = 0; c < Dim; ++c)
                for (int a = 0; a < Dim; ++a)
                    grad[c][a] += amp * m.coeff[c] * co * 2.0 * M_PI * m.wave[a] / lengths[a];
        } else {
            std::array<double, Dim> sins, coss, freq;
            for (int a = 0; a < Dim; ++a) {
                freq[a] = M_PI * m.wave[a] / lengths[a];
                sins[a] = std::sin(freq[a] * X[a]);
                coss[a] = std::cos(freq[a] * X[a]);
            }
            for (int a = 0; a < Dim; ++a) {
                double prod = freq[a] * coss[a];
                for (int b = 0; b < Dim; ++b)
                    if (b != a) prod *= sins[b];
                for (int c = 0; c < Dim; ++c) grad[c][a] += amp * m.coeff[c] * prod;
            }
        }
    }
    return grad;
}

template <int Dim>
double det_from_rows(const std::array<std::array<double, Dim>, Dim>& m) {
    if constexpr (Dim == 2)
        return m[0][0] * m[1][1] - m[0][1] * m[1][0];
    else
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

}  // namespace detail

/// Fixed-point inversion of phi(X) = X + psi(X): iterates X <- x - psi(X).
/// psi must be a contraction (max |grad psi| < 1).
template <int Dim>
std::array<double, Dim> invert_map(
    const std::function<std::array<double, Dim>(const std::array<double, Dim>&)>& psi,
    const std::array<double, Dim>& x, double tol, int max_iter = 200) {
    std::array<double, Dim> X = x;
    for (int it = 0; it < max_iter; ++it) {
        const auto p = psi(X);
        double err = 0.0;
        std::array<double, Dim> next;
        for (int a = 0; a < Dim; ++a) {
            next[a] = x[a] - p[a];
            err = std::max(err, std::abs(X[a] + p[a] - x[a]));
        }
        if (err <= tol) return X;
        X = next;
    }
    throw SolveError("invert_map: fixed point did not converge (psi is likely not a contraction)",
                     {});
}

/// Builds (rho0, u0, F0) from a displacement recipe: F0 = (I + grad psi)
/// evaluated at X = phi^{-1}(x) and rho0 = 1 / det F0, so the determinant,
/// Piola, and curl identities hold up to discretization error.
template <int Dim>
FlowState<Dim> gen_initial_from_displacement(const DisplacementSpec<Dim>& spec,
                                             const GridSpec<Dim>& grid) {
    const bool periodic = grid.boundary == Boundary::Periodic;
    if (!periodic)
        for (const auto& m : spec.modes)
            for (int a = 0; a < Dim; ++a)
                if (m.wave[a] < 1)
                    throw InvalidArgument(
                        "displacement: no-slip modes need wave numbers >= 1 on every axis");

    auto psi = [&](const std::array<double, Dim>& X) {
        return detail::eval_modes<Dim>(spec.modes, spec.amplitude, grid.lengths, X, periodic);
    };

    // Invertibility: sample max row-sum of grad psi on a refined lattice.
    double max_grad = 0.0;
    {
        std::array<int, Dim> n{};
        for (int a = 0; a < Dim; ++a) n[a] = 2 * grid.nodes(a);
        std::array<int, Dim> idx{};
        const std::int64_t total = [&] {
            std::int64_t t = 1;
            for (int a = 0; a < Dim; ++a) t *= n[a];
            return t;
        }();
        for (std::int64_t k = 0; k < total; ++k) {
            std::int64_t r = k;
            std::array<double, Dim> X;
            for (int a = 0; a < Dim; ++a) {
                idx[a] = static_cast<int>(r % n[a]);
                r /= n[a];
                X[a] = grid.lengths[a] * idx[a] / n[a];
            }
            const auto gp =
                detail::eval_modes_grad<Dim>(spec.modes, spec.amplitude, grid.lengths, X, periodic);
            for (int c = 0; c < Dim; ++c) {
                double row = 0.0;
                for (int a = 0; a < Dim; ++a) row += std::abs(gp[c][a]);
                max_grad = std::max(max_grad, row);
            }
        }
    }
    if (max_grad >= 0.5)
        throw InvalidArgument("displacement: deformation too large, max |grad psi| = " +
                              std::to_string(max_grad) + " >= 0.5");

    FlowState<Dim> s(grid);
    for_each_node(grid, [&](const std::array<int, Dim>& idx, std::int64_t n) {
        const auto x = grid.point(idx);
        const auto X = invert_map<Dim>(psi, x, 1e-13);
        const auto gp =
            detail::eval_modes_grad<Dim>(spec.modes, spec.amplitude, grid.lengths, X, periodic);
        std::array<std::array<double, Dim>, Dim> F;
        for (int i = 0; i < Dim; ++i)
            for (int j = 0; j < Dim; ++j) F[i][j] = (i == j ? 1.0 : 0.0) + gp[i][j];
        const double det = detail::det_from_rows<Dim>(F);
        if (!(det > 0.0))
            throw InvalidArgument("displacement: non-positive deformation determinant");
        s.rho(n) = 1.0 / det;
        for (int i = 0; i < Dim; ++i)
            for (int j = 0; j < Dim; ++j) s.F(n, tc<Dim>(i, j)) = F[i][j];
        const auto u = detail::eval_modes<Dim>(spec.velocity_modes, spec.velocity_amplitude,
                                               grid.lengths, x, periodic);
        for (int c = 0; c < Dim; ++c) s.u(n, c) = u[c];
    });
    impose_velocity_bc(s.u);
    return s;
}

struct IntrinsicResiduals {
    double det = 0.0;    ///< Linf of rho det(F) - 1
    double piola = 0.0;  ///< Lq of div(rho F^T)
    double curl = 0.0;   ///< max over index triples of Lq of the curl identity gap
};

/// Residuals of the three transported identities of the full system.
template <int Dim>
IntrinsicResiduals check_intrinsic(const FlowState<Dim>& s, double q = 2.0) {
    const GridSpec<Dim>& g = s.grid();
    IntrinsicResiduals r;

    for (std::int64_t n = 0; n < s.rho.nodes(); ++n) {
        std::array<std::array<double, Dim>, Dim> F;
        for (int i = 0; i < Dim; ++i)
            for (int j = 0; j < Dim; ++j) F[i][j] = s.F(n, tc<Dim>(i, j));
        r.det = std::max(r.det, std::abs(s.rho(n) * detail::det_from_rows<Dim>(F) - 1.0));
    }

    TensorField<Dim> rhoFT(g);
    for (std::int64_t n = 0; n < rhoFT.nodes(); ++n)
        for (int i = 0; i < Dim; ++i)
            for (int j = 0; j < Dim; ++j)
                rhoFT(n, tc<Dim>(i, j)) = s.rho(n) * s.F(n, tc<Dim>(j, i));
    r.piola = lq_norm(div_tensor(rhoFT), q);

    const auto G = gradient(s.F);  // component tc(i,j)*Dim + l = d_l F_ij
    ScalarField<Dim> c(g);
    for (int i = 0; i < Dim; ++i)
        for (int j = 0; j < Dim; ++j)
            for (int k = j + 1; k < Dim; ++k) {
                for (std::int64_t n = 0; n < c.nodes(); ++n) {
                    double acc = 0.0;
                    for (int l = 0; l < Dim; ++l)
                        acc += s.F(n, tc<Dim>(l, k)) * G(n, tc<Dim>(i, j) * Dim + l) -
                               s.F(n, tc<Dim>(l, j)) * G(n, tc<Dim>(i, k) * Dim + l);
                    c(n) = acc;
                }
                r.curl = std::max(r.curl, lq_norm(c, q));
            }
    return r;
}

/// Linf residual of the algebraic trace constraint linking rho~ and E
/// (the expansion of (1+rho~) det(I+E) = 1).
template <int Dim>
double check_trace_constraint(const PerturbState<Dim>& s) {
    double worst = 0.0;
    for (std::int64_t n = 0; n < s.rho_tilde.nodes(); ++n) {
        const double r = s.rho_tilde(n);
        std::array<std::array<double, Dim>, Dim> E;
        double tr = 0.0;
        for (int i = 0; i < Dim; ++i) {
            for (int j = 0; j < Dim; ++j) E[i][j] = s.E(n, tc<Dim>(i, j));
            tr += E[i][i];
        }
        const double det = detail::det_from_rows<Dim>(E);
        double resid;
        if constexpr (Dim == 2) {
            resid = tr + r + r * tr + (1.0 + r) * det;
        } else {
            double trE2 = 0.0;
            for (int i = 0; i < Dim; ++i)
                for (int j = 0; j < Dim; ++j) trE2 += E[i][j] * E[j][i];
            resid = tr + r + r * tr - (1.0 + r) * (0.5 * (trE2 - tr * tr) - det);
        }
        worst = std::max(worst, std::abs(resid));
    }
    return worst;
}

/// Residual of the divergence-transpose identity that the curl condition
/// induces:  div E^T - Lap^{-1} grad(div div E) + N = 0  with the quadratic
/// correction N built from grad E. Periodic grids only.
template <int Dim>
double check_q1_identity(const PerturbState<Dim>& s, double q = 2.0) {
    const GridSpec<Dim>& g = s.grid();
    if (g.boundary != Boundary::Periodic)
        throw InvalidArgument("check_q1_identity: periodic grids only");

    const auto& E = s.E;
    const auto G = gradient(E);  // tc(i,j)*Dim + l = d_l E_ij

    TensorField<Dim> ET(g);
    for (std::int64_t n = 0; n < ET.nodes(); ++n)
        for (int i = 0; i < Dim; ++i)
            for (int j = 0; j < Dim; ++j) ET(n, tc<Dim>(i, j)) = E(n, tc<Dim>(j, i));
    VectorField<Dim> divET = div_tensor(ET);

    // Lap^{-1} grad(div div E): div div E is a double divergence, hence
    // discretely mean-zero on the torus.
    ScalarField<Dim> dd = div_vec(div_tensor(E));
    VectorField<Dim> grad_part = gradient(inv_laplacian(dd));

    // N_i = -Lap^{-1} d_k d_j (E_lj d_l E_ik - E_lk d_l E_ij
    //                          - E_lj d_l E_ki + E_li d_l E_kj)
    VectorField<Dim> N(g);
    ScalarField<Dim> qf(g), dksum(g);
    for (int i = 0; i < Dim; ++i) {
        dksum.fill(0.0);
        for (int k = 0; k < Dim; ++k) {
            ScalarField<Dim> djsum(g);
            for (int j = 0; j < Dim; ++j) {
                for (std::int64_t n = 0; n < qf.nodes(); ++n) {
                    double acc = 0.0;
                    for (int l = 0; l < Dim; ++l)
                        acc += E(n, tc<Dim>(l, j)) * G(n, tc<Dim>(i, k) * Dim + l) -
                               E(n, tc<Dim>(l, k)) * G(n, tc<Dim>(i, j) * Dim + l) -
                               E(n, tc<Dim>(l, j)) * G(n, tc<Dim>(k, i) * Dim + l) +
                               E(n, tc<Dim>(l, i)) * G(n, tc<Dim>(k, j) * Dim + l);
                    qf(n) = acc;
                }
                detail::axis_derivative<detail::Deriv::First, true>(qf, 0, j, djsum, 0);
            }
            detail::axis_derivative<detail::Deriv::First, true>(djsum, 0, k, dksum, 0);
        }
        const ScalarField<Dim> Ni = inv_laplacian(dksum);
        for (std::int64_t n = 0; n < N.nodes(); ++n) N(n, i) = -Ni(n);
    }

    VectorField<Dim> resid = divET;
    resid.add_scaled(grad_part, -1.0);
    resid.add_scaled(N, 1.0);
    return lq_norm(resid, q);
}

template <int Dim>
struct ZMonitorResult {
    VectorField<Dim> Z;   ///< u - (1/mu) L(div E)
    VectorField<Dim> Z1;  ///< L(div E)
    double consistency;   ///< relative residual of the Lame operator on Z1
};

/// The dissipative combination Z = u - (1/mu) L(div E), where L inverts the
/// Lame operator with the chosen realization.
template <int Dim>
ZMonitorResult<Dim> z_monitor(const PerturbState<Dim>& s, const MaterialParams& mp,
                              EllipticSolveOptions opts) {
    const VectorField<Dim> divE = div_tensor(s.E);
    ZMonitorResult<Dim> out{VectorField<Dim>(s.grid()), VectorField<Dim>(s.grid()), 0.0};
    const double scale = lq_norm(divE, 2.0);
    if (scale == 0.0) {
        out.Z = s.u;
        return out;
    }
    out.Z1 = lame_solve(divE, mp, opts);
    out.Z = s.u;
    out.Z.add_scaled(out.Z1, -1.0 / mp.mu);
    VectorField<Dim> back = lame_apply(out.Z1, mp, opts.realization);
    back.add_scaled(divE, -1.0);
    out.consistency = lq_norm(back, 2.0) / scale;
    return out;
}

template <int Dim>
ZMonitorResult<Dim> z_monitor(const PerturbState<Dim>& s, const MaterialParams& mp) {
    return z_monitor(s, mp, EllipticSolveOptions::defaults_for(s.grid()));
}

/// sigma_0 = grad(ln rho_0), the reference initialization of the log-density
/// gradient variable.
template <int Dim>
VectorField<Dim> sigma_init(const ScalarField<Dim>& rho) {
    ScalarField<Dim> lnrho(rho.grid());
    for (std::int64_t n = 0; n < rho.nodes(); ++n) {
        if (!(rho(n) > 0.0)) throw InvalidArgument("sigma_init: density must be positive");
        lnrho(n) = std::log(rho(n));
    }
    return gradient(lnrho);
}

/// Lq distance between the evolved sigma and grad(ln rho) of the evolved
/// density; both satisfy the same transport equation in the continuum.
template <int Dim>
double sigma_mismatch(const VectorField<Dim>& sigma, const ScalarField<Dim>& rho,
                      double q = 2.0) {
    VectorField<Dim> diff = sigma;
    diff.add_scaled(sigma_init(rho), -1.0);
    return lq_norm(diff, q);
}

}  // namespace vfl
