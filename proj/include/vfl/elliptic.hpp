#pragma once

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include "vfl/material.hpp"
#include "vfl/norms.hpp"

namespace vfl {

enum class EllipticRealization {
    Spectral,   ///< exact Fourier symbols; periodic grids only
    Iterative,  ///< preconditioned CG on the discrete stencil operator
};

struct EllipticSolveOptions {
    double tolerance = 1e-10;  ///< relative residual target
    int max_iterations = 0;    ///< 0 picks 10 * unknown count
    EllipticRealization realization = EllipticRealization::Spectral;

    void validate() const {
        if (!(tolerance > 0.0 && tolerance <= 1e-2))
            throw InvalidArgument("elliptic: tolerance must lie in (0, 1e-2]");
        if (max_iterations < 0) throw InvalidArgument("elliptic: negative iteration cap");
    }

    template <int Dim>
    static EllipticSolveOptions defaults_for(const GridSpec<Dim>& g) {
        EllipticSolveOptions o;
        o.realization = g.boundary == Boundary::Periodic ? EllipticRealization::Spectral
                                                         : EllipticRealization::Iterative;
        return o;
    }
};

namespace spectral {

/// Process-wide FFTW plan cache. Plans are created with FFTW_ESTIMATE |
/// FFTW_UNALIGNED so they can run on any buffer via fftw_execute_dft.
class PlanCache {
public:
    static fftw_plan get(const std::vector<int>& dims_slowest_first, int sign) {
        static PlanCache cache;
        std::scoped_lock lock(cache.mutex_);
        auto key = std::make_pair(dims_slowest_first, sign);
        auto it = cache.plans_.find(key);
        if (it != cache.plans_.end()) return it->second;
        std::size_t n = 1;
        for (int d : dims_slowest_first) n *= static_cast<std::size_t>(d);
        std::vector<std::complex<double>> scratch_in(n), scratch_out(n);
        fftw_plan p = fftw_plan_dft(
            static_cast<int>(dims_slowest_first.size()), dims_slowest_first.data(),
            reinterpret_cast<fftw_complex*>(scratch_in.data()),
            reinterpret_cast<fftw_complex*>(scratch_out.data()), sign,
            FFTW_ESTIMATE | FFTW_UNALIGNED);
        cache.plans_.emplace(std::move(key), p);
        return p;
    }

private:
    PlanCache() = default;
    std::mutex mutex_;
    std::map<std::pair<std::vector<int>, int>, fftw_plan> plans_;
};

template <int Dim>
std::vector<int> fftw_dims(const GridSpec<Dim>& g) {
    std::vector<int> dims(Dim);
    for (int a = 0; a < Dim; ++a) dims[a] = g.nodes(Dim - 1 - a);  // slowest first
    return dims;
}

template <int Dim>
void require_periodic(const GridSpec<Dim>& g, const char* op) {
    if (g.boundary != Boundary::Periodic)
        throw InvalidArgument(std::string(op) + ": spectral realization requires a periodic grid");
}

/// Integer-mode wavenumbers xi_a = 2 pi m~ / L_a, m~ in [-n/2, n/2).
template <int Dim>
std::array<std::vector<double>, Dim> wavenumbers(const GridSpec<Dim>& g) {
    std::array<std::vector<double>, Dim> xi;
    for (int a = 0; a < Dim; ++a) {
        const int n = g.nodes(a);
        xi[a].resize(n);
        for (int m = 0; m < n; ++m) {
            const int mm = m <= n / 2 ? m : m - n;
            xi[a][m] = 2.0 * M_PI * mm / g.lengths[a];
        }
    }
    return xi;
}

using Cvec = std::vector<std::complex<double>>;

template <int Dim, int NC>
std::vector<Cvec> forward(const Field<Dim, NC>& f) {
    const auto dims = fftw_dims(f.grid());
    fftw_plan plan = PlanCache::get(dims, FFTW_FORWARD);
    const std::int64_t n = f.nodes();
    std::vector<Cvec> hat(NC, Cvec(static_cast<std::size_t>(n)));
    Cvec in(static_cast<std::size_t>(n));
    for (int c = 0; c < NC; ++c) {
        for (std::int64_t k = 0; k < n; ++k) in[static_cast<std::size_t>(k)] = f(k, c);
        fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                         reinterpret_cast<fftw_complex*>(hat[static_cast<std::size_t>(c)].data()));
    }
    return hat;
}

template <int Dim, int NC>
void backward(std::vector<Cvec>& hat, Field<Dim, NC>& out) {
    const auto dims = fftw_dims(out.grid());
    fftw_plan plan = PlanCache::get(dims, FFTW_BACKWARD);
    const std::int64_t n = out.nodes();
    const double norm = 1.0 / static_cast<double>(n);
    Cvec back(static_cast<std::size_t>(n));
    for (int c = 0; c < NC; ++c) {
        fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(hat[static_cast<std::size_t>(c)].data()),
                         reinterpret_cast<fftw_complex*>(back.data()));
        for (std::int64_t k = 0; k < n; ++k)
            out(k, c) = back[static_cast<std::size_t>(k)].real() * norm;
    }
}

/// Visit every Fourier mode: f(xi, |xi|^2, flat mode index).
template <int Dim, typename F>
void for_each_mode(const GridSpec<Dim>& g, F&& f) {
    const auto xi = wavenumbers(g);
    for_each_node(g, [&](const std::array<int, Dim>& m, std::int64_t k) {
        std::array<double, Dim> x;
        double k2 = 0.0;
        for (int a = 0; a < Dim; ++a) {
            x[a] = xi[a][m[a]];
            k2 += x[a] * x[a];
        }
        f(x, k2, static_cast<std::size_t>(k));
    });
}

}  // namespace spectral

namespace detail {

/// Preconditioned conjugate gradients on flat vectors. `apply` must be
/// symmetric positive definite on the subspace the caller works in.
struct CgOutcome {
    int iterations = 0;
    double relative_residual = 0.0;
    std::vector<double> history;
};

template <typename Apply, typename Precond>
CgOutcome pcg(Apply&& apply, Precond&& precond, const std::vector<double>& b,
              std::vector<double>& x, double tol, int max_iter, const char* what) {
    const std::size_t n = b.size();
    std::vector<double> r(b), z(n), p(n), ap(n);
    x.assign(n, 0.0);
    auto dot = [](const std::vector<double>& a, const std::vector<double>& c) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * c[i];
        return s;
    };
    const double bnorm = std::sqrt(dot(b, b));
    CgOutcome out;
    if (bnorm == 0.0) return out;
    precond(r, z);
    p = z;
    double rz = dot(r, z);
    for (int it = 0; it < max_iter; ++it) {
        apply(p, ap);
        const double alpha = rz / dot(p, ap);
        for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
        for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * ap[i];
        const double res = std::sqrt(dot(r, r)) / bnorm;
        out.history.push_back(res);
        out.iterations = it + 1;
        out.relative_residual = res;
        if (res <= tol) return out;
        precond(r, z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw SolveError(std::string(what) + ": no convergence after " +
                         std::to_string(out.iterations) + " iterations, residual " +
                         std::to_string(out.relative_residual),
                     std::move(out.history));
}

/// Zero all components at no-slip boundary nodes (no-op on periodic grids).
template <int Dim, int NC>
void zero_boundary(Field<Dim, NC>& f) {
    if (f.grid().boundary == Boundary::Periodic) return;
    for_each_node(f.grid(), [&](const std::array<int, Dim>& idx, std::int64_t n) {
        if (f.grid().on_boundary(idx))
            for (int c = 0; c < NC; ++c) f(n, c) = 0.0;
    });
}

template <int Dim, int NC>
void subtract_component_means(Field<Dim, NC>& f) {
    for (int c = 0; c < NC; ++c) {
        const double m = node_mean(f, c);
        for (std::int64_t k = 0; k < f.nodes(); ++k) f(k, c) -= m;
    }
}

/// Discrete Lame-type operator  alpha I - beta_mu Lap - beta_l grad div
/// built from compact symmetric stencils: 3-point second differences on the
/// diagonal and 4-corner mixed second differences off it. Boundary rows are
/// identity on a no-slip box (Dirichlet).
template <int Dim>
class StencilHelmholtz {
public:
    StencilHelmholtz(const GridSpec<Dim>& g, double alpha, double beta_mu, double beta_l)
        : grid_(g), alpha_(alpha), bmu_(beta_mu), bl_(beta_l) {
        stride_[0] = 1;
        for (int a = 1; a < Dim; ++a) stride_[a] = stride_[a - 1] * g.nodes(a - 1);
        for (int a = 0; a < Dim; ++a) {
            n_[a] = g.nodes(a);
            invh2_[a] = 1.0 / (g.spacing(a) * g.spacing(a));
            inv2h_[a] = 1.0 / (2.0 * g.spacing(a));
        }
        periodic_ = g.boundary == Boundary::Periodic;
    }

    /// y = A x on the flat (node, component) layout of VectorField.
    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        const GridSpec<Dim>& g = grid_;
        for_each_node(g, [&](const std::array<int, Dim>& idx, std::int64_t node) {
            const std::size_t base = static_cast<std::size_t>(node) * Dim;
            if (!periodic_ && g.on_boundary(idx)) {
                for (int c = 0; c < Dim; ++c) y[base + c] = x[base + c];
                return;
            }
            for (int i = 0; i < Dim; ++i) {
                double acc = alpha_ * x[base + i];
                // -bmu * Laplacian x_i
                for (int a = 0; a < Dim; ++a) {
                    const double xp = x[neighbor(node, idx, a, +1) * Dim + i];
                    const double xm = x[neighbor(node, idx, a, -1) * Dim + i];
                    acc -= bmu_ * (xp - 2.0 * x[base + i] + xm) * invh2_[a];
                }
                // -bl * (grad div x)_i
                for (int j = 0; j < Dim; ++j) {
                    if (i == j) {
                        const double xp = x[neighbor(node, idx, i, +1) * Dim + j];
                        const double xm = x[neighbor(node, idx, i, -1) * Dim + j];
                        acc -= bl_ * (xp - 2.0 * x[base + j] + xm) * invh2_[i];
                    } else {
                        const double xpp = x[corner(node, idx, i, +1, j, +1) * Dim + j];
                        const double xpm = x[corner(node, idx, i, +1, j, -1) * Dim + j];
                        const double xmp = x[corner(node, idx, i, -1, j, +1) * Dim + j];
                        const double xmm = x[corner(node, idx, i, -1, j, -1) * Dim + j];
                        acc -= bl_ * (xpp - xpm - xmp + xmm) * inv2h_[i] * inv2h_[j];
                    }
                }
                y[base + i] = acc;
            }
        });
    }

    std::vector<double> diagonal() const {
        std::vector<double> d(static_cast<std::size_t>(grid_.node_count()) * Dim);
        double interior = alpha_;
        for (int a = 0; a < Dim; ++a) interior += bmu_ * 2.0 * invh2_[a];
        for_each_node(grid_, [&](const std::array<int, Dim>& idx, std::int64_t node) {
            const bool bdry = !periodic_ && grid_.on_boundary(idx);
            for (int i = 0; i < Dim; ++i)
                d[static_cast<std::size_t>(node) * Dim + i] =
                    bdry ? 1.0 : interior + bl_ * 2.0 * invh2_[i];
        });
        return d;
    }

private:
    std::int64_t wrap(int i, int a) const {
        if (i < 0) return i + n_[a];
        if (i >= n_[a]) return i - n_[a];
        return i;
    }

    std::int64_t neighbor(std::int64_t node, const std::array<int, Dim>& idx, int a,
                          int step) const {
        const int i = idx[a] + step;
        if (periodic_) return node + (wrap(i, a) - idx[a]) * stride_[a];
        return node + step * stride_[a];  // Dirichlet rows never reach outside
    }

    std::int64_t corner(std::int64_t node, const std::array<int, Dim>& idx, int a, int sa,
                        int b, int sb) const {
        return neighbor(neighbor(node, idx, a, sa), shifted(idx, a, sa), b, sb);
    }

    std::array<int, Dim> shifted(std::array<int, Dim> idx, int a, int step) const {
        idx[a] = periodic_ ? static_cast<int>(wrap(idx[a] + step, a)) : idx[a] + step;
        return idx;
    }

    GridSpec<Dim> grid_;
    double alpha_, bmu_, bl_;
    std::array<std::int64_t, Dim> stride_{};
    std::array<int, Dim> n_{};
    std::array<double, Dim> invh2_{}, inv2h_{};
    bool periodic_ = false;
};

template <int Dim>
VectorField<Dim> helmholtz_cg_solve(const StencilHelmholtz<Dim>& op, const VectorField<Dim>& f,
                                    const EllipticSolveOptions& opts, bool project_mean,
                                    const char* what) {
    const GridSpec<Dim>& g = f.grid();
    VectorField<Dim> bf = f;
    if (g.boundary == Boundary::NoSlipBox) {
        zero_boundary(bf);
    } else if (project_mean) {
        subtract_component_means(bf);
    }
    std::vector<double> b(bf.data().begin(), bf.data().end());
    const auto diag = op.diagonal();
    const int max_iter = opts.max_iterations > 0
                             ? opts.max_iterations
                             : static_cast<int>(10 * g.node_count());
    std::vector<double> x;
    pcg([&](const std::vector<double>& p, std::vector<double>& ap) { op.apply(p, ap); },
        [&](const std::vector<double>& r, std::vector<double>& z) {
            for (std::size_t i = 0; i < r.size(); ++i) z[i] = r[i] / diag[i];
        },
        b, x, opts.tolerance, max_iter, what);
    VectorField<Dim> out(g);
    std::copy(x.begin(), x.end(), out.data().begin());
    if (g.boundary == Boundary::Periodic && project_mean) subtract_component_means(out);
    return out;
}

template <int Dim>
void require_mean_zero(const ScalarField<Dim>& f, const char* what) {
    const double mean = integrate(f) / f.grid().volume();
    if (std::abs(mean) > 1e-10 * lq_norm(f, 2.0) + 1e-300)
        throw InvalidArgument(std::string(what) +
                              ": periodic solvability needs a mean-zero right-hand side "
                              "(mean = " + std::to_string(mean) + ")");
}

template <int Dim>
void require_component_mean_zero(const VectorField<Dim>& f, const char* what) {
    const double scale = lq_norm(f, 2.0);
    for (int c = 0; c < Dim; ++c) {
        ScalarField<Dim> comp(f.grid());
        for (std::int64_t k = 0; k < f.nodes(); ++k) comp(k) = f(k, c);
        const double mean = integrate(comp) / f.grid().volume();
        if (std::abs(mean) > 1e-10 * scale + 1e-300)
            throw InvalidArgument(std::string(what) +
                                  ": periodic solvability needs component-wise mean-zero data");
    }
}

}  // namespace detail

/// Solve Lap g = f. Periodic grids require mean-zero f and return the
/// mean-zero solution; no-slip boxes impose homogeneous Dirichlet data.
template <int Dim>
ScalarField<Dim> inv_laplacian(const ScalarField<Dim>& f, EllipticSolveOptions opts) {
    opts.validate();
    const GridSpec<Dim>& g = f.grid();
    if (g.boundary == Boundary::Periodic) detail::require_mean_zero(f, "inv_laplacian");
    if (opts.realization == EllipticRealization::Spectral) {
        spectral::require_periodic(g, "inv_laplacian");
        auto hat = spectral::forward(f);
        spectral::for_each_mode(g, [&](const auto&, double k2, std::size_t k) {
            hat[0][k] = k2 == 0.0 ? 0.0 : hat[0][k] / (-k2);
        });
        ScalarField<Dim> out(g);
        spectral::backward(hat, out);
        out.require_finite("inv_laplacian");
        return out;
    }
    // CG on -Lap (SPD with Dirichlet rows / on the mean-zero subspace).
    VectorField<Dim> fv(g);
    for (std::int64_t k = 0; k < f.nodes(); ++k) fv(k, 0) = -f(k);
    detail::StencilHelmholtz<Dim> op(g, 0.0, 1.0, 0.0);
    // Only component 0 carries data; the Helmholtz operator acts component-wise
    // when beta_l = 0, so the solve decouples.
    VectorField<Dim> sol = detail::helmholtz_cg_solve(op, fv, opts, true, "inv_laplacian");
    ScalarField<Dim> out(g);
    for (std::int64_t k = 0; k < f.nodes(); ++k) out(k) = sol(k, 0);
    out.require_finite("inv_laplacian");
    return out;
}

template <int Dim>
ScalarField<Dim> inv_laplacian(const ScalarField<Dim>& f) {
    return inv_laplacian(f, EllipticSolveOptions::defaults_for(f.grid()));
}

/// Exact-symbol Laplacian, the inverse of the spectral inv_laplacian.
template <int Dim>
ScalarField<Dim> laplacian_spectral(const ScalarField<Dim>& f) {
    spectral::require_periodic(f.grid(), "laplacian_spectral");
    auto hat = spectral::forward(f);
    spectral::for_each_mode(f.grid(), [&](const auto&, double k2, std::size_t k) { hat[0][k] *= -k2; });
    ScalarField<Dim> out(f.grid());
    spectral::backward(hat, out);
    return out;
}

/// Riesz operator R_ij = Lap^{-1} d_i d_j (Fourier symbol xi_i xi_j / |xi|^2,
/// mean mode annihilated). Periodic grids only.
template <int Dim>
ScalarField<Dim> riesz(int i, int j, const ScalarField<Dim>& f) {
    if (i < 0 || i >= Dim || j < 0 || j >= Dim)
        throw InvalidArgument("riesz: axis out of range");
    spectral::require_periodic(f.grid(), "riesz");
    auto hat = spectral::forward(f);
    spectral::for_each_mode(f.grid(), [&](const auto& xi, double k2, std::size_t k) {
        hat[0][k] = k2 == 0.0 ? 0.0 : hat[0][k] * (xi[i] * xi[j] / k2);
    });
    ScalarField<Dim> out(f.grid());
    spectral::backward(hat, out);
    out.require_finite("riesz");
    return out;
}

/// Solve  -mu Lap w - (mu+lambda) grad div w = f  with w = 0 on the boundary
/// of a no-slip box, or mean-zero w on the torus (f must then be
/// component-wise mean-zero).
template <int Dim>
VectorField<Dim> lame_solve(const VectorField<Dim>& f, const MaterialParams& mp,
                            EllipticSolveOptions opts) {
    opts.validate();
    mp.validate(Dim);
    const GridSpec<Dim>& g = f.grid();
    if (g.boundary == Boundary::Periodic) detail::require_component_mean_zero(f, "lame_solve");
    if (opts.realization == EllipticRealization::Spectral) {
        spectral::require_periodic(g, "lame_solve");
        auto hat = spectral::forward(f);
        const double mu = mp.mu, two_mu_l = 2.0 * mp.mu + mp.lambda;
        spectral::for_each_mode(g, [&](const auto& xi, double k2, std::size_t k) {
            if (k2 == 0.0) {
                for (int c = 0; c < Dim; ++c) hat[c][k] = 0.0;
                return;
            }
            std::complex<double> xdotf = 0.0;
            for (int c = 0; c < Dim; ++c) xdotf += xi[c] * hat[c][k];
            const std::complex<double> par = xdotf / k2;
            for (int c = 0; c < Dim; ++c) {
                const std::complex<double> fpar = xi[c] * par;
                hat[c][k] = (hat[c][k] - fpar) / (mu * k2) + fpar / (two_mu_l * k2);
            }
        });
        VectorField<Dim> out(g);
        spectral::backward(hat, out);
        out.require_finite("lame_solve");
        return out;
    }
    detail::StencilHelmholtz<Dim> op(g, 0.0, mp.mu, mp.mu + mp.lambda);
    auto out = detail::helmholtz_cg_solve(op, f, opts, true, "lame_solve");
    out.require_finite("lame_solve");
    return out;
}

template <int Dim>
VectorField<Dim> lame_solve(const VectorField<Dim>& f, const MaterialParams& mp) {
    return lame_solve(f, mp, EllipticSolveOptions::defaults_for(f.grid()));
}

/// Apply the Lame operator consistently with the chosen realization, for
/// residual checks against lame_solve.
template <int Dim>
VectorField<Dim> lame_apply(const VectorField<Dim>& w, const MaterialParams& mp,
                            EllipticRealization realization) {
    const GridSpec<Dim>& g = w.grid();
    if (realization == EllipticRealization::Spectral) {
        spectral::require_periodic(g, "lame_apply");
        auto hat = spectral::forward(w);
        const double mu = mp.mu, mul = mp.mu + mp.lambda;
        spectral::for_each_mode(g, [&](const auto& xi, double k2, std::size_t k) {
            std::complex<double> xdotw = 0.0;
            for (int c = 0; c < Dim; ++c) xdotw += xi[c] * hat[c][k];
            for (int c = 0; c < Dim; ++c) hat[c][k] = mu * k2 * hat[c][k] + mul * xi[c] * xdotw;
        });
        VectorField<Dim> out(g);
        spectral::backward(hat, out);
        return out;
    }
    detail::StencilHelmholtz<Dim> op(g, 0.0, mp.mu, mp.mu + mp.lambda);
    std::vector<double> x(w.data().begin(), w.data().end()), y(x.size());
    op.apply(x, y);
    VectorField<Dim> out(g);
    std::copy(y.begin(), y.end(), out.data().begin());
    return out;
}

/// Solve (I - dt (mu Lap + (mu+lambda) grad div)) w = rhs, the implicit
/// viscous step of the IMEX integrator.
template <int Dim>
VectorField<Dim> imex_viscous_solve(const VectorField<Dim>& rhs, double dt,
                                    const MaterialParams& mp, EllipticSolveOptions opts) {
    opts.validate();
    mp.validate(Dim);
    if (!(dt > 0.0)) throw InvalidArgument("imex_viscous_solve: dt must be positive");
    const GridSpec<Dim>& g = rhs.grid();
    if (opts.realization == EllipticRealization::Spectral) {
        spectral::require_periodic(g, "imex_viscous_solve");
        auto hat = spectral::forward(rhs);
        const double mu = mp.mu, two_mu_l = 2.0 * mp.mu + mp.lambda;
        spectral::for_each_mode(g, [&](const auto& xi, double k2, std::size_t k) {
            std::complex<double> xdotf = 0.0;
            for (int c = 0; c < Dim; ++c) xdotf += xi[c] * hat[c][k];
            const std::complex<double> par = k2 == 0.0 ? 0.0 : xdotf / k2;
            for (int c = 0; c < Dim; ++c) {
                const std::complex<double> fpar = k2 == 0.0 ? 0.0 : xi[c] * par;
                hat[c][k] = (hat[c][k] - fpar) / (1.0 + dt * mu * k2) +
                            fpar / (1.0 + dt * two_mu_l * k2);
            }
        });
        VectorField<Dim> out(g);
        spectral::backward(hat, out);
        out.require_finite("imex_viscous_solve");
        return out;
    }
    detail::StencilHelmholtz<Dim> op(g, 1.0, dt * mp.mu, dt * (mp.mu + mp.lambda));
    auto out = detail::helmholtz_cg_solve(op, rhs, opts, false, "imex_viscous_solve");
    out.require_finite("imex_viscous_solve");
    return out;
}

template <int Dim>
VectorField<Dim> imex_viscous_solve(const VectorField<Dim>& rhs, double dt,
                                    const MaterialParams& mp) {
    return imex_viscous_solve(rhs, dt, mp, EllipticSolveOptions::defaults_for(rhs.grid()));
}

}  // namespace vfl
