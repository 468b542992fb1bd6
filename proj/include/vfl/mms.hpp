#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "vfl/simulate.hpp"

namespace vfl {

/// One factor of a separable term: 1, sin(f s + p), or cos(f s + p).
struct TrigFactor {
    enum Kind { One, Sin, Cos } kind = One;
    double freq = 0.0;
    double phase = 0.0;

    static TrigFactor one() { return {}; }
    static TrigFactor sin(double f, double p = 0.0) { return {Sin, f, p}; }
    static TrigFactor cos(double f, double p = 0.0) { return {Cos, f, p}; }

    double value(double s) const {
        switch (kind) {
            case One: return 1.0;
            case Sin: return std::sin(freq * s + phase);
            default: return std::cos(freq * s + phase);
        }
    }
    double d1(double s) const {
        switch (kind) {
            case One: return 0.0;
            case Sin: return freq * std::cos(freq * s + phase);
            default: return -freq * std::sin(freq * s + phase);
        }
    }
    double d2(double s) const {
        switch (kind) {
            case One: return 0.0;
            case Sin: return -freq * freq * std::sin(freq * s + phase);
            default: return -freq * freq * std::cos(freq * s + phase);
        }
    }
};

/// amp * prod_a space[a](x_a) * time(t); sums of these make up every
/// manufactured field, so all space-time partials are mechanical products.
template <int Dim>
struct SeparableTerm {
    double amp = 0.0;
    std::array<TrigFactor, Dim> space{};
    TrigFactor time{};
};

template <int Dim>
class AnalyticField {
public:
    AnalyticField() = default;

    AnalyticField& add(SeparableTerm<Dim> t) {
        terms_.push_back(t);
        return *this;
    }

    AnalyticField& add_constant(double c) {
        SeparableTerm<Dim> t;
        t.amp = c;
        return add(t);
    }

    const std::vector<SeparableTerm<Dim>>& terms() const { return terms_; }

    double value(const std::array<double, Dim>& x, double t) const {
        double acc = 0.0;
        for (const auto& term : terms_) {
            double v = term.amp * term.time.value(t);
            for (int a = 0; a < Dim; ++a) v *= term.space[a].value(x[a]);
            acc += v;
        }
        return acc;
    }

    double dt(const std::array<double, Dim>& x, double t) const {
        double acc = 0.0;
        for (const auto& term : terms_) {
            double v = term.amp * term.time.d1(t);
            for (int a = 0; a < Dim; ++a) v *= term.space[a].value(x[a]);
            acc += v;
        }
        return acc;
    }

    double dx(int axis, const std::array<double, Dim>& x, double t) const {
        double acc = 0.0;
        for (const auto& term : terms_) {
            double v = term.amp * term.time.value(t);
            for (int a = 0; a < Dim; ++a)
                v *= a == axis ? term.space[a].d1(x[a]) : term.space[a].value(x[a]);
            acc += v;
        }
        return acc;
    }

    /// Mixed or repeated second space derivative d_a d_b.
    double dxdx(int a, int b, const std::array<double, Dim>& x, double t) const {
        double acc = 0.0;
        for (const auto& term : terms_) {
            double v = term.amp * term.time.value(t);
            for (int c = 0; c < Dim; ++c) {
                if (c == a && c == b) v *= term.space[c].d2(x[c]);
                else if (c == a || c == b) v *= term.space[c].d1(x[c]);
                else v *= term.space[c].value(x[c]);
            }
            acc += v;
        }
        return acc;
    }

private:
    std::vector<SeparableTerm<Dim>> terms_;
};

/// Closed-form space-time solution with analytically derived forcing.
template <int Dim>
struct ManufacturedCase {
    std::string name;
    AnalyticField<Dim> rho;
    std::array<AnalyticField<Dim>, Dim> u;
    std::array<AnalyticField<Dim>, Dim * Dim> F;
    double rho_min = 0.5;        ///< certified lower bound of rho*
    bool periodic_ok = true;     ///< usable on periodic grids
    bool noslip_ok = false;      ///< u* vanishes on the box faces

    std::array<double, Dim> velocity(const std::array<double, Dim>& x, double t) const {
        std::array<double, Dim> v;
        for (int c = 0; c < Dim; ++c) v[c] = u[c].value(x, t);
        return v;
    }

    /// Exact state sampled on a grid at time t.
    FlowState<Dim> sample(const GridSpec<Dim>& g, double t) const {
        FlowState<Dim> s(g);
        s.t = t;
        for_each_node(g, [&](const std::array<int, Dim>& idx, std::int64_t n) {
            const auto x = g.point(idx);
            s.rho(n) = rho.value(x, t);
            for (int c = 0; c < Dim; ++c) s.u(n, c) = u[c].value(x, t);
            for (int c = 0; c < Dim * Dim; ++c) s.F(n, c) = F[c].value(x, t);
        });
        return s;
    }
};

/// Analytic residual of the governing equations at (rho*, u*, F*):
/// adding these forcings makes the manufactured state an exact solution.
template <int Dim>
struct MmsForcingPoint {
    double g_rho;
    std::array<double, Dim> g_u;
    std::array<double, Dim * Dim> g_F;
};

template <int Dim>
MmsForcingPoint<Dim> mms_forcing(const ManufacturedCase<Dim>& c, const MaterialParams& mp,
                                 const std::array<double, Dim>& x, double t) {
    MmsForcingPoint<Dim> out{};

    const double rho = c.rho.value(x, t);
    std::array<double, Dim> u, drho;
    std::array<std::array<double, Dim>, Dim> Du;  // Du[i][k] = d_k u_i
    for (int a = 0; a < Dim; ++a) {
        u[a] = c.u[a].value(x, t);
        drho[a] = c.rho.dx(a, x, t);
    }
    for (int i = 0; i < Dim; ++i)
        for (int k = 0; k < Dim; ++k) Du[i][k] = c.u[i].dx(k, x, t);

    // continuity: g_rho = rho_t + div(rho u)
    out.g_rho = c.rho.dt(x, t);
    for (int a = 0; a < Dim; ++a) out.g_rho += drho[a] * u[a] + rho * Du[a][a];

    // momentum (velocity form):
    // g_u = u_t + (u.grad)u - [mu Lap u + (mu+lambda) grad div u
    //                          - grad P + div(rho F F^T)] / rho
    for (int i = 0; i < Dim; ++i) {
        double g = c.u[i].dt(x, t);
        for (int k = 0; k < Dim; ++k) g += u[k] * Du[i][k];
        double lap = 0.0, gdiv = 0.0;
        for (int a = 0; a < Dim; ++a) lap += c.u[i].dxdx(a, a, x, t);
        for (int j = 0; j < Dim; ++j) gdiv += c.u[j].dxdx(i, j, x, t);
        double divT = 0.0;
        for (int j = 0; j < Dim; ++j) {
            double FF = 0.0, dFF = 0.0;
            for (int k = 0; k < Dim; ++k) {
                const double Fik = c.F[tc<Dim>(i, k)].value(x, t);
                const double Fjk = c.F[tc<Dim>(j, k)].value(x, t);
                FF += Fik * Fjk;
                dFF += c.F[tc<Dim>(i, k)].dx(j, x, t) * Fjk +
                       Fik * c.F[tc<Dim>(j, k)].dx(j, x, t);
            }
            divT += drho[j] * FF + rho * dFF;
        }
        const double dP = mp.pressure_slope(rho) * drho[i];
        g -= (mp.mu * lap + (mp.mu + mp.lambda) * gdiv - dP + divT) / rho;
        out.g_u[i] = g;
    }

    // deformation: g_F = F_t + (u.grad)F - (grad u) F
    for (int i = 0; i < Dim; ++i)
        for (int j = 0; j < Dim; ++j) {
            const int cidx = tc<Dim>(i, j);
            double g = c.F[cidx].dt(x, t);
            for (int k = 0; k < Dim; ++k) g += u[k] * c.F[cidx].dx(k, x, t);
            for (int k = 0; k < Dim; ++k) g -= Du[i][k] * c.F[tc<Dim>(k, j)].value(x, t);
            out.g_F[cidx] = g;
        }
    return out;
}

namespace detail {

/// Per-grid cache of the separable factors at node coordinates, so a forcing
/// evaluation is a handful of flops per term instead of trig calls.
template <int Dim>
class SampledAnalyticField {
public:
    SampledAnalyticField() = default;

    SampledAnalyticField(const AnalyticField<Dim>& f, const GridSpec<Dim>& g) {
        for (const auto& term : f.terms()) {
            CachedTerm ct;
            ct.amp = term.amp;
            ct.time = term.time;
            for (int a = 0; a < Dim; ++a) {
                const int n = g.nodes(a);
                ct.v[a].resize(n);
                ct.d1[a].resize(n);
                ct.d2[a].resize(n);
                for (int i = 0; i < n; ++i) {
                    const double s = g.coord(a, i);
                    ct.v[a][i] = term.space[a].value(s);
                    ct.d1[a][i] = term.space[a].d1(s);
                    ct.d2[a][i] = term.space[a].d2(s);
                }
            }
            terms_.push_back(std::move(ct));
        }
    }

    double value(const std::array<int, Dim>& idx, double t) const {
        return eval_at(idx, t, -1, -1, false);
    }
    double dt(const std::array<int, Dim>& idx, double t) const {
        return eval_at(idx, t, -1, -1, true);
    }
    double dx(int a, const std::array<int, Dim>& idx, double t) const {
        return eval_at(idx, t, a, -1, false);
    }
    double dxdx(int a, int b, const std::array<int, Dim>& idx, double t) const {
        return eval_at(idx, t, a, b, false);
    }

private:
    struct CachedTerm {
        double amp;
        TrigFactor time;
        std::array<std::vector<double>, Dim> v, d1, d2;
    };

    double eval_at(const std::array<int, Dim>& idx, double t, int da, int db,
                   bool time_deriv) const {
        double acc = 0.0;
        for (const auto& term : terms_) {
            double p = term.amp * (time_deriv ? term.time.d1(t) : term.time.value(t));
            for (int a = 0; a < Dim; ++a) {
                const int i = idx[a];
                if (a == da && a == db) p *= term.d2[a][i];
                else if (a == da || a == db) p *= term.d1[a][i];
                else p *= term.v[a][i];
            }
            acc += p;
        }
        return acc;
    }

    std::vector<CachedTerm> terms_;
};

}  // namespace detail

/// Forcing adapter that adds the analytic residual of a manufactured case to
/// assembled right-hand sides, with per-grid factor caching.
template <int Dim>
class MmsForcing : public Forcing<Dim> {
public:
    MmsForcing(const ManufacturedCase<Dim>& c, const MaterialParams& mp, const GridSpec<Dim>& g)
        : mp_(mp), grid_(g), rho_(c.rho, g) {
        for (int a = 0; a < Dim; ++a) u_[a] = {c.u[a], g};
        for (int cc = 0; cc < Dim * Dim; ++cc) F_[cc] = {c.F[cc], g};
    }

    void add(double t, ScalarField<Dim>& g_rho, VectorField<Dim>& g_u,
             TensorField<Dim>& g_F) const override {
        const double mu = mp_.mu, mul = mp_.mu + mp_.lambda;
        for_each_node(grid_, [&](const std::array<int, Dim>& idx, std::int64_t n) {
            const double rho = rho_.value(idx, t);
            double u[Dim], drho[Dim], Du[Dim][Dim];
            for (int a = 0; a < Dim; ++a) {
                u[a] = u_[a].value(idx, t);
                drho[a] = rho_.dx(a, idx, t);
            }
            for (int i = 0; i < Dim; ++i)
                for (int k = 0; k < Dim; ++k) Du[i][k] = u_[i].dx(k, idx, t);

            double gr = rho_.dt(idx, t);
            for (int a = 0; a < Dim; ++a) gr += drho[a] * u[a] + rho * Du[a][a];
            g_rho(n) += gr;

            for (int i = 0; i < Dim; ++i) {
                double g = u_[i].dt(idx, t);
                for (int k = 0; k < Dim; ++k) g += u[k] * Du[i][k];
                double lap = 0.0, gdiv = 0.0;
                for (int a = 0; a < Dim; ++a) lap += u_[i].dxdx(a, a, idx, t);
                for (int j = 0; j < Dim; ++j) gdiv += u_[j].dxdx(i, j, idx, t);
                double divT = 0.0;
                for (int j = 0; j < Dim; ++j) {
                    double FF = 0.0, dFF = 0.0;
                    for (int k = 0; k < Dim; ++k) {
                        const double Fik = F_[tc<Dim>(i, k)].value(idx, t);
                        const double Fjk = F_[tc<Dim>(j, k)].value(idx, t);
                        FF += Fik * Fjk;
                        dFF += F_[tc<Dim>(i, k)].dx(j, idx, t) * Fjk +
                               Fik * F_[tc<Dim>(j, k)].dx(j, idx, t);
                    }
                    divT += drho[j] * FF + rho * dFF;
                }
                const double dP = mp_.pressure_slope(rho) * drho[i];
                g -= (mu * lap + mul * gdiv - dP + divT) / rho;
                g_u(n, i) += g;
            }

            for (int i = 0; i < Dim; ++i)
                for (int j = 0; j < Dim; ++j) {
                    const int c = tc<Dim>(i, j);
                    double g = F_[c].dt(idx, t);
                    for (int k = 0; k < Dim; ++k) g += u[k] * F_[c].dx(k, idx, t);
                    for (int k = 0; k < Dim; ++k)
                        g -= Du[i][k] * F_[tc<Dim>(k, j)].value(idx, t);
                    g_F(n, c) += g;
                }
        });
    }

private:
    MaterialParams mp_;
    GridSpec<Dim> grid_;
    detail::SampledAnalyticField<Dim> rho_;
    std::array<detail::SampledAnalyticField<Dim>, Dim> u_;
    std::array<detail::SampledAnalyticField<Dim>, Dim * Dim> F_;
};

/// Registry of the built-in cases.
template <int Dim>
ManufacturedCase<Dim> make_manufactured_case(const std::string& name);

template <>
inline ManufacturedCase<2> make_manufactured_case<2>(const std::string& name) {
    using T = SeparableTerm<2>;
    constexpr double w = 2.0 * M_PI;  // unit box
    ManufacturedCase<2> c;
    c.name = name;
    if (name == "equilibrium") {
        c.rho.add_constant(1.0);
        c.F[0].add_constant(1.0);
        c.F[3].add_constant(1.0);
        c.rho_min = 1.0;
        c.noslip_ok = true;
        return c;
    }
    if (name == "trig2d") {
        c.rho.add_constant(1.0);
        c.rho.add(T{0.10, {TrigFactor::cos(w, 0.3), TrigFactor::cos(w, 0.7)},
                    TrigFactor::cos(1.0)});
        c.u[0].add(T{0.08, {TrigFactor::sin(w, 1.1), TrigFactor::cos(w, 0.2)},
                     TrigFactor::cos(0.7)});
        c.u[1].add(T{0.07, {TrigFactor::cos(w, 0.4), TrigFactor::sin(w, 1.9)},
                     TrigFactor::cos(1.3, 0.5)});
        c.F[tc<2>(0, 0)].add_constant(1.0);
        c.F[tc<2>(0, 0)].add(T{0.06, {TrigFactor::sin(w, 0.9), TrigFactor::sin(w, 0.1)},
                               TrigFactor::cos(0.9)});
        c.F[tc<2>(0, 1)].add(T{0.05, {TrigFactor::cos(w, 1.7), TrigFactor::sin(w, 0.8)},
                               TrigFactor::cos(1.1, 0.3)});
        c.F[tc<2>(1, 0)].add(T{0.05, {TrigFactor::sin(w, 0.2), TrigFactor::cos(w, 1.3)},
                               TrigFactor::cos(0.8, 1.0)});
        c.F[tc<2>(1, 1)].add_constant(1.0);
        c.F[tc<2>(1, 1)].add(T{0.06, {TrigFactor::cos(w, 0.6), TrigFactor::cos(w, 1.5)},
                               TrigFactor::cos(1.2, 0.4)});
        c.rho_min = 0.9;
        return c;
    }
    if (name == "steady_shear2d") {
        // steady: F carries a single sheared entry, u = 0
        c.rho.add_constant(1.0);
        c.u[0] = {};
        c.F[tc<2>(0, 0)].add_constant(1.0);
        c.F[tc<2>(0, 0)].add(T{0.1, {TrigFactor::sin(w), TrigFactor::one()}, TrigFactor::one()});
        c.F[tc<2>(1, 1)].add_constant(1.0);
        c.rho_min = 1.0;
        return c;
    }
    if (name == "box2d") {
        constexpr double wp = M_PI;  // half-wave products vanish on the faces
        c.rho.add_constant(1.0);
        c.rho.add(T{0.08, {TrigFactor::cos(wp, 0.2), TrigFactor::cos(wp, 0.4)},
                    TrigFactor::cos(0.9)});
        c.u[0].add(T{0.06, {TrigFactor::sin(wp), TrigFactor::sin(wp)}, TrigFactor::cos(0.8)});
        c.u[1].add(T{0.05, {TrigFactor::sin(2.0 * wp), TrigFactor::sin(wp)},
                     TrigFactor::cos(1.1, 0.4)});
        c.F[tc<2>(0, 0)].add_constant(1.0);
        c.F[tc<2>(0, 0)].add(T{0.05, {TrigFactor::cos(wp, 0.9), TrigFactor::cos(wp, 0.3)},
                               TrigFactor::cos(1.0)});
        c.F[tc<2>(0, 1)].add(T{0.04, {TrigFactor::sin(wp, 0.2), TrigFactor::cos(wp, 0.8)},
                               TrigFactor::cos(0.6, 0.2)});
        c.F[tc<2>(1, 1)].add_constant(1.0);
        c.rho_min = 0.9;
        c.periodic_ok = false;
        c.noslip_ok = true;
        return c;
    }
    throw InvalidArgument("unknown 2D manufactured case '" + name + "'");
}

template <>
inline ManufacturedCase<3> make_manufactured_case<3>(const std::string& name) {
    using T = SeparableTerm<3>;
    constexpr double w = 2.0 * M_PI;
    ManufacturedCase<3> c;
    c.name = name;
    if (name == "equilibrium") {
        c.rho.add_constant(1.0);
        for (int i = 0; i < 3; ++i) c.F[tc<3>(i, i)].add_constant(1.0);
        c.rho_min = 1.0;
        c.noslip_ok = true;
        return c;
    }
    if (name == "trig3d") {
        c.rho.add_constant(1.0);
        c.rho.add(T{0.08,
                    {TrigFactor::cos(w, 0.3), TrigFactor::cos(w, 0.7), TrigFactor::cos(w, 0.1)},
                    TrigFactor::cos(1.0)});
        c.u[0].add(T{0.06,
                     {TrigFactor::sin(w, 1.1), TrigFactor::cos(w, 0.2), TrigFactor::one()},
                     TrigFactor::cos(0.7)});
        c.u[1].add(T{0.05,
                     {TrigFactor::one(), TrigFactor::sin(w, 1.9), TrigFactor::cos(w, 0.5)},
                     TrigFactor::cos(1.3, 0.5)});
        c.u[2].add(T{0.05,
                     {TrigFactor::cos(w, 0.8), TrigFactor::one(), TrigFactor::sin(w, 0.4)},
                     TrigFactor::cos(0.9, 0.2)});
        for (int i = 0; i < 3; ++i) c.F[tc<3>(i, i)].add_constant(1.0);
        c.F[tc<3>(0, 0)].add(T{0.05,
                               {TrigFactor::sin(w, 0.9), TrigFactor::sin(w, 0.1), TrigFactor::one()},
                               TrigFactor::cos(0.9)});
        c.F[tc<3>(0, 1)].add(T{0.04,
                               {TrigFactor::cos(w, 1.7), TrigFactor::sin(w, 0.8), TrigFactor::one()},
                               TrigFactor::cos(1.1, 0.3)});
        c.F[tc<3>(1, 2)].add(T{0.04,
                               {TrigFactor::one(), TrigFactor::sin(w, 0.6), TrigFactor::cos(w, 1.2)},
                               TrigFactor::cos(0.8, 1.0)});
        c.F[tc<3>(2, 0)].add(T{0.03,
                               {TrigFactor::sin(w, 0.2), TrigFactor::one(), TrigFactor::cos(w, 1.3)},
                               TrigFactor::cos(1.2, 0.4)});
        c.rho_min = 0.9;
        return c;
    }
    throw InvalidArgument("unknown 3D manufactured case '" + name + "'");
}

template <int Dim>
bool manufactured_case_exists(const std::string& name) {
    try {
        make_manufactured_case<Dim>(name);
        return true;
    } catch (const InvalidArgument&) {
        return false;
    }
}

/// Per-grid errors and observed orders of a refinement study.
struct ConvergenceRow {
    int cells = 0;
    double h = 0.0;
    double err_rho = 0.0, err_u = 0.0, err_F = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    std::vector<double> order_rho, order_u, order_F;  ///< log2 ratios per refinement
    bool monotone = true;

    void finalize() {
        order_rho.clear();
        order_u.clear();
        order_F.clear();
        monotone = true;
        for (std::size_t k = 1; k < rows.size(); ++k) {
            order_rho.push_back(std::log2(rows[k - 1].err_rho / rows[k].err_rho));
            order_u.push_back(std::log2(rows[k - 1].err_u / rows[k].err_u));
            order_F.push_back(std::log2(rows[k - 1].err_F / rows[k].err_F));
            if (rows[k].err_rho > rows[k - 1].err_rho || rows[k].err_u > rows[k - 1].err_u ||
                rows[k].err_F > rows[k - 1].err_F)
                monotone = false;
        }
    }

    bool orders_within(double expected, double tol) const {
        auto ok = [&](const std::vector<double>& o) {
            for (double v : o)
                if (std::abs(v - expected) > tol) return false;
            return true;
        };
        return !order_rho.empty() && ok(order_rho) && ok(order_u) && ok(order_F);
    }

    void write_csv(std::ostream& os) const {
        os << "cells,h,err_rho,err_u,err_F,order_rho,order_u,order_F\n";
        char buf[32];
        auto put = [&](double v, bool last) {
            std::snprintf(buf, sizeof buf, "%.16e", v);
            os << buf << (last ? "\n" : ",");
        };
        for (std::size_t k = 0; k < rows.size(); ++k) {
            os << rows[k].cells << ",";
            put(rows[k].h, false);
            put(rows[k].err_rho, false);
            put(rows[k].err_u, false);
            put(rows[k].err_F, false);
            if (k == 0) {
                os << ",,\n";
            } else {
                put(order_rho[k - 1], false);
                put(order_u[k - 1], false);
                put(order_F[k - 1], true);
            }
        }
    }
};

/// Runs the manufactured case on each grid (each refining the previous by 2)
/// and reports final-time L2 errors and observed orders. dt follows the CFL
/// bound of the stepper config, so it scales with h or h^2 automatically.
template <int Dim>
ConvergenceReport convergence_study(const ManufacturedCase<Dim>& c, const std::vector<int>& grids,
                                    const TimeStepperConfig& cfg, const MaterialParams& mp,
                                    Boundary boundary = Boundary::Periodic) {
    if (grids.size() < 3) throw InvalidArgument("convergence_study: need at least 3 grids");
    for (std::size_t k = 1; k < grids.size(); ++k)
        if (grids[k] != 2 * grids[k - 1])
            throw InvalidArgument("convergence_study: each grid must refine the previous by 2");
    if (boundary == Boundary::Periodic && !c.periodic_ok)
        throw InvalidArgument("convergence_study: case is not periodic-compatible");
    if (boundary == Boundary::NoSlipBox && !c.noslip_ok)
        throw InvalidArgument("convergence_study: case does not satisfy no-slip faces");

    ConvergenceReport report;
    for (int n : grids) {
        const auto g = make_cube_grid<Dim>(n, 1.0, boundary);
        MmsForcing<Dim> forcing(c, mp, g);
        FlowState<Dim> init = c.sample(g, 0.0);
        auto result = simulate(init, cfg, mp, 0u, &forcing);
        if (result.aborted)
            throw NumericsError("convergence_study: run aborted on " + std::to_string(n) +
                                    " cells: " + result.abort_reason,
                                result.abort_stage);
        const FlowState<Dim> exact = c.sample(g, result.final_state.t);
        ConvergenceRow row;
        row.cells = n;
        row.h = g.min_spacing();
        ScalarField<Dim> drho = result.final_state.rho;
        drho.add_scaled(exact.rho, -1.0);
        VectorField<Dim> du = result.final_state.u;
        du.add_scaled(exact.u, -1.0);
        TensorField<Dim> dF = result.final_state.F;
        dF.add_scaled(exact.F, -1.0);
        row.err_rho = lq_norm(drho, 2.0);
        row.err_u = lq_norm(du, 2.0);
        row.err_F = lq_norm(dF, 2.0);
        report.rows.push_back(row);
    }
    report.finalize();
    return report;
}

}  // namespace vfl
