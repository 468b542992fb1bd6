#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"
#include "vfl/elliptic.hpp"

using namespace vfl;

namespace {

template <int Dim>
ScalarField<Dim> sine_x1(const GridSpec<Dim>& g) {
    ScalarField<Dim> f(g);
    for_each_node(g, [&](const std::array<int, Dim>& idx, std::int64_t n) {
        f(n) = std::sin(g.coord(0, idx[0]));
    });
    return f;
}

template <int Dim>
void subtract_mean(ScalarField<Dim>& f) {
    const double m = node_mean(f);
    for (std::int64_t n = 0; n < f.nodes(); ++n) f(n) -= m;
}

}  // namespace

TEST_CASE("spectral inverse Laplacian inverts a Laplacian eigenfunction") {
    const auto g = make_cube_grid<2>(32, 2.0 * M_PI);
    const auto f = sine_x1(g);
    const auto s = inv_laplacian(f);
    double worst = 0.0;
    for (std::int64_t n = 0; n < s.nodes(); ++n) worst = std::max(worst, std::abs(s(n) + f(n)));
    CHECK(worst <= 1e-13);
}

TEST_CASE("inverse Laplacian rejects non-mean-zero periodic data") {
    const auto g = make_cube_grid<2>(16);
    ScalarField<2> f(g);
    f.fill(0.5);
    CHECK_THROWS_AS(inv_laplacian(f), InvalidArgument);
}

TEST_CASE("inverse Laplacian round-trips against the matching operator") {
    std::mt19937_64 rng(31);
    const auto g = make_cube_grid<2>(16, 2.0 * M_PI);
    ScalarField<2> f(g);
    testing::fill_random(f, rng);
    subtract_mean(f);
    const double scale = lq_norm(f, 2.0);

    // exact-symbol realization against the exact-symbol Laplacian
    const auto s = inv_laplacian(f);
    auto back = laplacian_spectral(s);
    back.add_scaled(f, -1.0);
    CHECK(lq_norm(back, 2.0) <= 1e-10 * scale);

    // stencil realization against the stencil Laplacian
    EllipticSolveOptions opts;
    opts.realization = EllipticRealization::Iterative;
    const auto si = inv_laplacian(f, opts);
    auto backi = laplacian(si);
    backi.add_scaled(f, -1.0);
    CHECK(lq_norm(backi, 2.0) <= 1e-9 * scale);
}

TEST_CASE("Dirichlet inverse Laplacian on the box") {
    std::mt19937_64 rng(37);
    const auto g = make_cube_grid<2>(16, 1.0, Boundary::NoSlipBox);
    ScalarField<2> f(g);
    testing::fill_smooth(f, rng, 1.0, true);
    const auto s = inv_laplacian(f);
    // boundary values pinned to zero
    for_each_node(g, [&](const std::array<int, 2>& idx, std::int64_t n) {
        if (g.on_boundary(idx)) CHECK(s(n) == 0.0);
    });
    // interior residual against the stencil Laplacian
    const auto back = laplacian(s);
    double worst = 0.0;
    const double scale = f.max_abs();
    for_each_node(g, [&](const std::array<int, 2>& idx, std::int64_t n) {
        if (!g.on_boundary(idx)) worst = std::max(worst, std::abs(back(n) - f(n)));
    });
    CHECK(worst <= 1e-8 * scale);
}

TEST_CASE("Riesz operator: diagonal action on a pure mode") {
    const auto g = make_cube_grid<3>(16, 2.0 * M_PI);
    const auto f = sine_x1(g);
    const auto r = riesz(0, 0, f);
    double worst = 0.0;
    for (std::int64_t n = 0; n < r.nodes(); ++n) worst = std::max(worst, std::abs(r(n) - f(n)));
    CHECK(worst <= 1e-12);

    // off-diagonal entries annihilate this mode
    CHECK(riesz(1, 0, f).max_abs() <= 1e-13);
    CHECK(riesz(1, 2, f).max_abs() <= 1e-13);
}

TEST_CASE("Riesz operator annihilates constants") {
    const auto g = make_cube_grid<2>(16);
    ScalarField<2> f(g);
    f.fill(3.0);
    CHECK(riesz(0, 1, f).max_abs() <= 1e-14);
    CHECK(riesz(0, 0, f).max_abs() <= 1e-14);
}

TEST_CASE("Riesz family sums to the identity on mean-zero fields") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 5; ++trial) {
        const auto g = make_cube_grid<2>(16);
        ScalarField<2> f(g);
        testing::fill_random(f, rng);
        subtract_mean(f);
        ScalarField<2> sum(g);
        for (int i = 0; i < 2; ++i) sum.add_scaled(riesz(i, i, f), 1.0);
        sum.add_scaled(f, -1.0);
        CHECK(lq_norm(sum, 2.0) <= 1e-11 * lq_norm(f, 2.0));
    }
}

TEST_CASE("Riesz operator is symmetric, bounded, and translation-covariant") {
    std::mt19937_64 rng(43);
    const auto g = make_cube_grid<2>(16);
    ScalarField<2> f(g);
    testing::fill_random(f, rng);
    subtract_mean(f);

    const auto r01 = riesz(0, 1, f);
    const auto r10 = riesz(1, 0, f);
    CHECK(testing::max_abs_diff(r01, r10) <= 1e-14);

    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(lq_norm(riesz(i, j, f), 2.0) <= lq_norm(f, 2.0) * (1.0 + 1e-12));

    // translate input by (3, 5) nodes: output translates the same way
    ScalarField<2> shifted(g);
    for_each_node(g, [&](const std::array<int, 2>& idx, std::int64_t n) {
        const std::array<int, 2> src{(idx[0] + 3) % g.nodes(0), (idx[1] + 5) % g.nodes(1)};
        shifted(n) = f.at(src);
    });
    const auto r_shift = riesz(0, 1, shifted);
    double worst = 0.0;
    for_each_node(g, [&](const std::array<int, 2>& idx, std::int64_t n) {
        const std::array<int, 2> src{(idx[0] + 3) % g.nodes(0), (idx[1] + 5) % g.nodes(1)};
        worst = std::max(worst, std::abs(r_shift(n) - r01.at(src)));
    });
    CHECK(worst <= 1e-12);
}

TEST_CASE("Riesz operator rejects a no-slip box") {
    const auto g = make_cube_grid<2>(16, 1.0, Boundary::NoSlipBox);
    ScalarField<2> f(g);
    CHECK_THROWS_AS(riesz(0, 0, f), InvalidArgument);
}

TEST_CASE("spectral Lame solve reproduces the single-mode coefficients") {
    const MaterialParams mp{1.0, 0.5, 1.0, 1.4};
    const auto g = make_cube_grid<3>(16, 2.0 * M_PI);

    // gradient-type mode: w = sin(x1) e1 / (2mu + lambda)
    VectorField<3> f1(g);
    for_each_node(g, [&](const std::array<int, 3>& idx, std::int64_t n) {
        f1(n, 0) = std::sin(g.coord(0, idx[0]));
    });
    const auto w1 = lame_solve(f1, mp);
    double worst = 0.0;
    for (std::int64_t n = 0; n < w1.nodes(); ++n) {
        worst = std::max(worst, std::abs(w1(n, 0) - f1(n, 0) / 2.5));
        worst = std::max(worst, std::abs(w1(n, 1)));
        worst = std::max(worst, std::abs(w1(n, 2)));
    }
    CHECK(worst <= 1e-10);

    // divergence-free mode: w = sin(x2) e1 / mu
    VectorField<3> f2(g);
    for_each_node(g, [&](const std::array<int, 3>& idx, std::int64_t n) {
        f2(n, 0) = std::sin(g.coord(1, idx[1]));
    });
    const auto w2 = lame_solve(f2, mp);
    worst = 0.0;
    for (std::int64_t n = 0; n < w2.nodes(); ++n)
        worst = std::max(worst, std::abs(w2(n, 0) - f2(n, 0) / mp.mu));
    CHECK(worst <= 1e-10);
}

TEST_CASE("Lame solve rejects bad inputs") {
    const auto g = make_cube_grid<2>(16);
    VectorField<2> f(g);
    f.fill(1.0);
    CHECK_THROWS_AS(lame_solve(f, (MaterialParams{1.0, 0.5, 1.0, 1.4})), InvalidArgument);

    VectorField<2> z(g);
    MaterialParams bad{1.0, -1.0, 1.0, 1.4};  // 2 mu + 2 lambda = 0
    CHECK_THROWS_AS(lame_solve(z, bad), InvalidArgument);

    EllipticSolveOptions opts;
    opts.tolerance = 0.5;  // outside (0, 1e-2]
    CHECK_THROWS_AS(lame_solve(z, MaterialParams{}, opts), InvalidArgument);
}

TEST_CASE("Lame solve round-trips through the realization-matched operator") {
    std::mt19937_64 rng(47);
    const MaterialParams mp{0.8, 0.3, 1.0, 1.4};

    const auto g = make_cube_grid<2>(16);
    VectorField<2> f(g);
    testing::fill_smooth(f, rng, 1.0);
    detail::subtract_component_means(f);
    const auto w = lame_solve(f, mp);
    auto back = lame_apply(w, mp, EllipticRealization::Spectral);
    back.add_scaled(f, -1.0);
    CHECK(lq_norm(back, 2.0) <= 1e-10 * lq_norm(f, 2.0));

    // linearity within 10x tolerance
    VectorField<2> h(g);
    testing::fill_smooth(h, rng, 1.0);
    detail::subtract_component_means(h);
    VectorField<2> combo = f;
    combo.scale(2.0);
    combo.add_scaled(h, -0.5);
    auto w_combo = lame_solve(combo, mp);
    w_combo.add_scaled(lame_solve(f, mp), -2.0);
    w_combo.add_scaled(lame_solve(h, mp), 0.5);
    CHECK(lq_norm(w_combo, 2.0) <= 1e-9 * lq_norm(combo, 2.0));
}

TEST_CASE("iterative Lame solve on a no-slip box") {
    std::mt19937_64 rng(53);
    const MaterialParams mp{1.0, 0.5, 1.0, 1.4};
    const auto g = make_cube_grid<2>(16, 1.0, Boundary::NoSlipBox);
    VectorField<2> f(g);
    testing::fill_smooth(f, rng, 1.0, true);
    const auto w = lame_solve(f, mp);
    for_each_node(g, [&](const std::array<int, 2>& idx, std::int64_t n) {
        if (g.on_boundary(idx)) {
            CHECK(w(n, 0) == 0.0);
            CHECK(w(n, 1) == 0.0);
        }
    });
    auto back = lame_apply(w, mp, EllipticRealization::Iterative);
    double worst = 0.0;
    for_each_node(g, [&](const std::array<int, 2>& idx, std::int64_t n) {
        if (!g.on_boundary(idx))
            for (int c = 0; c < 2; ++c) worst = std::max(worst, std::abs(back(n, c) - f(n, c)));
    });
    CHECK(worst <= 1e-8 * f.max_abs());
}

TEST_CASE("iterative Lame solve reports non-convergence with its history") {
    std::mt19937_64 rng(59);
    const auto g = make_cube_grid<2>(16, 1.0, Boundary::NoSlipBox);
    VectorField<2> f(g);
    testing::fill_smooth(f, rng, 1.0, true);
    EllipticSolveOptions opts;
    opts.realization = EllipticRealization::Iterative;
    opts.max_iterations = 2;
    try {
        lame_solve(f, MaterialParams{}, opts);
        FAIL("expected SolveError");
    } catch (const SolveError& e) {
        CHECK(e.residual_history().size() == 2);
        CHECK(e.final_residual() > 0.0);
    }
}

TEST_CASE("IMEX viscous solve: symbol, constants, and the dt -> 0 limit") {
    const MaterialParams mp{1.0, 0.5, 1.0, 1.4};
    const auto g = make_cube_grid<2>(32, 2.0 * M_PI);

    VectorField<2> rhs(g);
    for_each_node(g, [&](const std::array<int, 2>& idx, std::int64_t n) {
        rhs(n, 0) = std::sin(g.coord(0, idx[0]));
    });
    const auto w = imex_viscous_solve(rhs, 0.1, mp);
    double worst = 0.0;
    for (std::int64_t n = 0; n < w.nodes(); ++n)
        worst = std::max(worst, std::abs(w(n, 0) - rhs(n, 0) / 1.25));
    CHECK(worst <= 1e-10);

    VectorField<2> c(g);
    c.fill(-2.5);
    const auto wc = imex_viscous_solve(c, 0.1, mp);
    worst = 0.0;
    for (std::int64_t n = 0; n < wc.nodes(); ++n)
        for (int cc = 0; cc < 2; ++cc) worst = std::max(worst, std::abs(wc(n, cc) + 2.5));
    CHECK(worst <= 1e-12);

    std::mt19937_64 rng(61);
    VectorField<2> r2(g);
    testing::fill_smooth(r2, rng, 1.0);
    const double dt = 1e-9;
    auto w2 = imex_viscous_solve(r2, dt, mp);
    w2.add_scaled(r2, -1.0);
    CHECK(w2.max_abs() <= 1e-7);

    // iterative realization agrees with its own stencil operator
    EllipticSolveOptions opts;
    opts.realization = EllipticRealization::Iterative;
    const auto g2 = make_cube_grid<2>(16, 1.0, Boundary::NoSlipBox);
    VectorField<2> r3(g2);
    testing::fill_smooth(r3, rng, 1.0, true);
    const auto w3 = imex_viscous_solve(r3, 0.05, mp, opts);
    detail::StencilHelmholtz<2> op(g2, 1.0, 0.05 * mp.mu, 0.05 * (mp.mu + mp.lambda));
    std::vector<double> x(w3.data().begin(), w3.data().end()), y(x.size());
    op.apply(x, y);
    double resid = 0.0;
    for_each_node(g2, [&](const std::array<int, 2>& idx, std::int64_t n) {
        if (!g2.on_boundary(idx))
            for (int cc = 0; cc < 2; ++cc)
                resid = std::max(resid, std::abs(y[n * 2 + cc] - r3(n, cc)));
    });
    CHECK(resid <= 1e-8 * r3.max_abs());
}

TEST_CASE("spectral realization refuses a no-slip box") {
    const auto g = make_cube_grid<2>(16, 1.0, Boundary::NoSlipBox);
    VectorField<2> f(g);
    EllipticSolveOptions opts;  // Spectral by default
    CHECK_THROWS_AS(lame_solve(f, MaterialParams{}, opts), InvalidArgument);
}
