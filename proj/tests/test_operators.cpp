#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"
#include "vfl/norms.hpp"
#include "vfl/operators.hpp"

using namespace vfl;

TEST_CASE("gradient of a constant vanishes") {
    // exactly on the torus; to round-off under the one-sided face stencils
    for (auto b : {Boundary::Periodic, Boundary::NoSlipBox}) {
        const auto g = make_cube_grid<2>(16, 1.0, b);
        ScalarField<2> f(g);
        f.fill(4.2);
        const double h = g.spacing(0);
        const double slack = b == Boundary::Periodic ? 0.0 : 1e-15 * 4.2 * 12.0 / (h * h);
        CHECK(gradient(f).max_abs() <= slack);
        CHECK(laplacian(f).max_abs() <= slack);
    }
}

TEST_CASE("curl of a gradient vanishes to round-off (periodic)") {
    std::mt19937_64 rng(5);
    const auto g = make_cube_grid<2>(32, 2.0 * M_PI);
    ScalarField<2> f(g);
    testing::fill_smooth(f, rng, 1.0);
    const VectorField<2> grad = gradient(f);
    CHECK(curl(grad).max_abs() <= 1e-13 * std::max(1.0, grad.max_abs()));

    const auto g3 = make_cube_grid<3>(12, 2.0 * M_PI);
    ScalarField<3> f3(g3);
    testing::fill_smooth(f3, rng, 1.0);
    const VectorField<3> grad3 = gradient(f3);
    CHECK(curl(grad3).max_abs() <= 1e-13 * std::max(1.0, grad3.max_abs()));
}

TEST_CASE("divergence of a single sine mode matches the truncation bound") {
    // u = (sin x1, 0, 0) on [0,2pi)^3: div u = cos x1, central-difference
    // error <= (h^2/6) * 1.01
    const auto g = make_cube_grid<3>(32, 2.0 * M_PI);
    VectorField<3> u(g);
    for_each_node(g, [&](const std::array<int, 3>& idx, std::int64_t n) {
        u(n, 0) = std::sin(g.coord(0, idx[0]));
    });
    const auto d = div_vec(u);
    double worst = 0.0;
    for_each_node(g, [&](const std::array<int, 3>& idx, std::int64_t n) {
        worst = std::max(worst, std::abs(d(n) - std::cos(g.coord(0, idx[0]))));
    });
    const double h = g.spacing(0);
    CHECK(worst <= (h * h / 6.0) * 1.01);
}

TEST_CASE("one-sided stencils are exact on quadratics") {
    const auto g = make_cube_grid<2>(16, 1.0, Boundary::NoSlipBox);
    ScalarField<2> f(g);
    for_each_node(g, [&](const std::array<int, 2>& idx, std::int64_t n) {
        const auto x = g.point(idx);
        f(n) = 1.5 * x[0] * x[0] - 0.7 * x[0] + 2.0 * x[1] * x[1] + 0.3 * x[0] * x[1];
    });
    const auto grad = gradient(f);
    const auto lap = laplacian(f);
    double worst_g = 0.0, worst_l = 0.0;
    for_each_node(g, [&](const std::array<int, 2>& idx, std::int64_t n) {
        const auto x = g.point(idx);
        worst_g = std::max(worst_g, std::abs(grad(n, 0) - (3.0 * x[0] - 0.7 + 0.3 * x[1])));
        worst_g = std::max(worst_g, std::abs(grad(n, 1) - (4.0 * x[1] + 0.3 * x[0])));
        worst_l = std::max(worst_l, std::abs(lap(n) - 7.0));
    });
    CHECK(worst_g <= 1e-12);
    CHECK(worst_l <= 1e-10);
}

TEST_CASE("discrete integration by parts on the torus") {
    std::mt19937_64 rng(17);
    const auto g = make_cube_grid<2>(24);
    ScalarField<2> f(g);
    VectorField<2> u(g);
    testing::fill_random(f, rng);
    testing::fill_random(u, rng);
    ScalarField<2> fdiv(g);
    const auto du = div_vec(u);
    for (std::int64_t n = 0; n < g.node_count(); ++n) fdiv(n) = f(n) * du(n);
    const auto gf = gradient(f);
    ScalarField<2> gdotu(g);
    for (std::int64_t n = 0; n < g.node_count(); ++n)
        gdotu(n) = gf(n, 0) * u(n, 0) + gf(n, 1) * u(n, 1);
    CHECK(integrate(fdiv) == Catch::Approx(-integrate(gdotu)).margin(1e-12));
}

TEST_CASE("tensor divergence contracts the second index") {
    const auto g = make_cube_grid<2>(64, 2.0 * M_PI);
    // only T_10 = sin(x1) is set: (div T)_1 = d1 T_10 = cos(x1), row 0 empty
    TensorField<2> S(g);
    for_each_node(g, [&](const std::array<int, 2>& idx, std::int64_t n) {
        S(n, tc<2>(1, 0)) = std::sin(g.coord(0, idx[0]));
    });
    const auto ds = div_tensor(S);
    double worst = 0.0;
    for_each_node(g, [&](const std::array<int, 2>& idx, std::int64_t n) {
        worst = std::max(worst, std::abs(ds(n, 1) - std::cos(g.coord(0, idx[0]))));
        worst = std::max(worst, std::abs(ds(n, 0)));
    });
    const double h = g.spacing(0);
    CHECK(worst <= h * h / 6.0 * 1.01);
}

TEST_CASE("vector gradient layout is (grad u)_ij = du_i/dx_j") {
    const auto g = make_cube_grid<2>(64, 2.0 * M_PI);
    VectorField<2> u(g);
    for_each_node(g, [&](const std::array<int, 2>& idx, std::int64_t n) {
        u(n, 0) = std::sin(g.coord(1, idx[1]));  // u1 depends on x2 only
    });
    const auto Du = gradient(u);
    double off = 0.0, on = 0.0;
    for_each_node(g, [&](const std::array<int, 2>& idx, std::int64_t n) {
        on = std::max(on, std::abs(Du(n, tc<2>(0, 1)) - std::cos(g.coord(1, idx[1]))));
        off = std::max(off, std::abs(Du(n, tc<2>(0, 0))));
        off = std::max(off, std::abs(Du(n, tc<2>(1, 0))));
        off = std::max(off, std::abs(Du(n, tc<2>(1, 1))));
    });
    CHECK(off == 0.0);
    const double h = g.spacing(1);
    CHECK(on <= h * h / 6.0 * 1.01);
}

TEST_CASE("3D curl of a rigid rotation field") {
    // u = (-x2, x1, 0) has curl (0, 0, 2); linear fields are differentiated
    // exactly, including by the one-sided face stencils.
    const auto g = make_cube_grid<3>(8, 1.0, Boundary::NoSlipBox);
    VectorField<3> u(g);
    for_each_node(g, [&](const std::array<int, 3>& idx, std::int64_t n) {
        const auto x = g.point(idx);
        u(n, 0) = -x[1];
        u(n, 1) = x[0];
    });
    const auto c = curl(u);
    double worst = 0.0;
    for (std::int64_t n = 0; n < c.nodes(); ++n) {
        worst = std::max(worst, std::abs(c(n, 0)));
        worst = std::max(worst, std::abs(c(n, 1)));
        worst = std::max(worst, std::abs(c(n, 2) - 2.0));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("row-wise tensor curl matches per-row vector curl") {
    std::mt19937_64 rng(23);
    const auto g = make_cube_grid<3>(8, 2.0 * M_PI);
    TensorField<3> T(g);
    testing::fill_smooth(T, rng);
    const auto rows = curl_rows(T);
    for (int i = 0; i < 3; ++i) {
        VectorField<3> row(g);
        for (std::int64_t n = 0; n < row.nodes(); ++n)
            for (int j = 0; j < 3; ++j) row(n, j) = T(n, tc<3>(i, j));
        const auto c = curl(row);
        double worst = 0.0;
        for (std::int64_t n = 0; n < c.nodes(); ++n)
            for (int j = 0; j < 3; ++j)
                worst = std::max(worst, std::abs(c(n, j) - rows(n, tc<3>(i, j))));
        CHECK(worst == 0.0);
    }

    const auto g2 = make_cube_grid<2>(8, 2.0 * M_PI);
    TensorField<2> T2(g2);
    testing::fill_smooth(T2, rng);
    const auto rows2 = curl_rows(T2);
    for (int i = 0; i < 2; ++i) {
        VectorField<2> row(g2);
        for (std::int64_t n = 0; n < row.nodes(); ++n)
            for (int j = 0; j < 2; ++j) row(n, j) = T2(n, tc<2>(i, j));
        const auto c = curl(row);
        double worst = 0.0;
        for (std::int64_t n = 0; n < c.nodes(); ++n)
            worst = std::max(worst, std::abs(c(n) - rows2(n, i)));
        CHECK(worst == 0.0);
    }
}

TEST_CASE("grad_div equals the composition gradient(div_vec(u))") {
    std::mt19937_64 rng(29);
    const auto g = make_cube_grid<2>(16);
    VectorField<2> u(g);
    testing::fill_random(u, rng);
    const auto a = grad_div(u);
    const auto b = gradient(div_vec(u));
    CHECK(testing::max_abs_diff(a, b) == 0.0);
}
