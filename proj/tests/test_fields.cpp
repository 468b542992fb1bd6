#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "test_util.hpp"
#include "vfl/norms.hpp"

using namespace vfl;

namespace {

/// Independent quadrature oracle: composite Simpson on [0, L], far more
/// accurate than the grid rule it cross-checks.
double simpson_1d(double (*f)(double), double L, int n = 4096) {
    double acc = f(0.0) + f(L);
    const double h = L / n;
    for (int i = 1; i < n; ++i) acc += f(i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

double sin_sq(double x) { return std::sin(x) * std::sin(x); }

}  // namespace

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(make_cube_grid<2>(4), InvalidArgument);
    CHECK_THROWS_AS((make_grid<2>({16, 16}, {1.0, 0.0})), InvalidArgument);
    const auto g = make_cube_grid<2>(16);
    CHECK(g.node_count() == 256);
    CHECK(g.spacing(0) == Catch::Approx(1.0 / 16));
    // periodic grids are cell-centered, boxes carry face nodes
    CHECK(g.coord(0, 0) == Catch::Approx(0.5 / 16));
    const auto gb = make_cube_grid<2>(16, 1.0, Boundary::NoSlipBox);
    CHECK(gb.nodes(0) == 17);
    CHECK(gb.coord(0, 0) == 0.0);
    CHECK(gb.coord(0, 16) == Catch::Approx(1.0));
}

TEST_CASE("integrate: constants and periodic modes") {
    const auto g = make_cube_grid<2>(32);  // |Omega| = 1
    ScalarField<2> one(g);
    one.fill(1.0);
    CHECK(integrate(one) == Catch::Approx(1.0).margin(1e-14));

    ScalarField<2> s(g);
    for_each_node(g, [&](const std::array<int, 2>& idx, std::int64_t n) {
        s(n) = std::sin(2.0 * M_PI * g.coord(0, idx[0]) / g.lengths[0]);
    });
    CHECK(std::abs(integrate(s)) <= 1e-14);
}

TEST_CASE("integrate: linear integrand on a no-slip box") {
    const auto g = make_cube_grid<2>(64, 1.0, Boundary::NoSlipBox);
    ScalarField<2> f(g);
    for_each_node(g, [&](const std::array<int, 2>& idx, std::int64_t n) {
        f(n) = g.coord(0, idx[0]);
    });
    CHECK(std::abs(integrate(f) - 0.5) <= 1e-12);
}

TEST_CASE("integrate is linear") {
    std::mt19937_64 rng(11);
    const auto g = make_cube_grid<2>(16);
    ScalarField<2> f(g), h(g);
    testing::fill_random(f, rng);
    testing::fill_random(h, rng);
    ScalarField<2> combo(g);
    for (std::int64_t n = 0; n < combo.nodes(); ++n) combo(n) = 2.5 * f(n) - 0.75 * h(n);
    CHECK(integrate(combo) ==
          Catch::Approx(2.5 * integrate(f) - 0.75 * integrate(h)).margin(1e-13));
}

TEST_CASE("lq_norm: constants, zero, and the sine oracle") {
    const auto g = make_cube_grid<2>(64);
    ScalarField<2> f(g);
    f.fill(-3.25);
    CHECK(lq_norm(f, 2.0) == Catch::Approx(3.25).margin(1e-12));
    CHECK(lq_norm(f, 4.0) == Catch::Approx(3.25).margin(1e-12));
    f.fill(0.0);
    CHECK(lq_norm(f, 2.0) == 0.0);

    // f = sin(x1) on [0, 2pi)^2: ||f||_2^2 = (int sin^2) * 2pi, cross-checked
    // with an independent Simpson quadrature.
    const auto g2 = make_cube_grid<2>(64, 2.0 * M_PI);
    ScalarField<2> s(g2);
    for_each_node(g2, [&](const std::array<int, 2>& idx, std::int64_t n) {
        s(n) = std::sin(g2.coord(0, idx[0]));
    });
    const double oracle = std::sqrt(simpson_1d(sin_sq, 2.0 * M_PI) * 2.0 * M_PI);
    CHECK(oracle == Catch::Approx(M_PI * std::sqrt(2.0)).margin(1e-10));
    CHECK(lq_norm(s, 2.0) == Catch::Approx(oracle).margin(1e-10));

    CHECK_THROWS_AS(lq_norm(s, 0.5), InvalidArgument);
}

TEST_CASE("lq_norm homogeneity and node monotonicity") {
    std::mt19937_64 rng(7);
    const auto g = make_cube_grid<2>(16);
    VectorField<2> f(g);
    testing::fill_random(f, rng);
    for (double q : {2.0, 4.0, 6.0}) {
        const double base = lq_norm(f, q);
        VectorField<2> scaled = f;
        scaled.scale(-1.75);
        CHECK(lq_norm(scaled, q) == Catch::Approx(1.75 * base).epsilon(1e-12));
    }
    std::uniform_int_distribution<std::int64_t> pick(0, f.nodes() - 1);
    for (int trial = 0; trial < 20; ++trial) {
        VectorField<2> zeroed = f;
        const std::int64_t n = pick(rng);
        for (int c = 0; c < 2; ++c) zeroed(n, c) = 0.0;
        CHECK(lq_norm(zeroed, 2.0) <= lq_norm(f, 2.0) + 1e-15);
    }
}

TEST_CASE("w1q_norm dominates lq_norm and matches the sine oracle") {
    std::mt19937_64 rng(3);
    const auto g = make_cube_grid<2>(16);
    ScalarField<2> f(g);
    testing::fill_smooth(f, rng);
    CHECK(w1q_norm(f, 2.0) >= lq_norm(f, 2.0));

    ScalarField<2> c(g);
    c.fill(2.0);
    CHECK(w1q_norm(c, 2.0) == Catch::Approx(2.0).margin(1e-12));
    c.fill(0.0);
    CHECK(w1q_norm(c, 2.0) == 0.0);

    // sin(x1) on [0,2pi)^2 at 64^2: continuum value 2 pi sqrt(2); the discrete
    // gradient scales the derivative term by sin(h)/h exactly.
    const auto g2 = make_cube_grid<2>(64, 2.0 * M_PI);
    ScalarField<2> s(g2);
    for_each_node(g2, [&](const std::array<int, 2>& idx, std::int64_t n) {
        s(n) = std::sin(g2.coord(0, idx[0]));
    });
    const double h = g2.spacing(0);
    const double expected = M_PI * std::sqrt(2.0) * (1.0 + std::sin(h) / h);
    CHECK(w1q_norm(s, 2.0) == Catch::Approx(expected).margin(1e-10));
    CHECK(std::abs(w1q_norm(s, 2.0) - 2.0 * M_PI * std::sqrt(2.0)) <= 1e-2);
}

TEST_CASE("spacetime_norm") {
    std::vector<std::pair<double, double>> flat;
    for (int k = 0; k <= 10; ++k) flat.push_back({0.3 * k, 2.0});
    CHECK(spacetime_norm(flat, 2.0) == Catch::Approx(2.0 * std::sqrt(3.0)).margin(1e-12));

    std::vector<std::pair<double, double>> three{{0.0, 1.0}, {1.0, 3.0}, {2.0, 2.0}};
    CHECK(spacetime_norm(three, std::numeric_limits<double>::infinity()) == 3.0);

    std::vector<std::pair<double, double>> ramp;
    for (int k = 0; k <= 1000; ++k) ramp.push_back({k / 1000.0, k / 1000.0});
    CHECK(std::abs(spacetime_norm(ramp, 2.0) - 1.0 / std::sqrt(3.0)) <= 1e-4);

    std::vector<std::pair<double, double>> bad{{0.0, 1.0}, {0.0, 2.0}};
    CHECK_THROWS_AS(spacetime_norm(bad, 2.0), InvalidArgument);
    CHECK_THROWS_AS(spacetime_norm(flat, 0.5), InvalidArgument);
}

TEST_CASE("NormSpec validation") {
    CHECK_THROWS_AS((NormSpec{0.5, 0}).validate(), InvalidArgument);
    CHECK_THROWS_AS((NormSpec{2.0, 3}).validate(), InvalidArgument);
    CHECK_NOTHROW(NormSpec::w2q(4.0).validate());
}

TEST_CASE("binary serialization round-trips bit-exactly") {
    std::mt19937_64 rng(42);
    for (int pass = 0; pass < 3; ++pass) {
        const auto boundary = pass % 2 ? Boundary::NoSlipBox : Boundary::Periodic;
        const auto g = make_grid<2>({16, 8}, {1.0, 2.0}, boundary);
        TensorField<2> f(g);
        testing::fill_random(f, rng);
        std::stringstream buf;
        f.write_binary(buf);
        const auto back = TensorField<2>::read_binary(buf);
        REQUIRE(back.grid() == g);
        CHECK(std::equal(f.data().begin(), f.data().end(), back.data().begin()));
    }
}

TEST_CASE("binary header is validated") {
    const auto g = make_cube_grid<2>(8);
    ScalarField<2> f(g);
    std::stringstream buf;
    f.write_binary(buf);
    CHECK_THROWS_AS(VectorField<2>::read_binary(buf), InvalidArgument);
    std::stringstream truncated(buf.str().substr(0, 40));
    CHECK_THROWS_AS(ScalarField<2>::read_binary(truncated), InvalidArgument);
}

TEST_CASE("csv dump carries coordinates and components") {
    const auto g = make_cube_grid<2>(8);
    VectorField<2> f(g);
    f.fill(1.5);
    std::ostringstream os;
    f.write_csv(os);
    const std::string text = os.str();
    CHECK(text.rfind("x1,x2,c0,c1\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + g.node_count());
}
