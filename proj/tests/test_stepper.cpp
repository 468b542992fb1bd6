#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "test_util.hpp"
#include "vfl/mms.hpp"
#include "vfl/simulate.hpp"

using namespace vfl;

TEST_CASE("equilibrium is a fixed point of both steppers") {
    const MaterialParams mp;
    for (auto scheme : {TimeScheme::RK4Explicit, TimeScheme::IMEX}) {
        const auto g = make_cube_grid<2>(16);
        FlowState<2> s(g);
        TimeStepperConfig cfg;
        cfg.scheme = scheme;
        RhsWorkspace<2> ws;
        for (int step = 0; step < 50; ++step) advance(s, 1e-3, cfg, mp, ws);
        double worst = 0.0;
        for (std::int64_t n = 0; n < s.rho.nodes(); ++n)
            worst = std::max(worst, std::abs(s.rho(n) - 1.0));
        worst = std::max(worst, s.u.max_abs());
        for (std::int64_t n = 0; n < s.F.nodes(); ++n)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    worst = std::max(worst, std::abs(s.F(n, tc<2>(i, j)) - (i == j ? 1.0 : 0.0)));
        CHECK(worst <= 1e-13);
        CHECK(s.t == Catch::Approx(0.05).margin(1e-15));
    }
}

TEST_CASE("zero velocity freezes the continuity equation exactly") {
    std::mt19937_64 rng(97);
    const auto g = make_cube_grid<2>(16);
    PerturbState<2> p(g);
    testing::fill_smooth(p.rho_tilde, rng, 0.01);
    const auto d = rhs_perturb(p, MaterialParams{});
    CHECK(d.dscalar.max_abs() == 0.0);
    // and a zero velocity field leaves sigma static
    VectorField<2> sigma(g);
    testing::fill_smooth(sigma, rng, 0.3);
    CHECK(sigma_rhs(p.u, sigma).max_abs() == 0.0);
}

TEST_CASE("CFL bound combines advective and viscous limits") {
    const MaterialParams mp{1.0, 0.5, 1.0, 1.4};
    const auto g = make_cube_grid<2>(32);
    TimeStepperConfig cfg;
    const double h = g.min_spacing();
    const double cs = mp.sound_speed(1.2);

    cfg.scheme = TimeScheme::RK4Explicit;
    const double dt_rk4 = stable_dt(g, 2.0, 1.2, mp, cfg);
    CHECK(dt_rk4 == Catch::Approx(std::min(0.5 * h / (2.0 + cs), 0.25 * h * h / 2.5)));

    cfg.scheme = TimeScheme::IMEX;
    const double dt_imex = stable_dt(g, 2.0, 1.2, mp, cfg);
    CHECK(dt_imex == Catch::Approx(0.5 * h / (2.0 + cs)));
    CHECK(dt_imex > dt_rk4);

    cfg.dt = 1e-4;  // explicit dt wins over CFL
    CHECK(stable_dt(g, 2.0, 1.2, mp, cfg) == 1e-4);
}

TEST_CASE("RK4 exhibits fourth-order self-convergence in dt") {
    // forced problem, fixed 16^2 grid: compare against a tiny-dt reference so
    // only the temporal error is visible
    const MaterialParams mp{0.05, 0.025, 1.0, 1.4};
    const auto g = make_cube_grid<2>(16);
    const auto mc = make_manufactured_case<2>("trig2d");
    MmsForcing<2> forcing(mc, mp, g);
    const FlowState<2> init = mc.sample(g, 0.0);
    const double T = 0.04;

    auto run_with = [&](double dt) {
        FlowState<2> s = init;
        TimeStepperConfig cfg;
        RhsWorkspace<2> ws;
        int steps = static_cast<int>(std::round(T / dt));
        for (int k = 0; k < steps; ++k) advance(s, dt, cfg, mp, &forcing, ws);
        return s;
    };

    const FlowState<2> ref = run_with(T / 256);
    std::array<double, 3> err{};
    int k = 0;
    for (double dt : {T / 4, T / 8, T / 16}) {
        const FlowState<2> s = run_with(dt);
        double e = 0.0;
        e = std::max(e, testing::max_abs_diff(s.rho, ref.rho));
        e = std::max(e, testing::max_abs_diff(s.u, ref.u));
        e = std::max(e, testing::max_abs_diff(s.F, ref.F));
        err[k++] = e;
    }
    const double order1 = std::log2(err[0] / err[1]);
    const double order2 = std::log2(err[1] / err[2]);
    INFO("errors " << err[0] << " " << err[1] << " " << err[2]);
    CHECK(order1 >= 3.7);
    CHECK(order2 >= 3.7);
}

TEST_CASE("IMEX runs stably far beyond the explicit viscous limit") {
    const MaterialParams mp{1.0, 0.5, 1.0, 1.4};
    const auto g = make_cube_grid<2>(32);
    const auto spec = DisplacementSpec<2>::standard(0.01, 0.01);
    const FlowState<2> init = gen_initial_from_displacement(spec, g);

    TimeStepperConfig cfg;
    const double dt_visc = 0.25 * g.min_spacing() * g.min_spacing() / 2.5;
    const double dt = 10.0 * dt_visc;

    // the explicit scheme diverges at this step size
    {
        FlowState<2> s = init;
        cfg.scheme = TimeScheme::RK4Explicit;
        RhsWorkspace<2> ws;
        bool blew_up = false;
        try {
            for (int k = 0; k < 400; ++k) advance(s, dt, cfg, mp, ws);
        } catch (const NumericsError& e) {
            blew_up = true;
            CHECK(e.stage() >= 1);
            CHECK(e.stage() <= 4);
        }
        CHECK(blew_up);
    }
    // the IMEX scheme does not
    {
        FlowState<2> s = init;
        cfg.scheme = TimeScheme::IMEX;
        RhsWorkspace<2> ws;
        for (int k = 0; k < 400; ++k) advance(s, dt, cfg, mp, ws);
        CHECK(s.rho.all_finite());
        CHECK(s.u.all_finite());
        CHECK(s.F.all_finite());
        CHECK(s.u.max_abs() <= 1.0);
    }
}

TEST_CASE("simulate returns a partial series with the abort marker") {
    const MaterialParams mp{1.0, 0.5, 1.0, 1.4};
    const auto g = make_cube_grid<2>(16);
    const auto spec = DisplacementSpec<2>::standard(0.01, 0.01);
    const FlowState<2> init = gen_initial_from_displacement(spec, g);

    TimeStepperConfig cfg;
    cfg.dt = 0.05;  // far beyond the viscous limit
    cfg.t_end = 10.0;
    cfg.sample_every = 1;
    std::ostringstream csv;
    const auto result = simulate(init, cfg, mp, MonIntrinsic | MonConserved, &csv);
    CHECK(result.aborted);
    CHECK(result.abort_stage >= 1);
    CHECK(result.series.size() >= 1);
    CHECK(csv.str().find("# aborted stage=") != std::string::npos);
}

TEST_CASE("simulate at equilibrium keeps every residual at round-off") {
    const MaterialParams mp;
    const auto g = make_cube_grid<2>(16);
    const FlowState<2> init(g);
    TimeStepperConfig cfg;
    cfg.t_end = 0.05;
    cfg.sample_every = 5;
    const auto result =
        simulate(init, cfg, mp, MonIntrinsic | MonTrace | MonConserved | MonNorms | MonSigma);
    REQUIRE(!result.aborted);
    REQUIRE(result.series.size() >= 2);
    for (const auto& rec : result.series) {
        CHECK(rec.det_residual <= 1e-13);
        CHECK(rec.piola_residual <= 1e-13);
        CHECK(rec.curl_residual <= 1e-13);
        CHECK(rec.trace_residual <= 1e-13);
        CHECK(std::abs(rec.mass_integral) <= 1e-14);
        CHECK(rec.sigma_mismatch <= 1e-14);
        for (const auto& [key, value] : rec.norms) CHECK(value <= 1e-14);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                CHECK(std::abs(rec.rhoF_integrals[i * 2 + j] - (i == j ? 1.0 : 0.0)) <= 1e-13);
    }
}

TEST_CASE("two identical runs emit bit-identical CSV") {
    const MaterialParams mp{0.05, 0.025, 1.0, 1.4};
    const auto g = make_cube_grid<2>(16);
    const auto spec = DisplacementSpec<2>::standard(0.01, 0.01);
    const FlowState<2> init = gen_initial_from_displacement(spec, g);
    TimeStepperConfig cfg;
    cfg.t_end = 0.02;
    cfg.sample_every = 2;

    auto run_once = [&] {
        std::ostringstream csv;
        simulate(init, cfg, mp, MonIntrinsic | MonConserved | MonNorms | MonSigma, &csv);
        return csv.str();
    };
    const std::string a = run_once(), b = run_once();
    CHECK(a == b);
    CHECK(a.rfind("t,det_residual", 0) == 0);
}

TEST_CASE("csv columns are a pure function of the monitor selection") {
    const auto all = diagnostics_columns(
        MonIntrinsic | MonTrace | MonConserved | MonQ1 | MonZ | MonSigma | MonNorms, 2);
    CHECK(all.front() == "t");
    CHECK(std::find(all.begin(), all.end(), "q1_residual") != all.end());
    CHECK(std::find(all.begin(), all.end(), "rhoF_22") != all.end());
    CHECK(std::find(all.begin(), all.end(), "norm_u_w24") != all.end());
    const auto some = diagnostics_columns(MonConserved, 3);
    CHECK(some.size() == 1 + 1 + 9);
}
