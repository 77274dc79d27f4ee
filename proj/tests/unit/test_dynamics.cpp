#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "phlab/phlab.hpp"

using namespace phlab;

namespace {

// Robin-compatible, top-anchored initial good unknown.
Field compatible_field(GridPtr g, double amp, double k) {
    Field f(g, [&](double x, double y) {
        return amp * std::exp(-y) * (1.0 + 2.0 * y) * std::cos(k * x);
    });
    for (std::size_t i = 0; i < g->nx; ++i) {
        f.at(i, 0) = (g->d1_bot[1] * f.at(i, 1) + g->d1_bot[2] * f.at(i, 2)) /
                     (1.0 - g->d1_bot[0]);
        f.at(i, g->ny - 1) = 0.0;
    }
    return f;
}

} // namespace

TEST_CASE("the zero state is preserved exactly") {
    GridPtr g = make_grid(16, 2.0 * M_PI, 32, 20.0);
    State s{Field(g), 0.0, ModelParams{}};
    State out = run_simulation(s, 1.0, 1e-2, 25);
    REQUIRE(max_abs(out.g) == 0.0);
    REQUIRE(out.t == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("pure damping follows the crank-nicolson ratio") {
    GridPtr g = make_grid(8, 2.0 * M_PI, 48, 20.0);
    ModelParams p;
    p.transport_on = false;
    p.diffusion_on = false;
    const double dt = 0.01;
    Field f = compatible_field(g, 1.0, 1.0);
    State s{f, 0.0, p};

    State one = step_imex(s, dt);
    const double rho = (1.0 - 0.5 * dt) / (1.0 + 0.5 * dt);
    REQUIRE(max_abs(sub(one.g, scaled(f, rho))) < 1e-14);

    // over unit time the ratio tracks e^{-1} with O(dt^2) defect
    State out = run_simulation(s, 1.0, dt, 1000);
    const double ratio = max_abs(out.g) / max_abs(f);
    REQUIRE(ratio == Catch::Approx(std::exp(-1.0)).epsilon(1e-5));
}

TEST_CASE("tendency decomposition sums to the total bitwise") {
    GridPtr g = make_grid(16, 2.0 * M_PI, 32, 20.0);
    State s{compatible_field(g, 1e-2, 2.0), 0.0, ModelParams{}};
    const Tendency td = assemble_rhs(s);
    for (std::size_t n = 0; n < td.total.v.size(); ++n)
        REQUIRE(td.total.v[n] == (td.transport.v[n] + td.damping.v[n]) + td.diffusion.v[n]);
}

TEST_CASE("linearization error scales quadratically with amplitude") {
    GridPtr g = make_grid(32, 2.0 * M_PI, 48, 20.0);
    auto gap = [&](double amp) {
        State s{compatible_field(g, amp, 2.0), 0.0, ModelParams{}};
        return max_abs(sub(assemble_rhs(s).total, linearized_rhs(s).total));
    };
    const double ratio = gap(1e-2) / gap(1e-3);
    REQUIRE(ratio == Catch::Approx(100.0).epsilon(0.05));
}

TEST_CASE("cfl violations are refused with a named bound") {
    GridPtr g = make_grid(64, 2.0 * M_PI, 32, 20.0);
    State s{compatible_field(g, 1e-3, 1.0), 0.0, ModelParams{}};
    SolverOptions opts;
    opts.linearized = true;
    REQUIRE_THROWS_AS(step_imex(s, 0.2, opts), SolverError);
    try {
        step_imex(s, 0.2, opts);
    } catch (const SolverError& e) {
        REQUIRE(std::string(e.what()).find("CFL") != std::string::npos);
        REQUIRE(std::string(e.what()).find("dt <=") != std::string::npos);
    }
    REQUIRE_NOTHROW(step_imex(s, 0.05, opts));
}

TEST_CASE("run_simulation observes at start, cadence, and final short step") {
    GridPtr g = make_grid(8, 2.0 * M_PI, 32, 20.0);
    State s{compatible_field(g, 1e-3, 1.0), 0.0, ModelParams{}};
    std::vector<double> seen;
    auto obs = [&](const State& st, const Tendency&) { seen.push_back(st.t); };
    run_simulation(s, 0.095, 0.01, 3, obs);
    REQUIRE(seen.size() == 5);
    REQUIRE(seen[0] == 0.0);
    REQUIRE(seen[1] == Catch::Approx(0.03).margin(1e-12));
    REQUIRE(seen[2] == Catch::Approx(0.06).margin(1e-12));
    REQUIRE(seen[3] == Catch::Approx(0.09).margin(1e-12));
    REQUIRE(seen[4] == Catch::Approx(0.095).margin(1e-12)); // shorter final step
}

TEST_CASE("run_simulation rejects malformed marching arguments") {
    GridPtr g = make_grid(8, 2.0 * M_PI, 32, 20.0);
    State s{Field(g), 1.0, ModelParams{}};
    REQUIRE_THROWS_AS(run_simulation(s, 2.0, 0.0, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(run_simulation(s, 0.5, 0.01, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(run_simulation(s, 2.0, 0.01, 0), std::invalid_argument);
}

TEST_CASE("boundary application yields a machine-zero robin defect") {
    GridPtr g = make_grid(16, 2.0 * M_PI, 48, 20.0);
    Field f(g, [](double x, double y) { return std::cos(x) * std::exp(-0.3 * y) + 0.2; });
    apply_boundary_conditions(f);
    REQUIRE(robin_defect(f) < 1e-14 * std::max(1.0, max_abs(f)));
    for (std::size_t i = 0; i < g->nx; ++i) REQUIRE(f.at(i, g->ny - 1) == 0.0);
    // uniform-grid closed form of the folded wall row
    const double h = g->y[1] - g->y[0];
    for (std::size_t i = 0; i < g->nx; ++i)
        REQUIRE(f.at(i, 0) ==
                Catch::Approx((4.0 * f.at(i, 1) - f.at(i, 2)) / (3.0 + 2.0 * h)).margin(1e-13));
}

TEST_CASE("primitive stepping pins both walls to zero") {
    GridPtr g = make_grid(16, 2.0 * M_PI, 48, 20.0);
    ModelParams p;
    Field u(g, [](double x, double y) {
        return 1e-3 * (y + y * y) * std::exp(-y) * std::cos(2.0 * x);
    });
    for (std::size_t i = 0; i < g->nx; ++i) {
        u.at(i, 0) = 0.0;
        u.at(i, g->ny - 1) = 0.0;
    }
    Field next = step_primitive(u, 0.0, 1e-3, p);
    for (std::size_t i = 0; i < g->nx; ++i) {
        REQUIRE(next.at(i, 0) == 0.0);
        REQUIRE(next.at(i, g->ny - 1) == 0.0);
    }
    REQUIRE(next.finite());
}

TEST_CASE("forcing drives the interior linearly when all operators are off") {
    GridPtr g = make_grid(8, 2.0 * M_PI, 32, 20.0);
    ModelParams p;
    p.transport_on = false;
    p.damping_on = false;
    p.diffusion_on = false;
    SolverOptions opts;
    opts.forcing = [](double, double, double) { return 1.0; };
    const double dt = 0.25;
    State s{Field(g), 0.0, p};
    State out = step_imex(s, dt, opts);
    for (std::size_t j = 1; j + 1 < g->ny; ++j)
        REQUIRE(out.g.at(3, j) == Catch::Approx(dt).margin(1e-15));
}

TEST_CASE("vorticity residual needs equispaced levels and honors the exclusion") {
    GridPtr g = make_grid(16, 2.0 * M_PI, 64, 20.0);
    const double dt = 2e-3;
    State s{compatible_field(g, 1e-3, 1.0), 0.0, ModelParams{}};
    State mid = step_imex(s, dt);
    State end = step_imex(mid, dt);
    const double full = vorticity_residual(s, mid, end);
    const double inner = vorticity_residual(s, mid, end, 1.0);
    REQUIRE(full >= inner);
    REQUIRE(inner > 0.0);
    REQUIRE(vorticity_residual(s, mid, end, 2.0 * g->ly) == 0.0);

    State skew = end;
    skew.t += 0.5 * dt;
    REQUIRE_THROWS_AS(vorticity_residual(s, mid, skew), std::invalid_argument);
}
