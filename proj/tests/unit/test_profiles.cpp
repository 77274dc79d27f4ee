#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "phlab/phlab.hpp"

using namespace phlab;

TEST_CASE("model parameter validation collects every violation") {
    ModelParams p;
    p.u_bar = -1.0;
    p.alpha = 0.9;
    p.r = 0.5;
    p.tau0 = 0.0;
    try {
        p.validate();
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        REQUIRE(msg.find("u_bar") != std::string::npos);
        REQUIRE(msg.find("alpha") != std::string::npos);
        REQUIRE(msg.find("r must") != std::string::npos);
        REQUIRE(msg.find("tau0") != std::string::npos);
    }
    REQUIRE_NOTHROW(ModelParams{}.validate());
}

TEST_CASE("hartmann profile values and limits") {
    GridPtr g = make_grid(8, 1.0, 65, 20.0);
    Field u1 = hartmann_profile(g, 2.0);
    for (std::size_t j = 0; j < g->ny; ++j)
        REQUIRE(u1.at(3, j) == Catch::Approx(2.0 * (1.0 - std::exp(-g->y[j]))).margin(1e-14));
    REQUIRE(u1.at(0, 0) == 0.0);
    REQUIRE(u1.at(0, g->ny - 1) == Catch::Approx(2.0).epsilon(1e-8));
    REQUIRE_THROWS_AS(hartmann_profile(g, 0.0), std::invalid_argument);
}

TEST_CASE("robin defect vanishes exactly for discretely compatible data") {
    GridPtr g = make_grid(8, 1.0, 65, 10.0);
    Field f(g, [](double x, double y) { return std::exp(-y) * (1.0 + 2.0 * y) * std::cos(x); });
    // overwrite the wall row so the discrete functional is exactly zero
    for (std::size_t i = 0; i < g->nx; ++i)
        f.at(i, 0) = (g->d1_bot[1] * f.at(i, 1) + g->d1_bot[2] * f.at(i, 2)) /
                     (1.0 - g->d1_bot[0]);
    REQUIRE(robin_defect(f) < 1e-14);
}

TEST_CASE("robin defect of sampled compatible data shrinks at second order") {
    auto defect = [](std::size_t ny) {
        GridPtr g = make_grid(8, 1.0, ny, 10.0);
        // d/dy [e^{-y}(1+2y)] = e^{-y}(1 - 2y); at y=0 both value and slope are 1
        Field f(g, [](double, double y) { return std::exp(-y) * (1.0 + 2.0 * y); });
        return robin_defect(f);
    };
    REQUIRE(defect(129) / defect(257) > 3.5);
    REQUIRE(defect(129) / defect(257) < 4.5);
}

TEST_CASE("good unknown of the exact background is exactly zero") {
    GridPtr g = make_grid(16, 2.0 * M_PI, 64, 20.0);
    ModelParams p;
    p.u_bar = 1.7;
    Field u10 = hartmann_profile(g, p.u_bar);
    double defect = -1.0;
    Field g0 = initial_good_unknown(u10, p, &defect);
    REQUIRE(max_abs(g0) == 0.0);
    REQUIRE(defect == 0.0);
}

TEST_CASE("good unknown of a perturbed profile matches the symbolic transform") {
    // u = eps (y + y^2) e^{-y} cos(kx)  =>  g = eps e^{-y} (1 + 2y) cos(kx)
    const double eps = 1e-3, k = 2.0;
    auto err = [&](std::size_t ny) {
        GridPtr g = make_grid(16, 2.0 * M_PI, ny, 20.0);
        ModelParams p;
        Field u10(g, [&](double x, double y) {
            return -std::expm1(-y) + eps * (y + y * y) * std::exp(-y) * std::cos(k * x);
        });
        double defect = 0.0;
        Field g0 = initial_good_unknown(u10, p, &defect);
        Field expect(g, [&](double x, double y) {
            return eps * std::exp(-y) * (1.0 + 2.0 * y) * std::cos(k * x);
        });
        return max_abs(sub(g0, expect));
    };
    const double e1 = err(257), e2 = err(513);
    REQUIRE(e1 < 3e-5);
    REQUIRE(e1 / e2 > 3.4);
    REQUIRE(e1 / e2 < 4.6);
}

TEST_CASE("velocity reconstruction inverts the transform") {
    GridPtr g = make_grid(16, 2.0 * M_PI, 513, 20.0);
    const double k = 2.0;
    Field gf(g, [&](double x, double y) {
        return std::exp(-y) * (1.0 + 2.0 * y) * std::cos(k * x);
    });
    Field u = reconstruct_u(gf);
    // the kernel form integrates e^{z} g, linear in z here, so u is exact
    Field u_expect(g, [&](double x, double y) {
        return std::exp(-y) * (y + y * y) * std::cos(k * x);
    });
    REQUIRE(max_abs(sub(u, u_expect)) < 1e-12);
    for (std::size_t i = 0; i < g->nx; ++i) REQUIRE(u.at(i, 0) == 0.0);

    Field v = reconstruct_v(u);
    Field v_expect(g, [&](double x, double y) {
        return k * std::sin(k * x) * (3.0 - std::exp(-y) * (y * y + 3.0 * y + 3.0));
    });
    REQUIRE(max_abs(sub(v, v_expect)) < 5e-3);
    for (std::size_t i = 0; i < g->nx; ++i) REQUIRE(v.at(i, 0) == 0.0);
}

TEST_CASE("magnetic profile recovery matches the closed form") {
    GridPtr g = make_grid(8, 1.0, 1025, 25.0);
    ModelParams p;
    p.u_bar = 1.0;
    p.b_bar = 0.4;
    Field u1 = hartmann_profile(g, p.u_bar);
    Field b = recover_b(u1, p);
    // b1(y) = b_bar - ∫_y^{ly} e^{-z} dz = b_bar - (e^{-y} - e^{-ly})
    double worst = 0.0;
    for (std::size_t j = 0; j < g->ny; ++j) {
        const double expect = 0.4 - (std::exp(-g->y[j]) - std::exp(-25.0));
        worst = std::max(worst, std::abs(b.at(2, j) - expect));
    }
    REQUIRE(worst < 1e-4);
    REQUIRE(b.at(0, g->ny - 1) == Catch::Approx(0.4).margin(1e-12));
}

TEST_CASE("magnetic recovery refuses an unrelaxed far field") {
    GridPtr g = make_grid(8, 1.0, 65, 8.0); // e^{-8} ~ 3e-4 mismatch
    ModelParams p;
    Field u1 = hartmann_profile(g, p.u_bar);
    REQUIRE_THROWS_AS(recover_b(u1, p), SolverError);
}
