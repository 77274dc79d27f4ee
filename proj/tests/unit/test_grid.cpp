#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "phlab/phlab.hpp"

using namespace phlab;

TEST_CASE("make_grid rejects malformed extents") {
    REQUIRE_THROWS_AS(make_grid(12, 1.0, 32, 5.0), std::invalid_argument); // not a power of two
    REQUIRE_THROWS_AS(make_grid(4, 1.0, 32, 5.0), std::invalid_argument);  // below the minimum
    REQUIRE_THROWS_AS(make_grid(16, 1.0, 15, 5.0), std::invalid_argument);
    REQUIRE_THROWS_AS(make_grid(16, 0.0, 32, 5.0), std::invalid_argument);
    REQUIRE_THROWS_AS(make_grid(16, 1.0, 32, -2.0), std::invalid_argument);
    REQUIRE_THROWS_AS(make_grid(16, 1.0, 32, 5.0, -0.5), std::invalid_argument);
}

TEST_CASE("uniform grid coordinates and wavenumbers") {
    GridPtr g = make_grid(16, 2.0 * M_PI, 33, 10.0);
    REQUIRE(g->dx == Catch::Approx(2.0 * M_PI / 16.0));
    REQUIRE(g->y[0] == 0.0);
    REQUIRE(g->y[32] == 10.0);
    for (std::size_t j = 0; j < g->ny; ++j)
        REQUIRE(g->y[j] == Catch::Approx(10.0 * double(j) / 32.0).margin(1e-14));
    for (std::size_t i = 0; i < g->nx; ++i)
        REQUIRE(g->x(i) == Catch::Approx(g->dx * double(i)));
    REQUIRE(g->nk() == 9);
    for (std::size_t k = 0; k < g->nk(); ++k)
        REQUIRE(g->kx[k] == Catch::Approx(double(k)).margin(1e-14));
}

TEST_CASE("stretched grid clusters nodes at the wall with exact endpoints") {
    GridPtr g = make_grid(8, 1.0, 65, 20.0, 3.0);
    REQUIRE(g->y[0] == 0.0);
    REQUIRE(g->y[64] == 20.0);
    for (std::size_t j = 0; j + 1 < g->ny; ++j) REQUIRE(g->y[j + 1] > g->y[j]);
    // first cell finer, last cell coarser than the uniform spacing
    const double uniform = 20.0 / 64.0;
    REQUIRE(g->y[1] < uniform);
    REQUIRE(g->y[64] - g->y[63] > uniform);
}

TEST_CASE("trapezoid weights integrate constants and linears exactly") {
    for (double stretch : {0.0, 2.0}) {
        GridPtr g = make_grid(8, 1.0, 41, 7.0, stretch);
        double s0 = 0.0, s1 = 0.0;
        for (std::size_t j = 0; j < g->ny; ++j) {
            s0 += g->wy[j];
            s1 += g->wy[j] * g->y[j];
        }
        REQUIRE(s0 == Catch::Approx(7.0).epsilon(1e-14));
        REQUIRE(s1 == Catch::Approx(7.0 * 7.0 / 2.0).epsilon(1e-13));
    }
}

TEST_CASE("interior stencils differentiate quadratics exactly") {
    GridPtr g = make_grid(8, 1.0, 33, 5.0, 1.5); // nonuniform on purpose
    auto p = [](double y) { return 3.0 + 2.0 * y - 0.7 * y * y; };
    for (std::size_t j = 1; j + 1 < g->ny; ++j) {
        const double d1 = g->d1l[j] * p(g->y[j - 1]) + g->d1c[j] * p(g->y[j]) +
                          g->d1r[j] * p(g->y[j + 1]);
        const double d2 = g->d2l[j] * p(g->y[j - 1]) + g->d2c[j] * p(g->y[j]) +
                          g->d2r[j] * p(g->y[j + 1]);
        REQUIRE(d1 == Catch::Approx(2.0 - 1.4 * g->y[j]).margin(1e-10));
        REQUIRE(d2 == Catch::Approx(-1.4).margin(1e-10));
    }
}

TEST_CASE("one-sided wall stencils hit their design order") {
    GridPtr g = make_grid(8, 1.0, 33, 5.0, 1.5);
    auto p = [](double y) { return 3.0 + 2.0 * y - 0.7 * y * y; };
    auto c = [](double y) { return 1.0 - y + 0.5 * y * y + 0.25 * y * y * y; };
    // 3-node first derivative: exact on quadratics at both walls
    const double d1b = g->d1_bot[0] * p(g->y[0]) + g->d1_bot[1] * p(g->y[1]) +
                       g->d1_bot[2] * p(g->y[2]);
    REQUIRE(d1b == Catch::Approx(2.0).margin(1e-10));
    const std::size_t n = g->ny;
    const double d1t = g->d1_top[0] * p(g->y[n - 3]) + g->d1_top[1] * p(g->y[n - 2]) +
                       g->d1_top[2] * p(g->y[n - 1]);
    REQUIRE(d1t == Catch::Approx(2.0 - 1.4 * 5.0).margin(1e-9));
    // 4-node second derivative: exact on cubics
    const double d2b = g->d2_bot[0] * c(g->y[0]) + g->d2_bot[1] * c(g->y[1]) +
                       g->d2_bot[2] * c(g->y[2]) + g->d2_bot[3] * c(g->y[3]);
    REQUIRE(d2b == Catch::Approx(1.0).margin(1e-8)); // c'' = 1 + 1.5 y
    const double d2t = g->d2_top[0] * c(g->y[n - 4]) + g->d2_top[1] * c(g->y[n - 3]) +
                       g->d2_top[2] * c(g->y[n - 2]) + g->d2_top[3] * c(g->y[n - 1]);
    REQUIRE(d2t == Catch::Approx(1.0 + 1.5 * 5.0).margin(1e-8));
}

TEST_CASE("field sampling, layout, and finiteness") {
    GridPtr g = make_grid(8, 2.0, 17, 3.0);
    Field f(g, [](double x, double y) { return x + 10.0 * y; });
    REQUIRE(f.at(3, 5) == Catch::Approx(g->x(3) + 10.0 * g->y[5]));
    REQUIRE(f.v[g->idx(3, 5)] == f.at(3, 5));
    REQUIRE(f.row(5)[3] == f.at(3, 5));
    REQUIRE(g->idx(3, 5) == 5 * 8 + 3); // y-major storage
    REQUIRE(f.finite());
    f.at(0, 0) = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_FALSE(f.finite());
}

TEST_CASE("field algebra helpers") {
    GridPtr g = make_grid(8, 1.0, 17, 2.0);
    Field a(g, [](double x, double y) { return x + y; });
    Field b(g, [](double x, double y) { return 2.0 * x - y; });
    Field s = add(a, b);
    REQUIRE(s.at(4, 7) == Catch::Approx(3.0 * g->x(4)));
    Field d = sub(a, b);
    REQUIRE(d.at(4, 7) == Catch::Approx(2.0 * g->y[7] - g->x(4)));
    Field m = scaled(a, -2.0);
    REQUIRE(m.at(1, 1) == Catch::Approx(-2.0 * (g->x(1) + g->y[1])));
    Field acc = a;
    axpy(acc, 0.5, b);
    REQUIRE(acc.at(2, 3) == Catch::Approx(a.at(2, 3) + 0.5 * b.at(2, 3)));
    REQUIRE(max_abs(scaled(a, 0.0)) == 0.0);

    GridPtr other = make_grid(16, 1.0, 17, 2.0);
    Field c(other);
    REQUIRE_THROWS_AS(add(a, c), std::invalid_argument);
}
