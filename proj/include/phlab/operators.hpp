#pragma once

// Wall-normal operators and quadratures: second-order finite-difference ddy,
// the exponential-kernel integral behind the velocity reconstruction, plain
// cumulative trapezoids, and the exponentially weighted L2 norm.

#include <cmath>
#include <stdexcept>

#include "grid.hpp"

namespace phlab {

/// Wall-normal derivative of order 1 or 2.  Interior rows use the three-point
/// stencils stored on the grid (exact for quadratics); walls use one-sided
/// second-order stencils.
inline Field ddy(const Field& f, int order = 1) {
    if (order != 1 && order != 2)
        throw std::invalid_argument("ddy: order must be 1 or 2");
    const Grid& g = *f.grid;
    Field r(f.grid);
    const std::size_t nx = g.nx, ny = g.ny;
    if (order == 1) {
        for (std::size_t j = 1; j + 1 < ny; ++j) {
            const double a = g.d1l[j], b = g.d1c[j], c = g.d1r[j];
            const double* fm = f.row(j - 1);
            const double* f0 = f.row(j);
            const double* fp = f.row(j + 1);
            double* out = r.row(j);
            for (std::size_t i = 0; i < nx; ++i) out[i] = a * fm[i] + b * f0[i] + c * fp[i];
        }
        for (std::size_t i = 0; i < nx; ++i) {
            r.at(i, 0) = g.d1_bot[0] * f.at(i, 0) + g.d1_bot[1] * f.at(i, 1) +
                         g.d1_bot[2] * f.at(i, 2);
            r.at(i, ny - 1) = g.d1_top[0] * f.at(i, ny - 3) + g.d1_top[1] * f.at(i, ny - 2) +
                              g.d1_top[2] * f.at(i, ny - 1);
        }
    } else {
        for (std::size_t j = 1; j + 1 < ny; ++j) {
            const double a = g.d2l[j], b = g.d2c[j], c = g.d2r[j];
            const double* fm = f.row(j - 1);
            const double* f0 = f.row(j);
            const double* fp = f.row(j + 1);
            double* out = r.row(j);
            for (std::size_t i = 0; i < nx; ++i) out[i] = a * fm[i] + b * f0[i] + c * fp[i];
        }
        for (std::size_t i = 0; i < nx; ++i) {
            r.at(i, 0) = g.d2_bot[0] * f.at(i, 0) + g.d2_bot[1] * f.at(i, 1) +
                         g.d2_bot[2] * f.at(i, 2) + g.d2_bot[3] * f.at(i, 3);
            r.at(i, ny - 1) = g.d2_top[0] * f.at(i, ny - 4) + g.d2_top[1] * f.at(i, ny - 3) +
                              g.d2_top[2] * f.at(i, ny - 2) + g.d2_top[3] * f.at(i, ny - 1);
        }
    }
    return r;
}

/// I(y) = ∫_0^y e^{-rate (y - z)} f(z) dz, evaluated with the stable marching
/// recursion I(y_{j+1}) = e^{-rate h_j} I(y_j) + trapezoid of the integrand on
/// the cell.  The growing factor e^{+y} is never formed.
inline Field exp_kernel_integral(const Field& f, double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exp_kernel_integral: rate must be positive");
    const Grid& g = *f.grid;
    Field r(f.grid); // row 0 is exactly zero
    const std::size_t nx = g.nx;
    for (std::size_t j = 0; j + 1 < g.ny; ++j) {
        const double h = g.y[j + 1] - g.y[j];
        const double decay = std::exp(-rate * h);
        const double* fj = f.row(j);
        const double* fj1 = f.row(j + 1);
        const double* ij = r.row(j);
        double* ij1 = r.row(j + 1);
        for (std::size_t i = 0; i < nx; ++i)
            ij1[i] = decay * ij[i] + 0.5 * h * (decay * fj[i] + fj1[i]);
    }
    return r;
}

/// Cumulative trapezoid from the wall: F(x, y_j) = ∫_0^{y_j} f(x, z) dz.
inline Field cumtrapz_y(const Field& f) {
    const Grid& g = *f.grid;
    Field r(f.grid);
    const std::size_t nx = g.nx;
    for (std::size_t j = 0; j + 1 < g.ny; ++j) {
        const double h = g.y[j + 1] - g.y[j];
        const double* fj = f.row(j);
        const double* fj1 = f.row(j + 1);
        const double* ij = r.row(j);
        double* ij1 = r.row(j + 1);
        for (std::size_t i = 0; i < nx; ++i)
            ij1[i] = ij[i] + 0.5 * h * (fj[i] + fj1[i]);
    }
    return r;
}

/// sqrt( ∬ e^{2 alpha y} f^2 dx dy ) with the grid quadrature (exact in x for
/// band-limited fields, trapezoid in y).  Guards against overflow of the
/// weight itself; the weighted integrand is accumulated as (e^{alpha y} f)^2.
inline double weighted_l2(const Field& f, double alpha) {
    const Grid& g = *f.grid;
    if (alpha * g.ly >= 700.0)
        throw std::invalid_argument("weighted_l2: alpha*ly >= 700 would overflow the weight");
    double acc = 0.0;
    for (std::size_t j = 0; j < g.ny; ++j) {
        const double w = std::exp(alpha * g.y[j]);
        const double* row = f.row(j);
        double rowsum = 0.0;
        for (std::size_t i = 0; i < g.nx; ++i) {
            const double t = w * row[i];
            rowsum += t * t;
        }
        acc += g.wy[j] * rowsum;
    }
    return std::sqrt(acc * g.dx);
}

} // namespace phlab
