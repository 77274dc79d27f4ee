#pragma once

// Tensor-product grid for the Hartmann-layer strip: periodic & uniform in x,
// wall-normal direction on [0, ly] with an optional exponential stretching
// that clusters points near the wall.  The grid owns everything derived from
// the node layout: trapezoid quadrature weights, tangential wavenumbers, and
// the finite-difference stencils used by ddy (three-point interior, one-sided
// second-order stencils at both walls).

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace phlab {

namespace detail {

/// Fornberg finite-difference weights.  Returns c with c[k*n + i] = weight of
/// f(x[i]) in the approximation of the k-th derivative at z, for k = 0..m.
inline std::vector<double> fd_weights(double z, std::span<const double> x, int m) {
    const int n = static_cast<int>(x.size());
    if (n < m + 1) throw std::invalid_argument("fd_weights: need at least m+1 nodes");
    std::vector<double> c(static_cast<std::size_t>(m + 1) * n, 0.0);
    double c1 = 1.0;
    double c4 = x[0] - z;
    c[0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - z;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[static_cast<std::size_t>(k) * n + i] =
                        c1 * (k * c[static_cast<std::size_t>(k - 1) * n + i - 1] -
                              c5 * c[static_cast<std::size_t>(k) * n + i - 1]) / c2;
                c[i] = -c1 * c5 * c[i - 1] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[static_cast<std::size_t>(k) * n + j] =
                    (c4 * c[static_cast<std::size_t>(k) * n + j] -
                     k * c[static_cast<std::size_t>(k - 1) * n + j]) / c3;
            c[j] = c4 * c[j] / c3;
        }
        c1 = c2;
    }
    return c;
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

} // namespace detail

struct Grid {
    std::size_t nx = 0;   ///< tangential points (power of two, >= 8)
    double lx = 0.0;      ///< tangential period
    std::size_t ny = 0;   ///< wall-normal points (>= 16)
    double ly = 0.0;      ///< wall-normal extent
    double stretch = 0.0; ///< 0 = uniform; > 0 clusters nodes near y = 0

    double dx = 0.0;              ///< tangential spacing
    std::vector<double> y;        ///< node coordinates, y[0] = 0, y[ny-1] = ly
    std::vector<double> wy;       ///< trapezoid quadrature weights (positive, sum = ly)
    std::vector<double> kx;       ///< physical wavenumbers 2*pi*k/lx, k = 0..nx/2

    // ddy stencils.  Interior rows j = 1..ny-2 use the three nodes
    // {y[j-1], y[j], y[j+1]}; walls use one-sided stencils of second order
    // (3 nodes for the first derivative, 4 for the second).
    std::vector<double> d1l, d1c, d1r;
    std::vector<double> d2l, d2c, d2r;
    std::array<double, 3> d1_bot{}, d1_top{};
    std::array<double, 4> d2_bot{}, d2_top{};

    double x(std::size_t i) const { return dx * static_cast<double>(i); }
    std::size_t idx(std::size_t i, std::size_t j) const { return j * nx + i; }
    std::size_t nk() const { return nx / 2 + 1; }
    std::size_t size() const { return nx * ny; }
};

using GridPtr = std::shared_ptr<const Grid>;

/// Builds a grid; throws std::invalid_argument on any malformed extent.
inline GridPtr make_grid(std::size_t nx, double lx, std::size_t ny, double ly,
                         double stretch = 0.0) {
    if (!detail::is_power_of_two(nx) || nx < 8)
        throw std::invalid_argument("make_grid: nx must be a power of two >= 8, got " +
                                    std::to_string(nx));
    if (ny < 16)
        throw std::invalid_argument("make_grid: ny must be >= 16, got " + std::to_string(ny));
    if (!(lx > 0.0))
        throw std::invalid_argument("make_grid: lx must be positive");
    if (!(ly > 0.0))
        throw std::invalid_argument("make_grid: ly must be positive");
    if (!(stretch >= 0.0))
        throw std::invalid_argument("make_grid: stretch must be >= 0");

    auto g = std::make_shared<Grid>();
    g->nx = nx;
    g->lx = lx;
    g->ny = ny;
    g->ly = ly;
    g->stretch = stretch;
    g->dx = lx / static_cast<double>(nx);

    g->y.resize(ny);
    const double denom = (stretch > 0.0) ? std::expm1(stretch) : 1.0;
    for (std::size_t j = 0; j < ny; ++j) {
        const double s = static_cast<double>(j) / static_cast<double>(ny - 1);
        g->y[j] = (stretch > 0.0) ? ly * std::expm1(stretch * s) / denom : ly * s;
    }
    g->y[0] = 0.0;
    g->y[ny - 1] = ly; // exact endpoints regardless of the map

    g->wy.assign(ny, 0.0);
    for (std::size_t j = 0; j + 1 < ny; ++j) {
        const double h = g->y[j + 1] - g->y[j];
        g->wy[j] += 0.5 * h;
        g->wy[j + 1] += 0.5 * h;
    }

    g->kx.resize(g->nk());
    for (std::size_t k = 0; k < g->nk(); ++k)
        g->kx[k] = 2.0 * M_PI * static_cast<double>(k) / lx;

    g->d1l.assign(ny, 0.0); g->d1c.assign(ny, 0.0); g->d1r.assign(ny, 0.0);
    g->d2l.assign(ny, 0.0); g->d2c.assign(ny, 0.0); g->d2r.assign(ny, 0.0);
    for (std::size_t j = 1; j + 1 < ny; ++j) {
        const std::array<double, 3> nodes{g->y[j - 1], g->y[j], g->y[j + 1]};
        const auto w = detail::fd_weights(g->y[j], nodes, 2);
        g->d1l[j] = w[3]; g->d1c[j] = w[4]; g->d1r[j] = w[5];
        g->d2l[j] = w[6]; g->d2c[j] = w[7]; g->d2r[j] = w[8];
    }
    {
        const std::array<double, 3> nb{g->y[0], g->y[1], g->y[2]};
        const auto wb = detail::fd_weights(g->y[0], nb, 1);
        g->d1_bot = {wb[3], wb[4], wb[5]};
        const std::array<double, 3> nt{g->y[ny - 3], g->y[ny - 2], g->y[ny - 1]};
        const auto wt = detail::fd_weights(g->y[ny - 1], nt, 1);
        g->d1_top = {wt[3], wt[4], wt[5]};

        const std::array<double, 4> nb2{g->y[0], g->y[1], g->y[2], g->y[3]};
        const auto wb2 = detail::fd_weights(g->y[0], nb2, 2);
        g->d2_bot = {wb2[8], wb2[9], wb2[10], wb2[11]};
        const std::array<double, 4> nt2{g->y[ny - 4], g->y[ny - 3], g->y[ny - 2], g->y[ny - 1]};
        const auto wt2 = detail::fd_weights(g->y[ny - 1], nt2, 2);
        g->d2_top = {wt2[8], wt2[9], wt2[10], wt2[11]};
    }
    return g;
}

/// Real scalar field sampled on a Grid, y-major storage: v[j*nx + i].
struct Field {
    GridPtr grid;
    std::vector<double> v;

    Field() = default;
    explicit Field(GridPtr g) : grid(std::move(g)), v(grid->size(), 0.0) {}
    Field(GridPtr g, const std::function<double(double, double)>& f)
        : grid(std::move(g)), v(grid->size()) {
        for (std::size_t j = 0; j < grid->ny; ++j)
            for (std::size_t i = 0; i < grid->nx; ++i)
                v[grid->idx(i, j)] = f(grid->x(i), grid->y[j]);
    }

    double& at(std::size_t i, std::size_t j) { return v[grid->idx(i, j)]; }
    double at(std::size_t i, std::size_t j) const { return v[grid->idx(i, j)]; }
    double* row(std::size_t j) { return v.data() + j * grid->nx; }
    const double* row(std::size_t j) const { return v.data() + j * grid->nx; }

    bool finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

inline void check_same_grid(const Field& a, const Field& b, const char* op) {
    if (a.grid.get() != b.grid.get() &&
        (a.grid->nx != b.grid->nx || a.grid->ny != b.grid->ny))
        throw std::invalid_argument(std::string(op) + ": fields live on different grids");
}

inline Field& axpy(Field& out, double a, const Field& x) {
    check_same_grid(out, x, "axpy");
    for (std::size_t n = 0; n < out.v.size(); ++n) out.v[n] += a * x.v[n];
    return out;
}

inline Field add(const Field& a, const Field& b) {
    check_same_grid(a, b, "add");
    Field r = a;
    for (std::size_t n = 0; n < r.v.size(); ++n) r.v[n] += b.v[n];
    return r;
}

inline Field sub(const Field& a, const Field& b) {
    check_same_grid(a, b, "sub");
    Field r = a;
    for (std::size_t n = 0; n < r.v.size(); ++n) r.v[n] -= b.v[n];
    return r;
}

inline Field scaled(const Field& a, double s) {
    Field r = a;
    for (double& x : r.v) x *= s;
    return r;
}

inline double max_abs(const Field& a) {
    double m = 0.0;
    for (double x : a.v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace phlab
