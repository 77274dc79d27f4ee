#pragma once

// Analyticity-radius bookkeeping.  The radius obeys
//     d tau / dt = -C (||g||_X + ||g||_Z) / sqrt(tau),
// whose exact consequence  d/dt tau^{3/2} = -(3/2) C (||g||_X + ||g||_Z)
// is integrated step by step, so constant norms integrate exactly.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace phlab {

struct RadiusState {
    double tau = 1.0;   ///< current radius (> 0)
    double tau0 = 1.0;  ///< initial radius
    double c_ode = 1.0; ///< ODE constant C (> 0)
    std::vector<std::pair<double, double>> history; ///< (t, tau) samples

    static RadiusState start(double tau0, double c_ode = 1.0, double t0 = 0.0) {
        if (!(tau0 > 0.0)) throw std::invalid_argument("RadiusState: tau0 must be > 0");
        if (!(c_ode > 0.0)) throw std::invalid_argument("RadiusState: c_ode must be > 0");
        RadiusState rs;
        rs.tau = tau0;
        rs.tau0 = tau0;
        rs.c_ode = c_ode;
        rs.history.emplace_back(t0, tau0);
        return rs;
    }
};

/// Right-hand side of the radius ODE.
inline double radius_rhs(double tau, double normX, double normZ, double c_ode) {
    if (!(tau > 0.0)) throw std::invalid_argument("radius_rhs: tau must be > 0");
    return -c_ode * (normX + normZ) / std::sqrt(tau);
}

/// One exactly-integrable step:
///   tau_new = ( tau^{3/2} - 1.5 C (normX + normZ) dt )^{2/3}.
/// Throws SolverError when the bracket reaches zero (radius collapse).
inline RadiusState step_radius(const RadiusState& rs, double normX, double normZ, double dt) {
    if (!(dt >= 0.0)) throw std::invalid_argument("step_radius: dt must be >= 0");
    if (!(normX >= 0.0 && normZ >= 0.0))
        throw std::invalid_argument("step_radius: norms must be >= 0");
    const double bracket = std::pow(rs.tau, 1.5) - 1.5 * rs.c_ode * (normX + normZ) * dt;
    if (!(bracket > 0.0))
        throw SolverError("step_radius: radius collapse (tau^{3/2} reached " +
                          std::to_string(bracket) + "); the smallness condition was violated");
    RadiusState out = rs;
    out.tau = std::pow(bracket, 2.0 / 3.0);
    const double t_prev = rs.history.empty() ? 0.0 : rs.history.back().first;
    out.history.emplace_back(t_prev + dt, out.tau);
    return out;
}

struct GateResult {
    bool pass = false;
    double margin = 0.0;  ///< tau0/K - C1^{2/3} ||g(0)||_X^{2/3}
};

/// Smallness condition guaranteeing the radius stays above tau0/2:
/// tau0 / K > C1^{2/3} ||g(0)||_X^{2/3} with K = (2 sqrt 2)^{2/3} / (2 sqrt 2 - 1)^{2/3}.
inline GateResult smallness_gate(double tau0, double g0_norm_X, double c1 = 1.0) {
    if (!(tau0 > 0.0)) throw std::invalid_argument("smallness_gate: tau0 must be > 0");
    if (!(g0_norm_X >= 0.0)) throw std::invalid_argument("smallness_gate: norm must be >= 0");
    if (!(c1 > 0.0)) throw std::invalid_argument("smallness_gate: c1 must be > 0");
    const double two_sqrt2 = 2.0 * std::sqrt(2.0);
    const double K = std::pow(two_sqrt2 / (two_sqrt2 - 1.0), 2.0 / 3.0);
    GateResult r;
    r.margin = tau0 / K - std::pow(c1, 2.0 / 3.0) * std::pow(g0_norm_X, 2.0 / 3.0);
    r.pass = r.margin > 0.0;
    return r;
}

/// True when every recorded radius stayed above tau0 / 2.
inline bool half_radius_check(const RadiusState& rs) {
    for (const auto& [t, tau] : rs.history)
        if (!(tau > 0.5 * rs.tau0)) return false;
    return true;
}

} // namespace phlab
