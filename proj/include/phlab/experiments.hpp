#pragma once

// Scenario assembly and the laboratory experiments.
//
//  * build_initial_state: perturbation synthesis + the wall projection that
//    makes the data exactly compatible with the discrete no-slip and Robin
//    conditions.
//  * run_decay_experiment: records the full norm set along a run while
//    integrating the analyticity-radius ODE with an implicit trapezoid whose
//    fixed point is iterated to 1e-13, so the recorded radius and the
//    trapezoid of the recorded norms satisfy the integrated relation
//    tau^{3/2}(t) - tau0^{3/2} = -(3/2) C ∫ (X+Z) ds to machine precision.
//  * run_uniqueness_experiment: the scenario and the same scenario plus a
//    secondary single-mode kick marched in lockstep; the difference is
//    measured at a radius tau_bar driven by the first solution's recorded
//    norms, starting from tau0/4.
//  * run_comparison: damped vs undamped decay-rate difference.
//  * run_convergence_study: manufactured-solution orders in dy and dt.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "norms.hpp"
#include "radius.hpp"
#include "records.hpp"

namespace phlab {

// ---------------------------------------------------------------------------
// Initial data

namespace detail {

/// Wall functional R[g] = (ddy g - g)|_{y=0} on one x column.
inline double robin_functional(const Field& f, std::size_t i) {
    const Grid& g = *f.grid;
    return g.d1_bot[0] * f.at(i, 0) + g.d1_bot[1] * f.at(i, 1) + g.d1_bot[2] * f.at(i, 2) -
           f.at(i, 0);
}

inline Field good_unknown_of(const Field& u) {
    Field g = ddy(u, 1);
    for (std::size_t n = 0; n < g.v.size(); ++n) g.v[n] += u.v[n];
    return g;
}

/// Adds a(x) e^{-y} + b(x) y e^{-y} to the perturbation velocity so that the
/// wall values vanish (no-slip) and the discrete good unknown satisfies the
/// Robin condition exactly.  The corrector basis is chosen because
/// (d_y + 1)[e^{-y}(a + b y)] = b e^{-y}: the first column controls the wall
/// velocity without touching the continuous good unknown, the second tunes
/// the Robin defect.  The 2x2 system is solved with the grid's own stencils,
/// so the residual is pure roundoff.
inline Field wall_project(const Field& u_raw) {
    GridPtr grid = u_raw.grid;
    const Field c1(grid, [](double, double y) { return std::exp(-y); });
    const Field c2(grid, [](double, double y) { return y * std::exp(-y); });
    const Field gc1 = good_unknown_of(c1);
    const Field gc2 = good_unknown_of(c2);
    const double rho1 = robin_functional(gc1, 0);
    const double rho2 = robin_functional(gc2, 0);
    if (std::abs(rho2) < 1e-6)
        throw SolverError("wall_project: degenerate Robin response of the corrector basis");
    const Field graw = good_unknown_of(u_raw);
    Field u = u_raw;
    for (std::size_t i = 0; i < grid->nx; ++i) {
        const double a = -u_raw.at(i, 0);
        const double b = -(robin_functional(graw, i) + rho1 * a) / rho2;
        for (std::size_t j = 0; j < grid->ny; ++j)
            u.at(i, j) += a * c1.at(0, j) + b * c2.at(0, j);
    }
    return u;
}

/// Raw perturbation velocity before the wall projection.
inline Field perturbation_velocity(GridPtr grid, const ScenarioConfig& cfg) {
    const auto& p = cfg.perturbation;
    const Grid& g = *grid;
    auto env = [&](double y) {
        const double s = (y - p.y_center) / p.y_width;
        return std::exp(-s * s);
    };
    Field u(grid);
    switch (p.type) {
    case PerturbationType::mode: {
        if (p.wavenumber == 0) {
            for (std::size_t j = 0; j < g.ny; ++j) {
                const double val = p.amplitude * env(g.y[j]);
                double* row = u.row(j);
                for (std::size_t i = 0; i < g.nx; ++i) row[i] = val;
            }
        } else {
            const double k = g.kx[p.wavenumber];
            for (std::size_t j = 0; j < g.ny; ++j) {
                const double e = p.amplitude * env(g.y[j]);
                double* row = u.row(j);
                for (std::size_t i = 0; i < g.nx; ++i) row[i] = e * std::sin(k * g.x(i));
            }
        }
        break;
    }
    case PerturbationType::gaussian_packet: {
        const double k0 = static_cast<double>(std::max<std::size_t>(1, p.wavenumber));
        const std::size_t kmax = std::max<std::size_t>(1, g.nx / 3);
        for (std::size_t j = 0; j < g.ny; ++j) {
            const double e = p.amplitude * env(g.y[j]);
            double* row = u.row(j);
            for (std::size_t i = 0; i < g.nx; ++i) {
                double acc = 0.0;
                for (std::size_t m = 1; m <= kmax; ++m) {
                    const double rel = static_cast<double>(m) / k0;
                    acc += std::exp(-rel * rel) * std::sin(g.kx[m] * g.x(i));
                }
                row[i] = e * acc;
            }
        }
        break;
    }
    case PerturbationType::random_band: {
        std::mt19937_64 rng(cfg.run.seed);
        std::uniform_real_distribution<double> amp_dist(0.5, 1.0);
        std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * M_PI);
        const std::size_t lo = p.band_lo, hi = std::min(p.band_hi, g.nx / 2);
        const double count = static_cast<double>(hi - lo + 1);
        std::vector<double> amps, phases;
        for (std::size_t m = lo; m <= hi; ++m) {
            amps.push_back(amp_dist(rng) * p.amplitude / count);
            phases.push_back(phase_dist(rng));
        }
        for (std::size_t j = 0; j < g.ny; ++j) {
            const double e = env(g.y[j]);
            double* row = u.row(j);
            for (std::size_t i = 0; i < g.nx; ++i) {
                double acc = 0.0;
                for (std::size_t m = lo; m <= hi; ++m)
                    acc += amps[m - lo] * std::sin(g.kx[m] * g.x(i) + phases[m - lo]);
                row[i] = e * acc;
            }
        }
        break;
    }
    }
    return u;
}

} // namespace detail

struct InitialData {
    State state;          ///< good-unknown state at t = 0
    Field u_pert;         ///< projected perturbation velocity
    GateResult gate;      ///< smallness condition at tau0 (advisory)
    double robin_residual = 0.0;
    double norm_X0 = 0.0; ///< ||g(0)||_X at tau0
};

namespace detail {

/// Projects a raw perturbation velocity and assembles the initial data.  The
/// background drops out of the good-unknown transform identically, so g is
/// built from the perturbation alone.  Forming u_bar(1-e^{-y}) + u and
/// subtracting the background again (initial_good_unknown on the full
/// profile) would quantize a small perturbation at eps(u_bar) and leak
/// broadband roundoff into the weighted spectra.
inline InitialData initial_from_velocity(const Field& u_raw, const ModelParams& mp, double c1) {
    InitialData init;
    init.u_pert = wall_project(u_raw);
    Field g0 = good_unknown_of(init.u_pert);
    init.robin_residual = robin_defect(g0);
    init.state = State{std::move(g0), 0.0, mp};
    NormParams np;
    np.r = mp.r;
    np.tau = mp.tau0;
    np.alpha = mp.alpha;
    init.norm_X0 = norm_X(init.state.g, np);
    init.gate = smallness_gate(mp.tau0, init.norm_X0, c1);
    return init;
}

} // namespace detail

/// Builds the initial good-unknown state for a scenario.  The perturbation is
/// synthesized, wall-projected, and pushed through the good-unknown transform.
/// A failing smallness gate is reported, not fatal.
inline InitialData build_initial_state(const ScenarioConfig& cfg) {
    detail::validate_config(cfg);
    GridPtr grid = make_grid(cfg.grid.nx, cfg.grid.lx, cfg.grid.ny, cfg.grid.ly, cfg.grid.stretch);
    return detail::initial_from_velocity(detail::perturbation_velocity(grid, cfg),
                                         cfg.model_params(), cfg.model.c1);
}

// ---------------------------------------------------------------------------
// Rate fitting

/// Least-squares slope of -ln v against t over [t_start, t_end]; requires at
/// least 8 strictly positive samples in the window.
inline double fit_decay_rate(const std::vector<double>& t, const std::vector<double>& v,
                             double t_start, double t_end) {
    if (t.size() != v.size()) throw std::invalid_argument("fit_decay_rate: size mismatch");
    std::vector<double> ts, ln;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] >= t_start && t[i] <= t_end && v[i] > 0.0) {
            ts.push_back(t[i]);
            ln.push_back(std::log(v[i]));
        }
    if (ts.size() < 8)
        throw std::invalid_argument("fit_decay_rate: need at least 8 positive samples in the "
                                    "fit window");
    double tm = 0.0, lm = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) { tm += ts[i]; lm += ln[i]; }
    tm /= static_cast<double>(ts.size());
    lm /= static_cast<double>(ts.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        num += (ts[i] - tm) * (ln[i] - lm);
        den += (ts[i] - tm) * (ts[i] - tm);
    }
    if (den == 0.0) throw std::invalid_argument("fit_decay_rate: degenerate time window");
    return -num / den;
}

struct SeriesPoint {
    double t = 0.0;
    double value = 0.0;
};

inline double fit_decay_rate(const std::vector<SeriesPoint>& s, double t_start, double t_end) {
    std::vector<double> t, v;
    t.reserve(s.size());
    v.reserve(s.size());
    for (const auto& p : s) { t.push_back(p.t); v.push_back(p.value); }
    return fit_decay_rate(t, v, t_start, t_end);
}

inline std::vector<double> record_column(const std::vector<RunRecord>& rs,
                                         double RunRecord::*member) {
    std::vector<double> out;
    out.reserve(rs.size());
    for (const auto& r : rs) out.push_back(r.*member);
    return out;
}

/// ||e^{alpha y} g||_{L2} sampled along a run (observer cadence as in
/// run_simulation).
inline std::vector<SeriesPoint> weighted_norm_series(State s, double t_end, double dt,
                                                     std::size_t observe_every, double alpha,
                                                     const SolverOptions& opts = {}) {
    std::vector<SeriesPoint> out;
    Observer obs = [&out, alpha](const State& st, const Tendency&) {
        out.push_back({st.t, weighted_l2(st.g, alpha)});
    };
    run_simulation(std::move(s), t_end, dt, observe_every, obs, opts);
    return out;
}

// ---------------------------------------------------------------------------
// The recorder

namespace detail {

/// Assembles RunRecords along a run.  The radius is advanced per observation
/// with an implicit trapezoid in tau^{3/2}; the recorded radius is computed
/// from the recorded norms, so replaying the trapezoid over the record series
/// reproduces the tau column exactly.
class NormRecorder {
  public:
    NormRecorder(GridPtr grid, const ModelParams& mp, double c_ode, double tau_start,
                 double t_start)
        : grid_(std::move(grid)), c_ode_(c_ode),
          radius_(RadiusState::start(tau_start, c_ode > 0.0 ? c_ode : 1.0, t_start)) {
        if (!(c_ode >= 0.0))
            throw std::invalid_argument("NormRecorder: c_ode must be >= 0");
        radius_.c_ode = c_ode; // C = 0 freezes the radius
        np_.r = mp.r;
        np_.alpha = mp.alpha;
        np_.tau = tau_start;
        k_hi_ = std::min(grid_->nx / 2, std::max<std::size_t>(4, grid_->nx / 3));
    }

    const std::vector<RunRecord>& records() const { return records_; }
    const RadiusState& radius() const { return radius_; }

    /// Radius driven by this run's own norms (implicit trapezoid fixed point).
    void add_self(const State& s) {
        double tau_new = radius_.tau;
        if (!records_.empty()) {
            const double t_prev = radius_.history.back().first;
            const double dt = s.t - t_prev;
            if (!(dt > 0.0))
                throw SolverError("norm recorder: observation times must strictly increase");
            const double n_prev = records_.back().normX + records_.back().normZ;
            const double a = std::pow(radius_.tau, 1.5) - 0.75 * c_ode_ * dt * n_prev;
            const double b = 0.75 * c_ode_ * dt;
            const SpectralField sf = to_spectral(s.g);
            const ModeData md = build_mode_data(sf, np_.alpha);
            ModeData mdz = build_mode_data(to_spectral(ddy(s.g, 1)), np_.alpha);
            mdz.keep = md.keep; // Z shares the keep-mask of g itself
            double tau_c = radius_.tau;
            for (int it = 0;; ++it) {
                const double x = std::sqrt(
                    weighted_sum(md, *grid_, tau_c, np_.r, SeriesKind::X, np_.series_tol));
                const double z = std::sqrt(
                    weighted_sum(mdz, *grid_, tau_c, np_.r, SeriesKind::X, np_.series_tol));
                const double bracket = a - b * (x + z);
                if (!(bracket > 0.0))
                    throw SolverError("radius collapse during the trapezoid update at t = " +
                                      std::to_string(s.t));
                const double next = std::pow(bracket, 2.0 / 3.0);
                const double delta = std::abs(next - tau_c);
                tau_c = next;
                if (delta <= 1e-13 * tau_c) break;
                if (it >= 60)
                    throw SolverError("radius trapezoid fixed point stalled at t = " +
                                      std::to_string(s.t));
            }
            // The recorded radius is recomputed from the recorded norms so the
            // integrated relation holds exactly over the record series.
            np_.tau = tau_c;
            const NormReport rep = norms_weight_route(s.g, np_);
            const double bracket = a - b * (rep.norm_X + rep.norm_Z);
            if (!(bracket > 0.0))
                throw SolverError("radius collapse during the trapezoid update at t = " +
                                  std::to_string(s.t));
            tau_new = std::pow(bracket, 2.0 / 3.0);
            radius_.tau = tau_new;
            radius_.history.emplace_back(s.t, tau_new);
            finish(s.g, s.t, tau_new, rep);
            return;
        }
        np_.tau = tau_new;
        finish(s.g, s.t, tau_new, norms_weight_route(s.g, np_));
    }

    /// Radius driven by an external norm series (exact trapezoid, no fixed
    /// point needed because the drive does not depend on this radius).
    void add_driven(const Field& f, double t, double drive_prev, double drive_cur) {
        double tau_new = radius_.tau;
        if (!records_.empty()) {
            const double t_prev = radius_.history.back().first;
            const double dt = t - t_prev;
            if (!(dt > 0.0))
                throw SolverError("norm recorder: observation times must strictly increase");
            const double bracket =
                std::pow(radius_.tau, 1.5) - 0.75 * c_ode_ * dt * (drive_prev + drive_cur);
            if (!(bracket > 0.0))
                throw SolverError("radius collapse in the driven trapezoid at t = " +
                                  std::to_string(t));
            tau_new = std::pow(bracket, 2.0 / 3.0);
            radius_.tau = tau_new;
            radius_.history.emplace_back(t, tau_new);
        }
        np_.tau = tau_new;
        finish(f, t, tau_new, norms_weight_route(f, np_));
    }

  private:
    void finish(const Field& f, double t, double tau, const NormReport& rep) {
        RunRecord r;
        r.t = t;
        r.normX = rep.norm_X;
        r.normY = rep.norm_Y;
        r.normZ = rep.norm_Z;
        r.normD = rep.norm_D;
        r.boundary_trace = rep.boundary_trace;
        r.l2 = weighted_l2(f, 0.0);
        r.linf = max_abs(f);
        r.tau = tau;
        try {
            r.tau_spectral = estimate_radius_from_spectrum(f, 1, k_hi_);
        } catch (const std::invalid_argument&) {
            r.tau_spectral = 0.0; // too few active modes to fit a slope
        }
        xz_history_.push_back({t, rep.norm_X, rep.norm_Z});
        r.lyapunov = lyapunov_functional(xz_history_, np_.alpha).back();
        r.robin_residual = robin_defect(f);
        records_.push_back(r);
    }

    GridPtr grid_;
    NormParams np_;
    double c_ode_;
    RadiusState radius_;
    std::size_t k_hi_;
    std::vector<RunRecord> records_;
    std::vector<std::array<double, 3>> xz_history_;
};

} // namespace detail

// ---------------------------------------------------------------------------
// Decay experiment

struct DecayReport {
    std::vector<RunRecord> records;
    RadiusState radius;
    GateResult gate;
    double robin_initial = 0.0;
    double fitted_rate = 0.0;         ///< on the normX column
    bool fit_valid = false;
    double lyapunov_drift = 0.0;      ///< max positive dE/dt, relative to E(0)
    double integrated_residual = 0.0; ///< relative defect of the tau^{3/2} relation
    bool half_radius_ok = true;
    State final_state;
    std::string csv;
};

namespace detail {

inline double lyapunov_drift_of(const std::vector<RunRecord>& rs) {
    if (rs.size() < 2 || rs.front().lyapunov <= 0.0) return 0.0;
    const double e0 = rs.front().lyapunov;
    double drift = 0.0;
    for (std::size_t i = 1; i < rs.size(); ++i) {
        const double dt = rs[i].t - rs[i - 1].t;
        if (!(dt > 0.0)) continue;
        drift = std::max(drift, (rs[i].lyapunov - rs[i - 1].lyapunov) / (dt * e0));
    }
    return drift;
}

inline double integrated_radius_residual(const std::vector<RunRecord>& rs, double c_ode) {
    if (rs.size() < 2) return 0.0;
    double integral = 0.0;
    for (std::size_t i = 1; i < rs.size(); ++i)
        integral += 0.5 * (rs[i].t - rs[i - 1].t) *
                    ((rs[i - 1].normX + rs[i - 1].normZ) + (rs[i].normX + rs[i].normZ));
    const double lhs = std::pow(rs.back().tau, 1.5) - std::pow(rs.front().tau, 1.5);
    const double rhs = -1.5 * c_ode * integral;
    return std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-12});
}

} // namespace detail

inline DecayReport run_decay_experiment(const ScenarioConfig& cfg) {
    InitialData init = build_initial_state(cfg);
    const ModelParams mp = init.state.params;
    detail::NormRecorder rec(init.state.g.grid, mp, cfg.model.c_ode, mp.tau0, init.state.t);
    SolverOptions opts;
    opts.linearized = cfg.run.linear;
    Observer obs = [&rec](const State& s, const Tendency&) { rec.add_self(s); };
    State fin = run_simulation(init.state, cfg.run.t_end, cfg.run.dt, cfg.run.observe_every,
                               obs, opts);

    DecayReport rep;
    rep.records = rec.records();
    rep.radius = rec.radius();
    rep.gate = init.gate;
    rep.robin_initial = init.robin_residual;
    const double fit_end = cfg.run.fit_t_end > 0.0 ? cfg.run.fit_t_end : cfg.run.t_end;
    try {
        rep.fitted_rate = fit_decay_rate(record_column(rep.records, &RunRecord::t),
                                         record_column(rep.records, &RunRecord::normX),
                                         cfg.run.fit_t_start, fit_end);
        rep.fit_valid = true;
    } catch (const std::invalid_argument&) {
        rep.fitted_rate = 0.0;
        rep.fit_valid = false;
    }
    rep.lyapunov_drift = detail::lyapunov_drift_of(rep.records);
    rep.integrated_residual = detail::integrated_radius_residual(rep.records, cfg.model.c_ode);
    rep.half_radius_ok = half_radius_check(rep.radius);
    rep.final_state = std::move(fin);
    rep.csv = records_to_csv(rep.records);
    return rep;
}

/// Writes records.csv / records.ndjson / the checkpoint per the output block.
inline void write_run_outputs(const ScenarioConfig& cfg, const DecayReport& rep) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output.dir);
    if (cfg.output.csv)
        write_text_file((fs::path(cfg.output.dir) / "records.csv").string(), rep.csv);
    if (cfg.output.ndjson)
        write_text_file((fs::path(cfg.output.dir) / "records.ndjson").string(),
                        records_to_ndjson(rep.records));
    if (!cfg.output.checkpoint.empty()) {
        fs::path p(cfg.output.checkpoint);
        if (p.is_relative()) p = fs::path(cfg.output.dir) / p;
        write_checkpoint(p.string(), rep.final_state, rep.radius.tau);
    }
}

// ---------------------------------------------------------------------------
// Uniqueness experiment

struct UniquenessReport {
    std::vector<RunRecord> run1, run2, diff;
    GateResult gate1, gate2;
    double diff_rate = 0.0;  ///< fitted contraction rate of the difference X norm
    bool fit_valid = false;
    double max_growth = 0.0; ///< max_t ||d(t)||_X / ||d(0)||_X
    bool trivial = false;    ///< the two runs started identical
    std::string csv1, csv2, csv_diff;
};

/// Marches the primary scenario and the same scenario plus a secondary
/// single-mode kick (amplitude2 at wavenumber2) in lockstep with a shared
/// stepper configuration, so the difference field measures the response to
/// the secondary perturbation alone.  The difference is recorded at the
/// radius tau_bar, which starts at tau0/4 and is driven by the first run's
/// recorded norms at its own radius.
inline UniquenessReport run_uniqueness_experiment(const ScenarioConfig& cfg) {
    detail::validate_config(cfg);
    InitialData i1 = build_initial_state(cfg);
    const ModelParams mp = i1.state.params;
    GridPtr grid = i1.state.g.grid;
    ScenarioConfig sec = cfg;
    sec.perturbation.type = PerturbationType::mode;
    sec.perturbation.amplitude = cfg.perturbation.amplitude2;
    sec.perturbation.wavenumber = cfg.perturbation.wavenumber2;
    InitialData i2 = detail::initial_from_velocity(
        add(detail::perturbation_velocity(grid, cfg), detail::perturbation_velocity(grid, sec)),
        mp, cfg.model.c1);

    detail::NormRecorder r1(grid, mp, cfg.model.c_ode, mp.tau0, 0.0);
    detail::NormRecorder r2(grid, mp, cfg.model.c_ode, mp.tau0, 0.0);
    detail::NormRecorder rd(grid, mp, cfg.model.c_ode, mp.tau0 / 4.0, 0.0);

    auto observe = [&](const State& a, const State& b) {
        r1.add_self(a);
        r2.add_self(b);
        const auto& rs = r1.records();
        const double n_cur = rs.back().normX + rs.back().normZ;
        const double n_prev =
            rs.size() >= 2 ? rs[rs.size() - 2].normX + rs[rs.size() - 2].normZ : n_cur;
        rd.add_driven(sub(a.g, b.g), a.t, n_prev, n_cur);
    };

    SolverOptions opts;
    opts.linearized = cfg.run.linear;
    const auto mode = cfg.run.linear ? detail::StepMode::linearized
                                     : detail::StepMode::good_unknown;
    detail::ImexStepper stepper(grid, mp, cfg.run.dt, mode, opts);
    State a = std::move(i1.state);
    State b = std::move(i2.state);
    observe(a, b);

    const double dt = cfg.run.dt, t_end = cfg.run.t_end;
    const double eps = 1e-6 * dt;
    std::size_t step_index = 0;
    while (a.t < t_end - eps) {
        const double remaining = t_end - a.t;
        try {
            if (remaining >= dt - eps) {
                stepper.step(a);
                stepper.step(b);
            } else {
                detail::ImexStepper last(grid, mp, remaining, mode, opts);
                last.step(a);
                last.step(b);
            }
        } catch (const SolverError& e) {
            throw SolverError("step " + std::to_string(step_index + 1) + ": " + e.what());
        }
        b.t = a.t;
        ++step_index;
        if (a.t >= t_end - eps || step_index % cfg.run.observe_every == 0) observe(a, b);
    }

    UniquenessReport rep;
    rep.run1 = r1.records();
    rep.run2 = r2.records();
    rep.diff = rd.records();
    rep.gate1 = i1.gate;
    rep.gate2 = i2.gate;
    const double d0 = rep.diff.front().normX;
    const double scale = std::max({rep.run1.front().normX, rep.run2.front().normX, 1e-300});
    if (d0 <= 1e-13 * scale) {
        rep.trivial = true;
        rep.max_growth = 0.0;
    } else {
        for (const auto& r : rep.diff) rep.max_growth = std::max(rep.max_growth, r.normX / d0);
        const double fit_end = cfg.run.fit_t_end > 0.0 ? cfg.run.fit_t_end : cfg.run.t_end;
        try {
            rep.diff_rate = fit_decay_rate(record_column(rep.diff, &RunRecord::t),
                                           record_column(rep.diff, &RunRecord::normX),
                                           cfg.run.fit_t_start, fit_end);
            rep.fit_valid = true;
        } catch (const std::invalid_argument&) {
            rep.fit_valid = false;
        }
    }
    rep.csv1 = records_to_csv(rep.run1);
    rep.csv2 = records_to_csv(rep.run2);
    rep.csv_diff = records_to_csv(rep.diff);
    return rep;
}

inline void write_uniqueness_outputs(const ScenarioConfig& cfg, const UniquenessReport& rep) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output.dir);
    const fs::path dir(cfg.output.dir);
    if (cfg.output.csv) {
        write_text_file((dir / "run1.csv").string(), rep.csv1);
        write_text_file((dir / "run2.csv").string(), rep.csv2);
        write_text_file((dir / "diff.csv").string(), rep.csv_diff);
    }
    if (cfg.output.ndjson) {
        write_text_file((dir / "run1.ndjson").string(), records_to_ndjson(rep.run1));
        write_text_file((dir / "run2.ndjson").string(), records_to_ndjson(rep.run2));
        write_text_file((dir / "diff.ndjson").string(), records_to_ndjson(rep.diff));
    }
}

// ---------------------------------------------------------------------------
// Damped / undamped comparison

struct ComparisonReport {
    double rate_damped = 0.0;
    double rate_undamped = 0.0;
    double difference = 0.0; ///< rate_damped - rate_undamped
    std::vector<SeriesPoint> series_damped, series_undamped;
};

inline ComparisonReport run_comparison(const ScenarioConfig& cfg) {
    detail::validate_config(cfg);
    InitialData init = build_initial_state(cfg);
    SolverOptions opts;
    opts.linearized = cfg.run.linear;
    auto one = [&](bool damping) {
        State s = init.state;
        s.params.damping_on = damping;
        return weighted_norm_series(std::move(s), cfg.run.t_end, cfg.run.dt,
                                    cfg.run.observe_every, cfg.model.alpha, opts);
    };
    ComparisonReport rep;
    rep.series_damped = one(true);
    rep.series_undamped = one(false);
    const double fit_end = cfg.run.fit_t_end > 0.0 ? cfg.run.fit_t_end : cfg.run.t_end;
    rep.rate_damped = fit_decay_rate(rep.series_damped, cfg.run.fit_t_start, fit_end);
    rep.rate_undamped = fit_decay_rate(rep.series_undamped, cfg.run.fit_t_start, fit_end);
    rep.difference = rep.rate_damped - rep.rate_undamped;
    return rep;
}

// ---------------------------------------------------------------------------
// Manufactured solution and the convergence study

namespace mms {

/// g*(t,x,y) = e^{-t} e^{-y} (1+2y) cos(kx): Robin-compatible at the wall,
/// exponentially small at the far field.
inline double g_exact(double t, double x, double y, double k) {
    return std::exp(-t) * std::exp(-y) * (1.0 + 2.0 * y) * std::cos(k * x);
}

/// Its reconstructed velocity u* = ∫_0^y e^{-(y-z)} g* dz = e^{-t}cos(kx) e^{-y}(y+y^2).
inline double u_exact(double t, double x, double y, double k) {
    return std::exp(-t) * std::cos(k * x) * std::exp(-y) * (y + y * y);
}

/// v* = -∫_0^y d_x u* dz = k e^{-t} sin(kx) (3 - e^{-y}(y^2+3y+3)).
inline double v_exact(double t, double x, double y, double k) {
    return k * std::exp(-t) * std::sin(k * x) * (3.0 - std::exp(-y) * (y * y + 3.0 * y + 3.0));
}

/// Forcing that makes g* an exact solution: because d_t g* = -g*, the damping
/// term cancels and F = (u1 + u*) d_x g* + v* d_y g* - d2y g*.
inline Forcing make_forcing(double k, double u_bar) {
    return [k, u_bar](double t, double x, double y) {
        const double ey = std::exp(-y);
        const double et = std::exp(-t);
        const double c = std::cos(k * x), s = std::sin(k * x);
        const double gx = -k * et * ey * (1.0 + 2.0 * y) * s;
        const double gy = et * c * ey * (1.0 - 2.0 * y);
        const double gyy = et * c * ey * (2.0 * y - 3.0);
        const double u = et * c * ey * (y + y * y);
        const double v = k * et * s * (3.0 - ey * (y * y + 3.0 * y + 3.0));
        const double shear = -std::expm1(-y) * u_bar;
        return (shear + u) * gx + v * gy - gyy;
    };
}

} // namespace mms

struct OrderLevel {
    double h = 0.0;     ///< grid spacing or time step
    double error = 0.0; ///< max-norm error (spatial) or solution difference (temporal)
};

struct ConvergenceReport {
    std::vector<OrderLevel> spatial;  ///< error vs exact solution at T
    std::vector<double> spatial_orders;
    std::vector<OrderLevel> temporal; ///< successive solution differences
    std::vector<double> temporal_orders;
};

/// Manufactured-solution convergence study.  Spatial: ny in {64,128,256} at
/// dt = 1e-3 (temporal error negligible), error against g*(T).  Temporal:
/// dt in {0.1, 0.05, 0.025} on one grid; differences of successive solutions
/// cancel the shared spatial error, so log2 of their ratio is the time order.
inline ConvergenceReport run_convergence_study(const ScenarioConfig& cfg) {
    detail::validate_config(cfg);
    const double kphys =
        2.0 * M_PI * static_cast<double>(std::max<std::size_t>(1, cfg.perturbation.wavenumber)) /
        cfg.grid.lx;
    ModelParams mp = cfg.model_params();
    mp.damping_on = mp.transport_on = mp.diffusion_on = true; // the study needs all terms
    SolverOptions opts;
    opts.forcing = mms::make_forcing(kphys, mp.u_bar);

    ConvergenceReport rep;
    const std::size_t nx = 16; // small tangential grid keeps CFL safe at dt = 0.1
    {
        // ny - 1 doubles exactly, so h halves exactly and log2 of the error
        // ratio is the observed order.  The max error sits on the wall row,
        // whose closure constant approaches its h^2 asymptote slowly, so the
        // study starts fine enough to be inside the asymptotic range.
        const double T = 0.25, dt = 1e-3;
        for (std::size_t ny : {std::size_t{193}, std::size_t{385}, std::size_t{769}}) {
            GridPtr grid = make_grid(nx, cfg.grid.lx, ny, cfg.grid.ly, cfg.grid.stretch);
            State s{Field(grid, [&](double x, double y) { return mms::g_exact(0.0, x, y, kphys); }),
                    0.0, mp};
            s = run_simulation(std::move(s), T, dt, 1000000, {}, opts);
            const Field exact(grid,
                              [&](double x, double y) { return mms::g_exact(T, x, y, kphys); });
            rep.spatial.push_back(
                {cfg.grid.ly / static_cast<double>(ny - 1), max_abs(sub(s.g, exact))});
        }
        for (std::size_t l = 1; l < rep.spatial.size(); ++l)
            rep.spatial_orders.push_back(
                std::log2(rep.spatial[l - 1].error / rep.spatial[l].error));
    }
    {
        const double T = 1.0;
        GridPtr grid = make_grid(nx, cfg.grid.lx, 256, cfg.grid.ly, cfg.grid.stretch);
        const Field g0(grid, [&](double x, double y) { return mms::g_exact(0.0, x, y, kphys); });
        std::vector<Field> finals;
        for (double dt : {0.1, 0.05, 0.025}) {
            State s{g0, 0.0, mp};
            s = run_simulation(std::move(s), T, dt, 1000000, {}, opts);
            finals.push_back(std::move(s.g));
        }
        const double d1 = max_abs(sub(finals[0], finals[1]));
        const double d2 = max_abs(sub(finals[1], finals[2]));
        rep.temporal.push_back({0.1, d1});
        rep.temporal.push_back({0.05, d2});
        rep.temporal_orders.push_back(std::log2(d1 / d2));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Radius replay (the `radius <csv>` operation and the integrated relation)

struct RadiusReplay {
    std::vector<double> t, tau_recorded, tau_replayed;
    double max_rel_dev = 0.0;
};

/// Re-integrates the radius ODE from the recorded normX + normZ columns with
/// the trapezoid rule, starting from the first recorded tau, and compares
/// against the recorded tau column.
inline RadiusReplay replay_radius(const std::vector<RunRecord>& rs, double c_ode) {
    if (rs.size() < 2) throw std::invalid_argument("replay_radius: need at least 2 records");
    RadiusReplay rr;
    double cur = std::pow(rs.front().tau, 1.5);
    rr.t.push_back(rs.front().t);
    rr.tau_recorded.push_back(rs.front().tau);
    rr.tau_replayed.push_back(rs.front().tau);
    for (std::size_t i = 1; i < rs.size(); ++i) {
        const double dt = rs[i].t - rs[i - 1].t;
        if (!(dt > 0.0))
            throw std::invalid_argument("replay_radius: record times must strictly increase");
        cur -= 0.75 * c_ode * dt *
               ((rs[i - 1].normX + rs[i - 1].normZ) + (rs[i].normX + rs[i].normZ));
        if (!(cur > 0.0)) throw SolverError("replay_radius: radius collapse in the replay");
        const double tau = std::pow(cur, 2.0 / 3.0);
        rr.t.push_back(rs[i].t);
        rr.tau_recorded.push_back(rs[i].tau);
        rr.tau_replayed.push_back(tau);
        rr.max_rel_dev = std::max(rr.max_rel_dev,
                                  std::abs(tau - rs[i].tau) / std::max(rs[i].tau, 1e-12));
    }
    return rr;
}

} // namespace phlab
