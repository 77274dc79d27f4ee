#pragma once

// Run records (CSV / NDJSON) and the binary checkpoint format.
//
// CSV column order is part of the interface:
//   t,normX,normY,normZ,normD,boundary_trace,l2,linf,tau,tau_spectral,lyapunov,robin_residual
// Doubles are rendered with %.17g so identical runs are byte-identical and
// parse back exactly.
//
// Checkpoint layout (little-endian, packed in write order):
//   8 bytes magic "PHLAB1\0\0", u32 version = 1, u64 nx, u64 ny,
//   f64 lx, ly, stretch, t, tau, u_bar, alpha, r,
//   u8 toggles (bit0 damping, bit1 transport, bit2 diffusion),
//   ny*nx f64 g values (y-major), ny f64 y coordinates.

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "errors.hpp"
#include "grid.hpp"

namespace phlab {

struct RunRecord {
    double t = 0.0;
    double normX = 0.0, normY = 0.0, normZ = 0.0, normD = 0.0;
    double boundary_trace = 0.0;
    double l2 = 0.0, linf = 0.0;
    double tau = 0.0;
    double tau_spectral = 0.0; ///< 0 when too few modes rise above the floor
    double lyapunov = 0.0;
    double robin_residual = 0.0;

    std::array<double, 12> columns() const {
        return {t, normX, normY, normZ, normD, boundary_trace,
                l2, linf, tau, tau_spectral, lyapunov, robin_residual};
    }

    bool finite() const {
        for (double c : columns())
            if (!std::isfinite(c)) return false;
        return true;
    }
};

inline constexpr const char* run_record_header =
    "t,normX,normY,normZ,normD,boundary_trace,l2,linf,tau,tau_spectral,lyapunov,robin_residual";

inline constexpr std::array<const char*, 12> run_record_keys = {
    "t", "normX", "normY", "normZ", "normD", "boundary_trace",
    "l2", "linf", "tau", "tau_spectral", "lyapunov", "robin_residual"};

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

/// CSV serialization (header + one line per record).
inline std::string records_to_csv(const std::vector<RunRecord>& records) {
    std::string out(run_record_header);
    out += '\n';
    for (const auto& r : records) {
        if (!r.finite()) throw SolverError("records_to_csv: non-finite record value");
        const auto cols = r.columns();
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c) out += ',';
            out += detail::format_double(cols[c]);
        }
        out += '\n';
    }
    return out;
}

/// NDJSON serialization: one object per line, keys in column order.
inline std::string records_to_ndjson(const std::vector<RunRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        if (!r.finite()) throw SolverError("records_to_ndjson: non-finite record value");
        const auto cols = r.columns();
        out += '{';
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c) out += ',';
            out += '"';
            out += run_record_keys[c];
            out += "\":";
            out += detail::format_double(cols[c]);
        }
        out += "}\n";
    }
    return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SolverError("cannot open '" + path + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw SolverError("failed writing '" + path + "'");
}

/// Parses a CSV produced by records_to_csv (header required, exact columns).
inline std::vector<RunRecord> read_records_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SolverError("cannot open records file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw SolverError("records file '" + path + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != run_record_header)
        throw SolverError("records file '" + path + "' has an unexpected header: " + line);
    std::vector<RunRecord> records;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::array<double, 12> cols{};
        std::size_t pos = 0;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const std::size_t next = (c + 1 < cols.size()) ? line.find(',', pos) : line.size();
            if (next == std::string::npos)
                throw SolverError(path + ":" + std::to_string(lineno) + ": expected 12 columns");
            try {
                cols[c] = std::stod(line.substr(pos, next - pos));
            } catch (const std::exception&) {
                throw SolverError(path + ":" + std::to_string(lineno) + ": bad number in column " +
                                  std::to_string(c + 1));
            }
            pos = next + 1;
        }
        RunRecord r;
        r.t = cols[0]; r.normX = cols[1]; r.normY = cols[2]; r.normZ = cols[3];
        r.normD = cols[4]; r.boundary_trace = cols[5]; r.l2 = cols[6]; r.linf = cols[7];
        r.tau = cols[8]; r.tau_spectral = cols[9]; r.lyapunov = cols[10];
        r.robin_residual = cols[11];
        records.push_back(r);
    }
    return records;
}

// ---------------------------------------------------------------------------
// Checkpoints

inline constexpr std::array<char, 8> checkpoint_magic = {'P', 'H', 'L', 'A', 'B', '1', '\0', '\0'};
inline constexpr std::uint32_t checkpoint_version = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; this platform is not");

struct Checkpoint {
    State state;
    double tau = 0.0;
};

namespace detail {

template <class T>
void put_raw(std::string& out, const T& v) {
    const char* p = reinterpret_cast<const char*>(&v);
    out.append(p, sizeof(T));
}

template <class T>
T get_raw(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw SolverError("checkpoint truncated");
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

} // namespace detail

inline std::string checkpoint_to_bytes(const State& s, double tau) {
    const Grid& g = *s.g.grid;
    std::string out;
    out.append(checkpoint_magic.data(), checkpoint_magic.size());
    detail::put_raw(out, checkpoint_version);
    detail::put_raw(out, static_cast<std::uint64_t>(g.nx));
    detail::put_raw(out, static_cast<std::uint64_t>(g.ny));
    detail::put_raw(out, g.lx);
    detail::put_raw(out, g.ly);
    detail::put_raw(out, g.stretch);
    detail::put_raw(out, s.t);
    detail::put_raw(out, tau);
    detail::put_raw(out, s.params.u_bar);
    detail::put_raw(out, s.params.alpha);
    detail::put_raw(out, s.params.r);
    const std::uint8_t toggles = static_cast<std::uint8_t>((s.params.damping_on ? 1 : 0) |
                                                           (s.params.transport_on ? 2 : 0) |
                                                           (s.params.diffusion_on ? 4 : 0));
    detail::put_raw(out, toggles);
    for (double v : s.g.v) detail::put_raw(out, v);
    for (double v : g.y) detail::put_raw(out, v);
    return out;
}

inline void write_checkpoint(const std::string& path, const State& s, double tau) {
    write_text_file(path, checkpoint_to_bytes(s, tau));
}

inline Checkpoint checkpoint_from_bytes(const std::string& bytes) {
    std::size_t pos = 0;
    if (bytes.size() < checkpoint_magic.size() ||
        std::memcmp(bytes.data(), checkpoint_magic.data(), checkpoint_magic.size()) != 0)
        throw SolverError("checkpoint: bad magic");
    pos = checkpoint_magic.size();
    const auto version = detail::get_raw<std::uint32_t>(bytes, pos);
    if (version != checkpoint_version)
        throw SolverError("checkpoint: unsupported version " + std::to_string(version));
    const auto nx = detail::get_raw<std::uint64_t>(bytes, pos);
    const auto ny = detail::get_raw<std::uint64_t>(bytes, pos);
    const double lx = detail::get_raw<double>(bytes, pos);
    const double ly = detail::get_raw<double>(bytes, pos);
    const double stretch = detail::get_raw<double>(bytes, pos);
    const double t = detail::get_raw<double>(bytes, pos);
    const double tau = detail::get_raw<double>(bytes, pos);
    const double u_bar = detail::get_raw<double>(bytes, pos);
    const double alpha = detail::get_raw<double>(bytes, pos);
    const double r = detail::get_raw<double>(bytes, pos);
    const auto toggles = detail::get_raw<std::uint8_t>(bytes, pos);

    Checkpoint cp;
    auto grid = make_grid(static_cast<std::size_t>(nx), lx, static_cast<std::size_t>(ny), ly,
                          stretch);
    cp.state.g = Field(grid);
    for (double& v : cp.state.g.v) v = detail::get_raw<double>(bytes, pos);
    std::vector<double> ycoords(ny);
    for (double& v : ycoords) v = detail::get_raw<double>(bytes, pos);
    if (pos != bytes.size()) throw SolverError("checkpoint: trailing bytes");
    for (std::size_t j = 0; j < ny; ++j)
        if (ycoords[j] != grid->y[j])
            throw SolverError("checkpoint: stored y coordinates disagree with the grid map");
    cp.state.t = t;
    cp.tau = tau;
    cp.state.params.u_bar = u_bar;
    cp.state.params.alpha = alpha;
    cp.state.params.r = r;
    cp.state.params.tau0 = tau; // resuming treats the stored radius as initial
    cp.state.params.damping_on = (toggles & 1) != 0;
    cp.state.params.transport_on = (toggles & 2) != 0;
    cp.state.params.diffusion_on = (toggles & 4) != 0;
    return cp;
}

inline Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SolverError("cannot open checkpoint '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return checkpoint_from_bytes(bytes);
}

} // namespace phlab
