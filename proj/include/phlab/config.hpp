#pragma once

// Scenario files: INI-style key = value text in five blocks
// ([grid], [model], [run], [perturbation], [output]).  Unknown sections or
// keys are hard errors, as are malformed values; validation collects every
// violation with the offending key before throwing.  '#' starts a comment.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "profiles.hpp"

namespace phlab {

enum class PerturbationType { mode, gaussian_packet, random_band };

struct ScenarioConfig {
    struct {
        std::size_t nx = 64;
        double lx = 2.0 * M_PI;
        std::size_t ny = 256;
        double ly = 20.0;
        double stretch = 0.0;
    } grid;

    struct {
        double u_bar = 1.0;
        double b_bar = 0.0;
        double alpha = 0.3;
        double r = 2.0;
        double tau0 = 1.0;
        double c_ode = 1.0; ///< radius-ODE constant C
        double c1 = 1.0;    ///< smallness-gate constant C1
        bool damping_on = true;
        bool transport_on = true;
        bool diffusion_on = true;
    } model;

    struct {
        double dt = 1e-3;
        double t_end = 10.0;
        std::size_t observe_every = 50; ///< steps between records
        std::uint64_t seed = 12345;
        bool linear = false;            ///< use the linearized solver
        double fit_t_start = 0.5;       ///< decay-fit window start
        double fit_t_end = 0.0;         ///< 0 = t_end
    } run;

    struct {
        PerturbationType type = PerturbationType::mode;
        double amplitude = 1e-3;
        std::size_t wavenumber = 1;  ///< mode index (0 = x-independent)
        double y_center = 0.0;       ///< y-envelope exp(-((y-c)/w)^2)
        double y_width = 1.0;
        std::size_t band_lo = 1;     ///< random-band window
        std::size_t band_hi = 4;
        double amplitude2 = 1e-4;    ///< secondary (uniqueness) perturbation
        std::size_t wavenumber2 = 2;
    } perturbation;

    struct {
        std::string dir = "out";
        bool csv = true;
        bool ndjson = false;
        std::string checkpoint; ///< empty = no checkpoint written
    } output;

    ModelParams model_params() const {
        ModelParams p;
        p.u_bar = model.u_bar;
        p.b_bar = model.b_bar;
        p.alpha = model.alpha;
        p.r = model.r;
        p.tau0 = model.tau0;
        p.damping_on = model.damping_on;
        p.transport_on = model.transport_on;
        p.diffusion_on = model.diffusion_on;
        return p;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

struct KeyValue {
    std::string value;
    int line = 0;
};

/// section.key -> value map with line numbers, plus syntax diagnostics.
inline std::map<std::string, KeyValue> parse_kv_text(std::istream& in,
                                                     const std::string& origin) {
    static const std::set<std::string> sections{"grid", "model", "run", "perturbation",
                                                "output"};
    std::map<std::string, KeyValue> kv;
    std::string line, section;
    int lineno = 0;
    std::vector<std::string> problems;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                problems.push_back(origin + ":" + std::to_string(lineno) +
                                   ": malformed section header '" + line + "'");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            if (!sections.count(section))
                problems.push_back(origin + ":" + std::to_string(lineno) +
                                   ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            problems.push_back(origin + ":" + std::to_string(lineno) + ": expected key = value, got '" +
                               line + "'");
            continue;
        }
        if (section.empty()) {
            problems.push_back(origin + ":" + std::to_string(lineno) +
                               ": key outside any [section]");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) {
            problems.push_back(origin + ":" + std::to_string(lineno) + ": empty key or value");
            continue;
        }
        kv[section + "." + key] = KeyValue{val, lineno};
    }
    if (!problems.empty()) {
        std::string msg = "config syntax errors:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw ConfigError(msg);
    }
    return kv;
}

class ConfigBinder {
  public:
    explicit ConfigBinder(std::map<std::string, KeyValue> kv) : kv_(std::move(kv)) {}

    void number(const std::string& key, double& out) {
        if (auto* v = take(key)) {
            try {
                std::size_t pos = 0;
                const double d = std::stod(v->value, &pos);
                if (pos != v->value.size()) throw std::invalid_argument("trailing junk");
                out = d;
            } catch (const std::exception&) {
                problems_.push_back(key + ": cannot parse '" + v->value + "' as a number");
            }
        }
    }

    void integer(const std::string& key, std::size_t& out) {
        if (auto* v = take(key)) {
            try {
                std::size_t pos = 0;
                const long long n = std::stoll(v->value, &pos);
                if (pos != v->value.size() || n < 0) throw std::invalid_argument("bad");
                out = static_cast<std::size_t>(n);
            } catch (const std::exception&) {
                problems_.push_back(key + ": cannot parse '" + v->value +
                                    "' as a nonnegative integer");
            }
        }
    }

    void uint64(const std::string& key, std::uint64_t& out) {
        if (auto* v = take(key)) {
            try {
                std::size_t pos = 0;
                const unsigned long long n = std::stoull(v->value, &pos);
                if (pos != v->value.size()) throw std::invalid_argument("bad");
                out = n;
            } catch (const std::exception&) {
                problems_.push_back(key + ": cannot parse '" + v->value + "' as an integer");
            }
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (auto* v = take(key)) {
            std::string s = v->value;
            std::transform(s.begin(), s.end(), s.begin(),
                           [](unsigned char c) { return std::tolower(c); });
            if (s == "true" || s == "on" || s == "1") out = true;
            else if (s == "false" || s == "off" || s == "0") out = false;
            else problems_.push_back(key + ": cannot parse '" + v->value + "' as a boolean");
        }
    }

    void text(const std::string& key, std::string& out) {
        if (auto* v = take(key)) out = v->value;
    }

    void finish() {
        for (const auto& [key, v] : kv_)
            if (!used_.count(key))
                problems_.push_back(key + ": unknown key (" +
                                    (v.line < 0 ? "override " + std::to_string(-v.line)
                                                : "line " + std::to_string(v.line)) +
                                    ")");
        if (!problems_.empty()) {
            std::string msg = "config errors:";
            for (const auto& p : problems_) msg += "\n  " + p;
            throw ConfigError(msg);
        }
    }

    void problem(const std::string& p) { problems_.push_back(p); }

  private:
    KeyValue* take(const std::string& key) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return nullptr;
        used_.insert(key);
        return &it->second;
    }

    std::map<std::string, KeyValue> kv_;
    std::set<std::string> used_;
    std::vector<std::string> problems_;
};

inline void validate_config(const ScenarioConfig& c) {
    std::vector<std::string> bad;
    if (!is_power_of_two(c.grid.nx) || c.grid.nx < 8)
        bad.push_back("grid.nx: must be a power of two >= 8");
    if (c.grid.ny < 16) bad.push_back("grid.ny: must be >= 16");
    if (!(c.grid.lx > 0.0)) bad.push_back("grid.lx: must be positive");
    if (!(c.grid.ly > 0.0)) bad.push_back("grid.ly: must be positive");
    if (!(c.grid.stretch >= 0.0)) bad.push_back("grid.stretch: must be >= 0");
    if (!(c.model.u_bar > 0.0)) bad.push_back("model.u_bar: must be positive");
    if (!(c.model.alpha >= 0.0 && c.model.alpha < alpha_sup))
        bad.push_back("model.alpha: must lie in [0, sqrt(2)/2)");
    if (!(c.model.r > 1.0)) bad.push_back("model.r: must be > 1");
    if (!(c.model.tau0 > 0.0)) bad.push_back("model.tau0: must be positive");
    if (!(c.model.c_ode > 0.0)) bad.push_back("model.c_ode: must be positive");
    if (!(c.model.c1 > 0.0)) bad.push_back("model.c1: must be positive");
    if (!(c.run.dt > 0.0)) bad.push_back("run.dt: must be positive");
    if (!(c.run.t_end >= 0.0)) bad.push_back("run.t_end: must be >= 0");
    if (c.run.observe_every == 0) bad.push_back("run.observe_every: must be >= 1");
    if (!(c.run.fit_t_start >= 0.0)) bad.push_back("run.fit_t_start: must be >= 0");
    if (!(c.run.fit_t_end >= 0.0)) bad.push_back("run.fit_t_end: must be >= 0 (0 = t_end)");
    if (!(c.perturbation.amplitude >= 0.0)) bad.push_back("perturbation.amplitude: must be >= 0");
    if (!(c.perturbation.amplitude2 >= 0.0)) bad.push_back("perturbation.amplitude2: must be >= 0");
    if (c.perturbation.wavenumber > c.grid.nx / 2)
        bad.push_back("perturbation.wavenumber: exceeds the grid Nyquist index");
    if (c.perturbation.wavenumber2 > c.grid.nx / 2)
        bad.push_back("perturbation.wavenumber2: exceeds the grid Nyquist index");
    if (!(c.perturbation.y_width > 0.0)) bad.push_back("perturbation.y_width: must be positive");
    if (c.perturbation.band_lo < 1) bad.push_back("perturbation.band_lo: must be >= 1");
    if (c.perturbation.band_hi < c.perturbation.band_lo ||
        c.perturbation.band_hi > c.grid.nx / 2)
        bad.push_back("perturbation.band_hi: must lie in [band_lo, nx/2]");
    if (c.output.dir.empty()) bad.push_back("output.dir: must not be empty");
    if (!bad.empty()) {
        std::string msg = "config validation failed:";
        for (const auto& b : bad) msg += "\n  " + b;
        throw ConfigError(msg);
    }
}

inline ScenarioConfig bind_config(std::map<std::string, KeyValue> kv) {
    ScenarioConfig c;
    ConfigBinder b(std::move(kv));
    b.integer("grid.nx", c.grid.nx);
    b.number("grid.lx", c.grid.lx);
    b.integer("grid.ny", c.grid.ny);
    b.number("grid.ly", c.grid.ly);
    b.number("grid.stretch", c.grid.stretch);
    b.number("model.u_bar", c.model.u_bar);
    b.number("model.b_bar", c.model.b_bar);
    b.number("model.alpha", c.model.alpha);
    b.number("model.r", c.model.r);
    b.number("model.tau0", c.model.tau0);
    b.number("model.c_ode", c.model.c_ode);
    b.number("model.c1", c.model.c1);
    b.boolean("model.damping_on", c.model.damping_on);
    b.boolean("model.transport_on", c.model.transport_on);
    b.boolean("model.diffusion_on", c.model.diffusion_on);
    b.number("run.dt", c.run.dt);
    b.number("run.t_end", c.run.t_end);
    b.integer("run.observe_every", c.run.observe_every);
    b.uint64("run.seed", c.run.seed);
    b.boolean("run.linear", c.run.linear);
    b.number("run.fit_t_start", c.run.fit_t_start);
    b.number("run.fit_t_end", c.run.fit_t_end);
    {
        std::string type;
        b.text("perturbation.type", type);
        if (!type.empty()) {
            if (type == "mode") c.perturbation.type = PerturbationType::mode;
            else if (type == "gaussian-packet") c.perturbation.type = PerturbationType::gaussian_packet;
            else if (type == "random-band") c.perturbation.type = PerturbationType::random_band;
            else b.problem("perturbation.type: unknown type '" + type +
                           "' (expected mode | gaussian-packet | random-band)");
        }
    }
    b.number("perturbation.amplitude", c.perturbation.amplitude);
    b.integer("perturbation.wavenumber", c.perturbation.wavenumber);
    b.number("perturbation.y_center", c.perturbation.y_center);
    b.number("perturbation.y_width", c.perturbation.y_width);
    b.integer("perturbation.band_lo", c.perturbation.band_lo);
    b.integer("perturbation.band_hi", c.perturbation.band_hi);
    b.number("perturbation.amplitude2", c.perturbation.amplitude2);
    b.integer("perturbation.wavenumber2", c.perturbation.wavenumber2);
    b.text("output.dir", c.output.dir);
    {
        std::string formats;
        b.text("output.formats", formats);
        if (!formats.empty()) {
            c.output.csv = false;
            c.output.ndjson = false;
            std::stringstream ss(formats);
            std::string item;
            while (std::getline(ss, item, ',')) {
                item = trim(item);
                if (item == "csv") c.output.csv = true;
                else if (item == "ndjson") c.output.ndjson = true;
                else if (!item.empty())
                    b.problem("output.formats: unknown format '" + item + "'");
            }
        }
    }
    b.text("output.checkpoint", c.output.checkpoint);
    b.finish();
    validate_config(c);
    return c;
}

} // namespace detail

/// Parses a scenario file (all keys optional; defaults cover the desk-scale
/// baseline).  Overrides are "section.key=value" strings applied on top.
inline ScenarioConfig parse_config(const std::string& path,
                                   const std::vector<std::string>& overrides = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    auto kv = detail::parse_kv_text(in, path);
    int pseudo_line = 0;
    for (const auto& ov : overrides) {
        const auto eq = ov.find('=');
        const auto dot = ov.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq)
            throw ConfigError("override '" + ov + "' is not of the form section.key=value");
        const std::string key = detail::trim(ov.substr(0, eq));
        const std::string val = detail::trim(ov.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("override '" + ov + "' has an empty key or value");
        kv[key] = detail::KeyValue{val, --pseudo_line};
    }
    return detail::bind_config(std::move(kv));
}

/// Parses configuration text (used for defaults and tests).
inline ScenarioConfig parse_config_text(const std::string& text,
                                        const std::vector<std::string>& overrides = {}) {
    std::istringstream in(text);
    auto kv = detail::parse_kv_text(in, "<inline>");
    int pseudo_line = 0;
    for (const auto& ov : overrides) {
        const auto eq = ov.find('=');
        const auto dot = ov.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq)
            throw ConfigError("override '" + ov + "' is not of the form section.key=value");
        kv[detail::trim(ov.substr(0, eq))] = detail::KeyValue{detail::trim(ov.substr(eq + 1)), --pseudo_line};
    }
    return detail::bind_config(std::move(kv));
}

} // namespace phlab
