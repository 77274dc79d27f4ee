#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <string>

#include "phlab/phlab.hpp"

using namespace phlab;

namespace {

std::string catch_message(const std::function<void()>& f) {
    try {
        f();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("empty text yields the desk-scale defaults") {
    ScenarioConfig c = parse_config_text("");
    REQUIRE(c.grid.nx == 64);
    REQUIRE(c.grid.ny == 256);
    REQUIRE(c.grid.lx == Catch::Approx(2.0 * M_PI));
    REQUIRE(c.grid.ly == 20.0);
    REQUIRE(c.grid.stretch == 0.0);
    REQUIRE(c.model.u_bar == 1.0);
    REQUIRE(c.model.alpha == 0.3);
    REQUIRE(c.model.r == 2.0);
    REQUIRE(c.model.tau0 == 1.0);
    REQUIRE(c.model.c_ode == 1.0);
    REQUIRE(c.model.c1 == 1.0);
    REQUIRE(c.model.damping_on);
    REQUIRE(c.run.dt == 1e-3);
    REQUIRE(c.run.t_end == 10.0);
    REQUIRE(c.run.observe_every == 50);
    REQUIRE(c.run.seed == 12345);
    REQUIRE_FALSE(c.run.linear);
    REQUIRE(c.perturbation.type == PerturbationType::mode);
    REQUIRE(c.perturbation.amplitude == 1e-3);
    REQUIRE(c.output.dir == "out");
    REQUIRE(c.output.csv);
    REQUIRE_FALSE(c.output.ndjson);
    REQUIRE(c.output.checkpoint.empty());
}

TEST_CASE("every section binds its keys") {
    const std::string text = R"(
[grid]
nx = 32
lx = 3.14
ny = 128
ly = 15
stretch = 1.5

[model]
u_bar = 2.0
b_bar = 0.1
alpha = 0.25
r = 1.5
tau0 = 0.7
c_ode = 0.9
c1 = 1.1
damping_on = true
transport_on = on
diffusion_on = 1

[run]
dt = 5e-4
t_end = 2.5
observe_every = 10
seed = 987654321
linear = true
fit_t_start = 0.25
fit_t_end = 2.0

[perturbation]
type = gaussian-packet
amplitude = 2e-3
wavenumber = 3
y_center = 1.0
y_width = 0.5
band_lo = 2
band_hi = 6
amplitude2 = 5e-5
wavenumber2 = 4

[output]
dir = results
formats = csv, ndjson
checkpoint = state.bin
)";
    ScenarioConfig c = parse_config_text(text);
    REQUIRE(c.grid.nx == 32);
    REQUIRE(c.grid.lx == 3.14);
    REQUIRE(c.grid.ny == 128);
    REQUIRE(c.grid.ly == 15.0);
    REQUIRE(c.grid.stretch == 1.5);
    REQUIRE(c.model.u_bar == 2.0);
    REQUIRE(c.model.b_bar == 0.1);
    REQUIRE(c.model.alpha == 0.25);
    REQUIRE(c.model.r == 1.5);
    REQUIRE(c.model.tau0 == 0.7);
    REQUIRE(c.model.c_ode == 0.9);
    REQUIRE(c.model.c1 == 1.1);
    REQUIRE(c.model.damping_on);
    REQUIRE(c.model.transport_on);
    REQUIRE(c.model.diffusion_on);
    REQUIRE(c.run.dt == 5e-4);
    REQUIRE(c.run.t_end == 2.5);
    REQUIRE(c.run.observe_every == 10);
    REQUIRE(c.run.seed == 987654321ull);
    REQUIRE(c.run.linear);
    REQUIRE(c.run.fit_t_start == 0.25);
    REQUIRE(c.run.fit_t_end == 2.0);
    REQUIRE(c.perturbation.type == PerturbationType::gaussian_packet);
    REQUIRE(c.perturbation.amplitude == 2e-3);
    REQUIRE(c.perturbation.wavenumber == 3);
    REQUIRE(c.perturbation.y_center == 1.0);
    REQUIRE(c.perturbation.y_width == 0.5);
    REQUIRE(c.perturbation.band_lo == 2);
    REQUIRE(c.perturbation.band_hi == 6);
    REQUIRE(c.perturbation.amplitude2 == 5e-5);
    REQUIRE(c.perturbation.wavenumber2 == 4);
    REQUIRE(c.output.dir == "results");
    REQUIRE(c.output.csv);
    REQUIRE(c.output.ndjson);
    REQUIRE(c.output.checkpoint == "state.bin");
}

TEST_CASE("comments and blank lines are ignored") {
    ScenarioConfig c = parse_config_text("# leading comment\n\n[run]\n  dt = 2e-3  # trailing\n");
    REQUIRE(c.run.dt == 2e-3);
}

TEST_CASE("syntax problems are reported with origin and line number") {
    const std::string msg = catch_message([] {
        parse_config_text("[run\ndt = 1e-3\n");
    });
    REQUIRE(msg.find("<inline>:1") != std::string::npos);
    REQUIRE(msg.find("malformed section header") != std::string::npos);

    const std::string msg2 = catch_message([] { parse_config_text("[run]\nno equals here\n"); });
    REQUIRE(msg2.find("<inline>:2") != std::string::npos);
    REQUIRE(msg2.find("expected key = value") != std::string::npos);

    const std::string msg3 = catch_message([] { parse_config_text("dt = 1\n"); });
    REQUIRE(msg3.find("outside any [section]") != std::string::npos);

    const std::string msg4 = catch_message([] { parse_config_text("[nope]\nx = 1\n"); });
    REQUIRE(msg4.find("unknown section") != std::string::npos);
}

TEST_CASE("unknown keys report the defining line or override") {
    const std::string msg =
        catch_message([] { parse_config_text("[run]\ndt = 1e-3\nbogus = 1\n"); });
    REQUIRE(msg.find("run.bogus: unknown key (line 3)") != std::string::npos);

    const std::string msg2 =
        catch_message([] { parse_config_text("", {"run.dt=1e-3", "run.bogus=1"}); });
    REQUIRE(msg2.find("run.bogus: unknown key (override 2)") != std::string::npos);
}

TEST_CASE("type errors are collected, not thrown one at a time") {
    const std::string msg = catch_message([] {
        parse_config_text("[run]\ndt = fast\nobserve_every = -3\n[model]\ndamping_on = maybe\n");
    });
    REQUIRE(msg.find("run.dt") != std::string::npos);
    REQUIRE(msg.find("run.observe_every") != std::string::npos);
    REQUIRE(msg.find("model.damping_on") != std::string::npos);
}

TEST_CASE("validation failures are collected with one name per line") {
    const std::string msg = catch_message([] {
        parse_config_text("[grid]\nnx = 48\nny = 8\n[model]\nalpha = 0.8\n[run]\ndt = 0\n");
    });
    REQUIRE(msg.find("grid.nx") != std::string::npos);
    REQUIRE(msg.find("grid.ny") != std::string::npos);
    REQUIRE(msg.find("model.alpha") != std::string::npos);
    REQUIRE(msg.find("run.dt") != std::string::npos);
}

TEST_CASE("overrides take precedence and must be well-formed") {
    ScenarioConfig c = parse_config_text("[run]\ndt = 1e-3\n", {"run.dt=5e-3", "grid.nx=16"});
    REQUIRE(c.run.dt == 5e-3);
    REQUIRE(c.grid.nx == 16);
    REQUIRE_THROWS_AS(parse_config_text("", {"rundt5e-3"}), ConfigError);
    REQUIRE_THROWS_AS(parse_config_text("", {"run.dt="}), ConfigError);
    REQUIRE_THROWS_AS(parse_config_text("", {"dt=1"}), ConfigError);
}

TEST_CASE("perturbation types and output formats are checked") {
    ScenarioConfig c = parse_config_text("[perturbation]\ntype = random-band\n");
    REQUIRE(c.perturbation.type == PerturbationType::random_band);
    REQUIRE_THROWS_AS(parse_config_text("[perturbation]\ntype = fancy\n"), ConfigError);

    ScenarioConfig c2 = parse_config_text("[output]\nformats = ndjson\n");
    REQUIRE_FALSE(c2.output.csv);
    REQUIRE(c2.output.ndjson);
    REQUIRE_THROWS_AS(parse_config_text("[output]\nformats = csv, yaml\n"), ConfigError);
}

TEST_CASE("wavenumber and band bounds are tied to the grid") {
    REQUIRE_THROWS_AS(parse_config_text("[grid]\nnx = 16\n[perturbation]\nwavenumber = 9\n"),
                      ConfigError);
    REQUIRE_THROWS_AS(parse_config_text("[grid]\nnx = 16\n[perturbation]\nband_hi = 12\n"),
                      ConfigError);
    REQUIRE_NOTHROW(parse_config_text("[grid]\nnx = 16\n[perturbation]\nwavenumber = 8\n"));
}

TEST_CASE("file parsing matches text parsing and reports missing files") {
    const std::string path = "test_config_roundtrip.ini";
    {
        std::ofstream out(path);
        out << "[grid]\nnx = 32\n[run]\nt_end = 1.5\n";
    }
    ScenarioConfig c = parse_config(path);
    REQUIRE(c.grid.nx == 32);
    REQUIRE(c.run.t_end == 1.5);
    std::remove(path.c_str());
    REQUIRE_THROWS_AS(parse_config("no_such_file.ini"), ConfigError);

    const std::string msg = catch_message([&] { parse_config("no_such_file.ini"); });
    REQUIRE(msg.find("no_such_file.ini") != std::string::npos);
}
