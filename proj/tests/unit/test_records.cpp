#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "phlab/phlab.hpp"

using namespace phlab;

namespace {

std::vector<RunRecord> sample_records() {
    RunRecord a;
    a.t = 0.0;
    a.normX = 1.0 / 3.0;
    a.normY = 2.2250738585072014e-308; // smallest normal double
    a.normZ = 0.1;
    a.normD = 123456789.123456789;
    a.boundary_trace = 1e-300;
    a.l2 = M_PI;
    a.linf = -0.0;
    a.tau = 1.0;
    a.tau_spectral = 0.97;
    a.lyapunov = 4.0;
    a.robin_residual = 5e-17;
    RunRecord b = a;
    b.t = 0.05;
    b.normX = 0.3211;
    return {a, b};
}

} // namespace

TEST_CASE("csv header is the frozen interface string") {
    REQUIRE(std::string(run_record_header) ==
            "t,normX,normY,normZ,normD,boundary_trace,l2,linf,tau,tau_spectral,lyapunov,"
            "robin_residual");
    const std::string csv = records_to_csv({});
    REQUIRE(csv == std::string(run_record_header) + "\n");
}

TEST_CASE("csv roundtrip is exact for every double") {
    const auto recs = sample_records();
    const std::string path = "test_records_roundtrip.csv";
    write_text_file(path, records_to_csv(recs));
    const auto back = read_records_csv(path);
    std::remove(path.c_str());
    REQUIRE(back.size() == recs.size());
    for (std::size_t n = 0; n < recs.size(); ++n) {
        const auto want = recs[n].columns();
        const auto got = back[n].columns();
        for (std::size_t c = 0; c < want.size(); ++c) REQUIRE(got[c] == want[c]);
    }
}

TEST_CASE("serialization is deterministic") {
    const auto recs = sample_records();
    REQUIRE(records_to_csv(recs) == records_to_csv(recs));
    REQUIRE(records_to_ndjson(recs) == records_to_ndjson(recs));
}

TEST_CASE("ndjson carries the same keys in column order") {
    RunRecord r;
    r.t = 0.5;
    r.tau = 0.75;
    const std::string line = records_to_ndjson({r});
    REQUIRE(line.front() == '{');
    REQUIRE(line.find("\"t\":0.5") != std::string::npos);
    REQUIRE(line.find("\"tau\":0.75") != std::string::npos);
    REQUIRE(line.find("\"normX\":0") != std::string::npos);
    REQUIRE(line.back() == '\n');
    // keys appear in the frozen column order
    std::size_t prev = 0;
    for (const char* key : run_record_keys) {
        const std::size_t at = line.find("\"" + std::string(key) + "\":");
        REQUIRE(at != std::string::npos);
        REQUIRE((at > prev || key == run_record_keys[0]));
        prev = at;
    }
}

TEST_CASE("non-finite records are refused") {
    RunRecord r;
    r.normX = std::nan("");
    REQUIRE_THROWS_AS(records_to_csv({r}), SolverError);
    r.normX = 0.0;
    r.lyapunov = std::numeric_limits<double>::infinity();
    REQUIRE_THROWS_AS(records_to_ndjson({r}), SolverError);
}

TEST_CASE("csv parse errors carry path and line number") {
    const std::string path = "test_records_bad.csv";
    write_text_file(path, "wrong,header\n");
    REQUIRE_THROWS_AS(read_records_csv(path), SolverError);

    write_text_file(path, std::string(run_record_header) + "\n1,2,3\n");
    try {
        read_records_csv(path);
        FAIL("expected SolverError");
    } catch (const SolverError& e) {
        REQUIRE(std::string(e.what()).find(path + ":2") != std::string::npos);
    }

    write_text_file(path, std::string(run_record_header) +
                              "\n1,2,3,4,5,abc,7,8,9,10,11,12\n");
    try {
        read_records_csv(path);
        FAIL("expected SolverError");
    } catch (const SolverError& e) {
        REQUIRE(std::string(e.what()).find("column 6") != std::string::npos);
    }
    std::remove(path.c_str());
    REQUIRE_THROWS_AS(read_records_csv("missing_file.csv"), SolverError);
}

TEST_CASE("checkpoint bytes roundtrip bitwise") {
    GridPtr g = make_grid(16, 2.0 * M_PI, 32, 20.0, 0.7);
    ModelParams p;
    p.u_bar = 1.25;
    p.alpha = 0.35;
    p.r = 2.5;
    p.transport_on = false;
    Field f(g, [](double x, double y) { return std::sin(x) * std::exp(-0.7 * y); });
    State s{f, 1.375, p};

    const std::string bytes = checkpoint_to_bytes(s, 0.8125);
    const Checkpoint cp = checkpoint_from_bytes(bytes);
    REQUIRE(cp.state.t == 1.375);
    REQUIRE(cp.tau == 0.8125);
    REQUIRE(cp.state.params.u_bar == 1.25);
    REQUIRE(cp.state.params.alpha == 0.35);
    REQUIRE(cp.state.params.r == 2.5);
    REQUIRE(cp.state.params.tau0 == 0.8125); // resume radius becomes initial
    REQUIRE(cp.state.params.damping_on);
    REQUIRE_FALSE(cp.state.params.transport_on);
    REQUIRE(cp.state.params.diffusion_on);
    REQUIRE(cp.state.g.grid->nx == 16);
    REQUIRE(cp.state.g.grid->ny == 32);
    REQUIRE(cp.state.g.grid->stretch == 0.7);
    for (std::size_t n = 0; n < f.v.size(); ++n) REQUIRE(cp.state.g.v[n] == f.v[n]);

    // a second serialization of the recovered state is byte-identical
    REQUIRE(checkpoint_to_bytes(cp.state, cp.tau) == bytes);
}

TEST_CASE("checkpoint validation rejects corruption") {
    GridPtr g = make_grid(8, 1.0, 16, 5.0);
    State s{Field(g), 0.0, ModelParams{}};
    std::string bytes = checkpoint_to_bytes(s, 1.0);

    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    REQUIRE_THROWS_AS(checkpoint_from_bytes(bad_magic), SolverError);

    std::string bad_version = bytes;
    bad_version[8] = 9;
    REQUIRE_THROWS_AS(checkpoint_from_bytes(bad_version), SolverError);

    REQUIRE_THROWS_AS(checkpoint_from_bytes(bytes.substr(0, bytes.size() - 3)), SolverError);
    REQUIRE_THROWS_AS(checkpoint_from_bytes(bytes + "xx"), SolverError);

    // flip one stored y coordinate: grid disagreement must be caught
    std::string bad_y = bytes;
    bad_y[bytes.size() - 1] ^= 0x40;
    REQUIRE_THROWS_AS(checkpoint_from_bytes(bad_y), SolverError);
}

TEST_CASE("checkpoint file i/o") {
    const std::string path = "test_checkpoint.bin";
    GridPtr g = make_grid(8, 1.0, 16, 5.0);
    Field f(g, [](double x, double y) { return x - y; });
    State s{f, 2.0, ModelParams{}};
    write_checkpoint(path, s, 0.5);
    const Checkpoint cp = read_checkpoint(path);
    std::remove(path.c_str());
    REQUIRE(cp.state.t == 2.0);
    REQUIRE(cp.tau == 0.5);
    for (std::size_t n = 0; n < f.v.size(); ++n) REQUIRE(cp.state.g.v[n] == f.v[n]);
    REQUIRE_THROWS_AS(read_checkpoint("missing.bin"), SolverError);
}
