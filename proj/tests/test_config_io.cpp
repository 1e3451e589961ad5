#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "vprad/config.hpp"
#include "vprad/evolve.hpp"
#include "vprad/snapshot.hpp"

using namespace vprad;
namespace fs = std::filesystem;

namespace {

const char* kGoodConfig = R"(# reference-style config
[sim]
q = 1.0
lambda = 1.0
t0 = 0.0
t_end = 2.0

[gamma0]
profile = gaussian-bump
epsilon = 0.05
theta_center = 0.0
a_center = 1.0
theta_width = 0.5
a_width = 0.175
cutoff_sigma = 4.0

[sampling]
method = grid
n_theta = 10
n_a = 8

[time]
dt_max = 0.1
dt_min = 0.1
late_factor = 0.0

[output]
snapshot_times = 1.0, 2.0
diagnostics_every = 2

[diagnostics]
norms = 1, a^2+a^-2
tau_grid = 0.8, 1.2
)";

fs::path temp_dir(const char* tag) {
    fs::path dir = fs::temp_directory_path() / (std::string("vprad_test_") + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_SUITE_BEGIN("config_io");

TEST_CASE("config parses and validates") {
    SimConfig cfg = parse_config(kGoodConfig, "test.ini");
    CHECK(cfg.q == 1.0);
    CHECK(cfg.t_end == 2.0);
    CHECK(cfg.profile.epsilon == 0.05);
    CHECK(cfg.n_theta == 10);
    CHECK(cfg.snapshot_times.size() == 2);
    CHECK(cfg.norms.size() == 2);
    CHECK(cfg.tau_grid.size() == 2);
}

TEST_CASE("config errors are line precise") {
    std::string bad = kGoodConfig;
    bad += "\nbogus_key = 1\n";
    try {
        parse_config(bad, "bad.ini");
        FAIL("expected an error");
    } catch (const std::invalid_argument& e) {
        std::string msg = e.what();
        CHECK(msg.find("bad.ini:") != std::string::npos);
        CHECK(msg.find("bogus_key") != std::string::npos);
    }

    std::string notnum = kGoodConfig;
    auto pos = notnum.find("q = 1.0");
    notnum.replace(pos, 7, "q = one");
    CHECK_THROWS_WITH_AS(parse_config(notnum, "x.ini"),
                         doctest::Contains("not a number"),
                         std::invalid_argument);

    std::string missing = kGoodConfig;
    pos = missing.find("t_end = 2.0");
    missing.replace(pos, 11, "");
    CHECK_THROWS_WITH_AS(parse_config(missing, "x.ini"),
                         doctest::Contains("t_end"), std::invalid_argument);
}

TEST_CASE("log-spaced snapshot syntax") {
    std::string cfg_text = kGoodConfig;
    auto pos = cfg_text.find("snapshot_times = 1.0, 2.0");
    cfg_text.replace(pos, 25, "snapshot_times = log:0.5:2:5");
    SimConfig cfg = parse_config(cfg_text, "log.ini");
    REQUIRE(cfg.snapshot_times.size() == 5);
    CHECK(cfg.snapshot_times.front() == doctest::Approx(0.5));
    CHECK(cfg.snapshot_times.back() == 2.0);
    CHECK(cfg.snapshot_times[1] / cfg.snapshot_times[0] ==
          doctest::Approx(cfg.snapshot_times[2] / cfg.snapshot_times[1]));
}

TEST_CASE("snapshot round trip is bit identical") {
    Gamma0Profile prof;
    prof.epsilon = 0.1;
    prof.theta_width = 0.5;
    prof.a_width = 0.15;
    ParticleEnsemble ens = sample_grid(prof, 7, 6);
    ens.t = 1.25;
    ens.lambda = -1.0;
    ens.q = 2.0;

    fs::path dir = temp_dir("snap");
    fs::path p = write_snapshot(dir, 3, ens, 0xdeadbeefULL);
    LoadedSnapshot snap = read_snapshot(p);
    CHECK(snap.ens.theta == ens.theta);
    CHECK(snap.ens.a == ens.a);
    CHECK(snap.ens.w == ens.w);
    CHECK(snap.ens.t == ens.t);
    CHECK(snap.ens.lambda == ens.lambda);
    CHECK(snap.ens.q == ens.q);
    CHECK(snap.config_hash == 0xdeadbeefULL);

    // write -> read -> write produces identical bytes
    fs::path dir2 = temp_dir("snap2");
    fs::path p2 = write_snapshot(dir2, 3, snap.ens, snap.config_hash);
    std::ifstream f1(p, std::ios::binary), f2(p2, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)), {});
    std::string b2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(b1 == b2);
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("truncated snapshot fails cleanly") {
    Gamma0Profile prof;
    prof.epsilon = 0.1;
    prof.theta_width = 0.5;
    prof.a_width = 0.15;
    ParticleEnsemble ens = sample_grid(prof, 5, 5);
    fs::path dir = temp_dir("trunc");
    fs::path p = write_snapshot(dir, 0, ens, 1);
    fs::resize_file(p, fs::file_size(p) / 2);
    CHECK_THROWS_WITH_AS(read_snapshot(p), doctest::Contains("truncated"),
                         std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("diagnostics csv round trips through %.17g") {
    fs::path dir = temp_dir("csv");
    SimConfig cfg = parse_config(kGoodConfig, "test.ini");
    DiagnosticsRecord rec;
    rec.t = 1.0 / 3.0;
    rec.mass = 6.02214076e-23;
    rec.energy = -1.2345678901234567e-4;
    rec.norms.emplace_back("norm:1", 0.1 + 0.2);
    rec.field.sup_phase_dtheta = 1e-300;
    {
        DiagnosticsCsv csv(dir / "diag.csv", cfg);
        csv.write_row(rec);
        rec.t = 2.0 / 3.0;
        csv.write_row(rec);
    }
    DiagnosticsSeries series = read_diagnostics_csv(dir / "diag.csv");
    REQUIRE(series.rows.size() == 2);
    CHECK(series.column("t")[0] == 1.0 / 3.0);
    CHECK(series.column("mass")[1] == 6.02214076e-23);
    CHECK(series.column("energy")[0] == -1.2345678901234567e-4);
    CHECK(series.column("norm:1")[0] == 0.1 + 0.2);
    CHECK(series.column("sup_phase_dtheta_psi_over_a")[0] == 1e-300);
    fs::remove_all(dir);
}

TEST_CASE("fnv1a hash is stable") {
    CHECK(fnv1a_hash("") == 14695981039346656037ull);
    CHECK(fnv1a_hash("a") != fnv1a_hash("b"));
}

TEST_SUITE_END();
