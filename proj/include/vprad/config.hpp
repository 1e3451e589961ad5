#pragma once

// Run configuration: a single key = value file with [sections]. Every
// constant that affects the numbers is in the file; loading fails with a
// line-precise message on unknown keys, type errors or missing required
// keys.

#include <cstdint>
#include <string>
#include <vector>

#include "vprad/ensemble.hpp"

namespace vprad {

// Mass-profile staleness across RK stages. staged rebuilds the table from
// the predicted stage positions (collective RK4); frozen keeps the entry
// table for the whole step. frozen biases pair crossings and drifts the
// energy like M*dt per unit time, so staged is the default.
enum class FieldUpdate { staged, frozen };

struct SimConfig {
    // [sim]
    double q = 1.0;
    double lambda = 1.0;
    double t0 = 0.0;
    double t_end = 10.0;

    // [gamma0]
    Gamma0Profile profile;

    // [sampling]
    enum class Sampling { grid, monte_carlo };
    Sampling sampling = Sampling::grid;
    int n_theta = 50;
    int n_a = 40;
    int n_mc = 2000;
    std::uint64_t seed = 1;

    // [time]
    double dt_max = 0.05;
    double dt_min = 0.05;
    double late_factor = 0.0;  // 0 disables the log-uniform growth phase
    FieldUpdate field_update = FieldUpdate::staged;

    // [output]
    std::vector<double> snapshot_times;
    int diagnostics_every = 1;  // steps between diagnostics rows

    // [diagnostics]
    std::vector<std::string> norms = {"1"};
    std::vector<double> tau_grid;
    bool track_tangents = false;
    double tangent_stencil = 1e-3;

    // runtime only, never read from the file (speed, never results)
    int threads = 1;

    void validate() const;  // throws std::invalid_argument
};

SimConfig load_config(const std::string& path);
SimConfig parse_config(const std::string& text, const std::string& origin);

// FNV-1a hash of the raw config file bytes; recorded in snapshot sidecars.
std::uint64_t fnv1a_hash(const std::string& bytes);

// "log:t0,t1,n" helper: n log-spaced times, also accepted inline in the
// snapshot_times config value.
std::vector<double> log_spaced_times(double t_lo, double t_hi, int n);

}  // namespace vprad
