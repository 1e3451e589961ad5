#pragma once

// Orchestration shared by the CLI and the acceptance suite: run a config to
// a run directory (snapshots + diagnostics.csv + persisted config), and the
// post-hoc analyses that work from persisted snapshots only.

#include <filesystem>
#include <string>
#include <vector>

#include "vprad/config.hpp"
#include "vprad/diagnostics.hpp"
#include "vprad/evolve.hpp"
#include "vprad/snapshot.hpp"

namespace vprad {

struct RunArtifacts {
    std::filesystem::path dir;
    std::filesystem::path diagnostics_csv;
    int snapshot_count = 0;
    std::uint64_t config_hash = 0;
};

// Runs cfg and writes out_dir/{config.ini, diagnostics.csv, snap_*.bin/json}.
// config_bytes is the raw config text (hashed into the sidecars and saved
// verbatim so the run directory is self-describing).
RunArtifacts simulate_to_directory(const SimConfig& cfg,
                                   const std::filesystem::path& out_dir,
                                   const std::string& config_bytes);

// Rebuild the diagnostics rows for persisted snapshots (the same code path
// as the in-run rows, so values match the CSV at snapshot times exactly).
std::vector<DiagnosticsRecord> recompute_records(
    const std::vector<LoadedSnapshot>& snaps, const SimConfig& cfg);

struct ScatterSeries {
    double t_ref = 0.0;           // reference (last) snapshot time
    std::vector<double> t;        // earlier snapshot times
    std::vector<double> raw;      // residual without the ln t correction
    std::vector<double> unsheared;
};

// Residual series against the last snapshot; the asymptotic field profile is
// averaged over the final `window` snapshots.
ScatterSeries scattering_series(const std::vector<LoadedSnapshot>& snaps,
                                int window = 3);

}  // namespace vprad
