#pragma once

// Snapshot persistence: columnar little-endian binary (theta, a, w) plus a
// JSON sidecar (endianness, count, time, couplings, config hash), and the
// diagnostics CSV writer with a fixed column order.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "vprad/config.hpp"
#include "vprad/diagnostics.hpp"
#include "vprad/ensemble.hpp"

namespace vprad {

// out_dir/snap_<index padded to 4>.bin + .json
std::filesystem::path write_snapshot(const std::filesystem::path& out_dir,
                                     int index, const ParticleEnsemble& ens,
                                     std::uint64_t config_hash);

struct LoadedSnapshot {
    ParticleEnsemble ens;
    std::uint64_t config_hash = 0;
};

LoadedSnapshot read_snapshot(const std::filesystem::path& bin_path);

// All snapshots of a run directory, ordered by index.
std::vector<LoadedSnapshot> read_run_snapshots(
    const std::filesystem::path& dir);

// Columns: t, mass, energy, norm:<expr>..., [dnorm_theta:a+a^-1,
// dnorm_a:a,] field observables, avg:<a_cut>..., scatter?. Values are
// written with %.17g so the round trip is exact.
class DiagnosticsCsv {
public:
    DiagnosticsCsv(const std::filesystem::path& path, const SimConfig& cfg);
    void write_row(const DiagnosticsRecord& rec);

private:
    std::ofstream out_;
    bool wrote_header_ = false;
};

struct DiagnosticsSeries {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::vector<double> column(const std::string& name) const;
};

DiagnosticsSeries read_diagnostics_csv(const std::filesystem::path& path);

}  // namespace vprad
