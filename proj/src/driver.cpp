#include "vprad/driver.hpp"

#include <fstream>
#include <stdexcept>

namespace vprad {

RunArtifacts simulate_to_directory(const SimConfig& cfg,
                                   const std::filesystem::path& out_dir,
                                   const std::string& config_bytes) {
    std::filesystem::create_directories(out_dir);
    RunArtifacts art;
    art.dir = out_dir;
    art.config_hash = fnv1a_hash(config_bytes);
    {
        std::ofstream cf(out_dir / "config.ini", std::ios::trunc);
        cf << config_bytes;
    }
    art.diagnostics_csv = out_dir / "diagnostics.csv";
    DiagnosticsCsv csv(art.diagnostics_csv, cfg);

    RunHooks hooks;
    hooks.on_diagnostics = [&](const DiagnosticsRecord& rec) {
        csv.write_row(rec);
    };
    hooks.on_snapshot = [&](const ParticleEnsemble& ens) {
        write_snapshot(out_dir, art.snapshot_count++, ens, art.config_hash);
    };
    run_simulation(cfg, hooks);
    return art;
}

std::vector<DiagnosticsRecord> recompute_records(
    const std::vector<LoadedSnapshot>& snaps, const SimConfig& cfg) {
    std::vector<DiagnosticsRecord> recs;
    recs.reserve(snaps.size());
    for (const LoadedSnapshot& snap : snaps) {
        FieldTable tbl = FieldTable::build(snap.ens);
        recs.push_back(make_record(snap.ens, tbl, cfg));
    }
    return recs;
}

ScatterSeries scattering_series(const std::vector<LoadedSnapshot>& snaps,
                                int window) {
    if (snaps.size() < 2)
        throw std::invalid_argument(
            "scattering_series: need at least two snapshots");
    ScatterSeries out;
    const ParticleEnsemble& ref = snaps.back().ens;
    out.t_ref = ref.t;

    std::vector<const ParticleEnsemble*> tail;
    int first = std::max<int>(0, static_cast<int>(snaps.size()) - window);
    for (std::size_t k = first; k < snaps.size(); ++k)
        tail.push_back(&snaps[k].ens);
    ActionProfile prof(tail);

    for (std::size_t k = 0; k + 1 < snaps.size(); ++k) {
        const ParticleEnsemble& ens = snaps[k].ens;
        if (!(ens.t > 0.0))
            continue;  // ln t correction undefined at t = 0
        out.t.push_back(ens.t);
        out.raw.push_back(scatter_residual(ens, prof, ref, false));
        out.unsheared.push_back(scatter_residual(ens, prof, ref, true));
    }
    return out;
}

}  // namespace vprad
