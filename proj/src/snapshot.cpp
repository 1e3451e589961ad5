#include "vprad/snapshot.hpp"

#include <algorithm>
#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace vprad {

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little-endian");

namespace {

void write_column(std::ofstream& out, const std::vector<double>& col) {
    out.write(reinterpret_cast<const char*>(col.data()),
              static_cast<std::streamsize>(col.size() * sizeof(double)));
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::filesystem::path write_snapshot(const std::filesystem::path& out_dir,
                                     int index, const ParticleEnsemble& ens,
                                     std::uint64_t config_hash) {
    std::filesystem::create_directories(out_dir);
    char stem[32];
    std::snprintf(stem, sizeof stem, "snap_%04d", index);
    auto bin_path = out_dir / (std::string(stem) + ".bin");
    auto json_path = out_dir / (std::string(stem) + ".json");

    std::ofstream bin(bin_path, std::ios::binary | std::ios::trunc);
    if (!bin)
        throw std::runtime_error("cannot write " + bin_path.string());
    write_column(bin, ens.theta);
    write_column(bin, ens.a);
    write_column(bin, ens.w);
    bin.close();

    nlohmann::ordered_json meta;
    meta["format"] = "vprad-snapshot";
    meta["version"] = 1;
    meta["endianness"] = "little";
    meta["count"] = ens.size();
    meta["t"] = format_double(ens.t);
    meta["lambda"] = format_double(ens.lambda);
    meta["q"] = format_double(ens.q);
    meta["config_hash"] = config_hash;
    meta["columns"] = {"theta", "a", "w"};

    std::ofstream js(json_path, std::ios::trunc);
    if (!js)
        throw std::runtime_error("cannot write " + json_path.string());
    js << meta.dump(2) << "\n";
    return bin_path;
}

LoadedSnapshot read_snapshot(const std::filesystem::path& bin_path) {
    auto json_path = bin_path;
    json_path.replace_extension(".json");
    std::ifstream js(json_path);
    if (!js)
        throw std::runtime_error("missing sidecar " + json_path.string());
    nlohmann::json meta = nlohmann::json::parse(js);
    if (meta.at("format") != "vprad-snapshot" ||
        meta.at("endianness") != "little")
        throw std::runtime_error("unrecognized snapshot header in " +
                                 json_path.string());
    std::size_t n = meta.at("count").get<std::size_t>();

    LoadedSnapshot snap;
    snap.ens.t = std::stod(meta.at("t").get<std::string>());
    snap.ens.lambda = std::stod(meta.at("lambda").get<std::string>());
    snap.ens.q = std::stod(meta.at("q").get<std::string>());
    snap.config_hash = meta.at("config_hash").get<std::uint64_t>();

    std::ifstream bin(bin_path, std::ios::binary);
    if (!bin)
        throw std::runtime_error("cannot open " + bin_path.string());
    auto read_column = [&](std::vector<double>& col) {
        col.resize(n);
        bin.read(reinterpret_cast<char*>(col.data()),
                 static_cast<std::streamsize>(n * sizeof(double)));
        if (static_cast<std::size_t>(bin.gcount()) != n * sizeof(double))
            throw std::runtime_error("truncated snapshot " + bin_path.string());
    };
    read_column(snap.ens.theta);
    read_column(snap.ens.a);
    read_column(snap.ens.w);
    return snap;
}

std::vector<LoadedSnapshot> read_run_snapshots(
    const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> paths;
    if (!std::filesystem::is_directory(dir))
        throw std::runtime_error("not a run directory: " + dir.string());
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        const auto& p = e.path();
        if (p.extension() == ".bin" &&
            p.filename().string().rfind("snap_", 0) == 0)
            paths.push_back(p);
    }
    std::sort(paths.begin(), paths.end());
    std::vector<LoadedSnapshot> out;
    out.reserve(paths.size());
    for (const auto& p : paths) out.push_back(read_snapshot(p));
    return out;
}

DiagnosticsCsv::DiagnosticsCsv(const std::filesystem::path& path,
                               const SimConfig&)
    : out_(path, std::ios::trunc) {
    if (!out_)
        throw std::runtime_error("cannot write " + path.string());
}

void DiagnosticsCsv::write_row(const DiagnosticsRecord& rec) {
    if (!wrote_header_) {
        out_ << "t,mass,energy";
        for (const auto& [name, _] : rec.norms) out_ << "," << name;
        out_ << ",sup_ens_dtheta_psi_over_a,sup_phase_dtheta_psi_over_a,"
                "sup_ens_da_psi,sup_bulk_da_psi,bulk_fraction,"
                "bulk_star_fraction";
        for (const auto& [name, _] : rec.averages) out_ << "," << name;
        if (rec.scatter) out_ << ",scatter_residual";
        out_ << "\n";
        wrote_header_ = true;
    }
    out_ << format_double(rec.t) << "," << format_double(rec.mass) << ","
         << format_double(rec.energy);
    for (const auto& [_, v] : rec.norms) out_ << "," << format_double(v);
    out_ << "," << format_double(rec.field.sup_ens_dtheta) << ","
         << format_double(rec.field.sup_phase_dtheta) << ","
         << format_double(rec.field.sup_ens_da) << ","
         << format_double(rec.field.sup_bulk_da) << ","
         << format_double(rec.field.bulk_fraction) << ","
         << format_double(rec.field.bulk_star_fraction);
    for (const auto& [_, v] : rec.averages) out_ << "," << format_double(v);
    if (rec.scatter) out_ << "," << format_double(*rec.scatter);
    out_ << "\n";
    out_.flush();
}

std::vector<double> DiagnosticsSeries::column(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end())
        throw std::invalid_argument("diagnostics column not found: " + name);
    std::size_t k = static_cast<std::size_t>(it - columns.begin());
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(row.at(k));
    return out;
}

DiagnosticsSeries read_diagnostics_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    DiagnosticsSeries series;
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("empty diagnostics file " + path.string());
    std::istringstream hdr(line);
    std::string cell;
    while (std::getline(hdr, cell, ',')) series.columns.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() != series.columns.size())
            throw std::runtime_error("ragged diagnostics row in " +
                                     path.string());
        series.rows.push_back(std::move(vals));
    }
    return series;
}

}  // namespace vprad
