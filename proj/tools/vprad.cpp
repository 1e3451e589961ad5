// vprad: CLI for the radial Vlasov-Poisson simulator.
//   transform     canonical-transform property checks (round trips, Jacobians)
//   kepler-check  integrator oracle vs the exact action-angle solution
//   simulate      run a config to a run directory
//   diagnose      recompute observables + decay fits from persisted snapshots
//   scatter       modified-scattering residuals against the final snapshot

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vprad/aa.hpp"
#include "vprad/driver.hpp"
#include "vprad/kepler.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace vprad;

namespace {

void emit_report(const ordered_json& report, const std::string& out_path) {
    std::string text = report.dump(2) + "\n";
    std::cout << text;
    if (!out_path.empty()) {
        fs::path p(out_path);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        std::ofstream f(p, std::ios::trunc);
        f << text;
    }
}

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i)
        g[i] = lo * std::pow(hi / lo, double(i) / (n - 1));
    return g;
}

struct TransformResult {
    double max_roundtrip = 0.0;
    double max_jacobian = 0.0;
    int points = 0;
    ordered_json worst = ordered_json::array();
};

TransformResult run_transform_grid(double q, int n, double fault,
                                   double tol_rt, double tol_jac) {
    TransformResult res;
    auto note = [&](const char* what, double err, double tol, double x,
                    double y) {
        if (err > tol && res.worst.size() < 5)
            res.worst.push_back({{"check", what}, {"err", err},
                                 {"x", x}, {"y", y}, {"q", q}});
    };
    for (double r : log_grid(1e-2, 1e2, n)) {
        for (double vm : log_grid(1e-2, 1e1, n / 2)) {
            for (double v : {vm, -vm}) {
                AAState s = to_aa({r, v}, q);
                s.theta *= (1.0 + fault);
                PhaseState back = from_aa(s, q);
                double err = std::abs(back.r - r) / r +
                             std::abs(back.v - v) / std::max(1.0, std::abs(v));
                res.max_roundtrip = std::max(res.max_roundtrip, err);
                note("roundtrip", err, tol_rt, r, v);
                double jerr = std::abs(jacobian_to_aa({r, v}, q) - 1.0);
                res.max_jacobian = std::max(res.max_jacobian, jerr);
                note("jacobian", jerr, tol_jac, r, v);
                ++res.points;
            }
        }
    }
    for (double a : log_grid(5e-2, 2e1, n / 2)) {
        for (double tm : log_grid(1e-3, 1e2, n / 2)) {
            for (double theta : {tm, -tm}) {
                PhaseState p = from_aa({theta, a}, q);
                AAState back = to_aa(p, q);
                back.theta *= (1.0 + fault);
                double err = std::abs(back.theta - theta) /
                                 std::max(1e-3, std::abs(theta)) +
                             std::abs(back.a - a) / a;
                res.max_roundtrip = std::max(res.max_roundtrip, err);
                note("roundtrip-aa", err, tol_rt, theta, a);
                double jerr = std::abs(jacobian_from_aa({theta, a}, q) - 1.0);
                res.max_jacobian = std::max(res.max_jacobian, jerr);
                note("jacobian-aa", jerr, tol_jac, theta, a);
                ++res.points;
            }
        }
    }
    return res;
}

int cmd_transform(const std::vector<double>& qs, int grid, double tol_rt,
                  double tol_jac, const std::string& fault,
                  const std::string& out_path) {
    double fault_eps = 0.0;
    if (!fault.empty()) {
        if (fault == "perturb-G")
            fault_eps = 1e-7;
        else {
            std::cerr << "unknown --fault-inject '" << fault << "'\n";
            return 2;
        }
    }
    ordered_json report;
    report["check"] = "transform";
    report["tol_roundtrip"] = tol_rt;
    report["tol_jacobian"] = tol_jac;
    if (!fault.empty()) report["fault_inject"] = fault;
    bool pass = true;
    ordered_json per_q = ordered_json::array();
    for (double q : qs) {
        TransformResult res =
            run_transform_grid(q, grid, fault_eps, tol_rt, tol_jac);
        bool ok = res.max_roundtrip <= tol_rt && res.max_jacobian <= tol_jac;
        pass = pass && ok;
        ordered_json entry = {{"q", q},
                              {"points", res.points},
                              {"max_roundtrip", res.max_roundtrip},
                              {"max_jacobian_dev", res.max_jacobian},
                              {"pass", ok}};
        if (!ok) entry["offending"] = res.worst;
        per_q.push_back(entry);
    }
    report["grids"] = per_q;
    report["pass"] = pass;
    emit_report(report, out_path);
    return pass ? 0 : 1;
}

int cmd_kepler_check(int n, unsigned long long seed, double q,
                     const std::vector<double>& times,
                     const std::string& out_path) {
    std::mt19937_64 rng(seed);
    auto unif = [&](double lo, double hi) {
        return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
    };
    double max_lin = 0.0, max_cons = 0.0;
    for (int i = 0; i < n; ++i) {
        PhaseState p{std::exp(unif(std::log(0.2), std::log(5.0))),
                     unif(-2.0, 2.0)};
        AAState s0 = to_aa(p, q);
        for (double t : times) {
            PhaseState pt = kepler_flow(p, t, q, 1e-12);
            AAState st = to_aa(pt, q);
            max_lin = std::max(max_lin,
                               std::abs(st.theta - s0.theta - t * s0.a));
            max_cons = std::max(max_cons, std::abs(st.a - s0.a));
        }
    }
    bool pass = max_lin < 1e-8 && max_cons < 1e-10;
    ordered_json report;
    report["check"] = "kepler";
    report["initial_conditions"] = n;
    report["seed"] = seed;
    report["q"] = q;
    report["times"] = times;
    report["max_linearization_defect"] = max_lin;
    report["max_action_drift"] = max_cons;
    report["tol_linearization"] = 1e-8;
    report["tol_action"] = 1e-10;
    report["pass"] = pass;
    emit_report(report, out_path);
    return pass ? 0 : 1;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 int threads) {
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "cannot open config file '" << config_path << "'\n";
        return 2;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    SimConfig cfg = parse_config(ss.str(), config_path);
    cfg.threads = threads;
    RunArtifacts art = simulate_to_directory(cfg, out_dir, ss.str());
    std::cout << "run complete: " << art.dir.string() << " ("
              << art.snapshot_count << " snapshots, config hash "
              << art.config_hash << ")\n";
    return 0;
}

SimConfig load_run_config(const fs::path& dir) {
    fs::path cfg_path = dir / "config.ini";
    std::ifstream in(cfg_path);
    if (!in)
        throw std::runtime_error("missing " + cfg_path.string() +
                                 " (not a run directory?)");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), cfg_path.string());
}

ordered_json fit_to_json(const FitResult& f) {
    return {{"slope", f.slope},
            {"stderr", f.stderr_slope},
            {"intercept", f.intercept},
            {"points", f.n}};
}

int cmd_diagnose(const std::string& dir_str, double fit_lo, double fit_hi,
                 const std::string& out_path) {
    fs::path dir(dir_str);
    SimConfig cfg = load_run_config(dir);
    auto snaps = read_run_snapshots(dir);
    if (snaps.empty()) {
        std::cerr << "no snapshots in " << dir << "\n";
        return 2;
    }
    auto recs = recompute_records(snaps, cfg);

    ordered_json rows = ordered_json::array();
    std::vector<double> t, sup_phase, sup_bulk_da;
    for (const auto& rec : recs) {
        t.push_back(rec.t);
        sup_phase.push_back(rec.field.sup_phase_dtheta);
        sup_bulk_da.push_back(rec.field.sup_bulk_da);
        ordered_json row;
        row["t"] = rec.t;
        row["mass"] = rec.mass;
        row["energy"] = rec.energy;
        for (const auto& [name, v] : rec.norms) row[name] = v;
        row["sup_phase_dtheta_psi_over_a"] = rec.field.sup_phase_dtheta;
        row["sup_ens_dtheta_psi_over_a"] = rec.field.sup_ens_dtheta;
        row["sup_bulk_da_psi"] = rec.field.sup_bulk_da;
        row["bulk_fraction"] = rec.field.bulk_fraction;
        for (const auto& [name, v] : rec.averages) row[name] = v;
        rows.push_back(row);
    }
    if (fit_hi <= 0.0) fit_hi = t.back();
    if (fit_lo <= 0.0) fit_lo = fit_hi / 100.0;

    ordered_json report;
    report["check"] = "diagnose";
    report["snapshots"] = snaps.size();
    report["fit_window"] = {fit_lo, fit_hi};
    report["records"] = rows;
    ordered_json fits;
    try {
        fits["sup_phase_dtheta_psi_over_a"] =
            fit_to_json(decay_fit(t, sup_phase, fit_lo, fit_hi));
        fits["sup_bulk_da_psi"] =
            fit_to_json(decay_fit(t, sup_bulk_da, fit_lo, fit_hi));
    } catch (const std::exception& e) {
        fits["error"] = e.what();
    }
    report["decay_fits"] = fits;
    emit_report(report, out_path.empty() ? (dir / "diagnose.json").string()
                                         : out_path);
    return 0;
}

int cmd_scatter(const std::string& dir_str, int window, double fit_lo,
                double fit_hi, const std::string& out_path) {
    fs::path dir(dir_str);
    auto snaps = read_run_snapshots(dir);
    if (snaps.size() < 6) {
        std::cerr << "need at least 6 snapshots for the scattering analysis\n";
        return 2;
    }
    ScatterSeries series = scattering_series(snaps, window);
    if (fit_hi <= 0.0) fit_hi = series.t_ref / 10.0;  // avoid the proxy bias
    if (fit_lo <= 0.0) fit_lo = fit_hi / 10.0;

    ordered_json report;
    report["check"] = "scatter";
    report["t_ref"] = series.t_ref;
    report["window"] = window;
    report["fit_window"] = {fit_lo, fit_hi};
    report["t"] = series.t;
    report["raw_residual"] = series.raw;
    report["unsheared_residual"] = series.unsheared;
    try {
        report["raw_fit"] =
            fit_to_json(decay_fit(series.t, series.raw, fit_lo, fit_hi));
        report["unsheared_fit"] =
            fit_to_json(decay_fit(series.t, series.unsheared, fit_lo, fit_hi));
    } catch (const std::exception& e) {
        report["fit_error"] = e.what();
    }
    // improvement factor at the last time inside the fit window
    double best_t = -1.0;
    double improvement = 0.0;
    for (std::size_t k = 0; k < series.t.size(); ++k) {
        if (series.t[k] >= fit_lo && series.t[k] <= fit_hi &&
            series.t[k] > best_t && series.unsheared[k] > 0.0) {
            best_t = series.t[k];
            improvement = series.raw[k] / series.unsheared[k];
        }
    }
    report["improvement_t"] = best_t;
    report["improvement_factor"] = improvement;
    emit_report(report, out_path.empty() ? (dir / "scatter.json").string()
                                         : out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"radial Vlasov-Poisson simulator in action-angle variables"};
    app.require_subcommand(1);

    // transform
    auto* tr = app.add_subcommand("transform",
                                  "canonical-transform property suite");
    std::vector<double> tr_q = {0.5, 1.0, 2.0};
    int tr_grid = 100;
    double tr_tol_rt = 1e-10, tr_tol_jac = 1e-8;
    std::string tr_fault, tr_out;
    tr->add_option("--q", tr_q, "coupling values to sweep");
    tr->add_option("--grid", tr_grid, "grid resolution per axis");
    tr->add_option("--tol-roundtrip", tr_tol_rt, "round-trip tolerance");
    tr->add_option("--tol-jacobian", tr_tol_jac, "|J-1| tolerance");
    tr->add_option("--fault-inject", tr_fault,
                   "test-only negative control (perturb-G)");
    tr->add_option("--out", tr_out, "write the JSON report here");

    // kepler-check
    auto* kc = app.add_subcommand("kepler-check",
                                  "integrator oracle vs exact linearization");
    int kc_n = 100;
    unsigned long long kc_seed = 20240811ull;
    double kc_q = 1.0;
    std::vector<double> kc_times = {1.0, 10.0, 100.0};
    std::string kc_out;
    kc->add_option("--n", kc_n, "number of seeded initial conditions");
    kc->add_option("--seed", kc_seed, "RNG seed");
    kc->add_option("--q", kc_q, "coupling");
    kc->add_option("--times", kc_times, "flow durations");
    kc->add_option("--out", kc_out, "write the JSON report here");

    // simulate
    auto* sim = app.add_subcommand("simulate", "run a configured simulation");
    std::string sim_config, sim_out = "out";
    int sim_threads = 1;
    sim->add_option("--config", sim_config, "config file")->required();
    sim->add_option("--out", sim_out, "run directory");
    sim->add_option("--threads", sim_threads,
                    "worker threads (affects speed, never results)");

    // diagnose
    auto* dg = app.add_subcommand(
        "diagnose", "recompute observables and decay fits from snapshots");
    std::string dg_dir, dg_out;
    double dg_lo = 0.0, dg_hi = 0.0;
    dg->add_option("dir", dg_dir, "run directory")->required();
    dg->add_option("--fit-lo", dg_lo, "fit window lower time");
    dg->add_option("--fit-hi", dg_hi, "fit window upper time");
    dg->add_option("--out", dg_out, "write the JSON report here");

    // scatter
    auto* sc = app.add_subcommand(
        "scatter", "modified-scattering residuals vs the final snapshot");
    std::string sc_dir, sc_out;
    int sc_window = 3;
    double sc_lo = 0.0, sc_hi = 0.0;
    sc->add_option("dir", sc_dir, "run directory")->required();
    sc->add_option("--window", sc_window,
                   "snapshots averaged into the asymptotic profile");
    sc->add_option("--fit-lo", sc_lo, "fit window lower time");
    sc->add_option("--fit-hi", sc_hi, "fit window upper time");
    sc->add_option("--out", sc_out, "write the JSON report here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (tr->parsed())
            return cmd_transform(tr_q, tr_grid, tr_tol_rt, tr_tol_jac,
                                 tr_fault, tr_out);
        if (kc->parsed())
            return cmd_kepler_check(kc_n, kc_seed, kc_q, kc_times, kc_out);
        if (sim->parsed())
            return cmd_simulate(sim_config, sim_out, sim_threads);
        if (dg->parsed())
            return cmd_diagnose(dg_dir, dg_lo, dg_hi, dg_out);
        if (sc->parsed())
            return cmd_scatter(sc_dir, sc_window, sc_lo, sc_hi, sc_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
