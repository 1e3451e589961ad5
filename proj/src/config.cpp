#include "vprad/config.hpp"

#include "vprad/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace vprad {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Entry {
    std::string value;
    int line;
    mutable bool used = false;
};

class Ini {
public:
    Ini(const std::string& text, const std::string& origin) : origin_(origin) {
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string s = trim(line);
            if (auto pos = s.find('#'); pos != std::string::npos)
                s = trim(s.substr(0, pos));
            if (s.empty()) continue;
            if (s.front() == '[') {
                if (s.back() != ']')
                    fail(lineno, "unterminated section header");
                section = trim(s.substr(1, s.size() - 2));
                continue;
            }
            auto eq = s.find('=');
            if (eq == std::string::npos)
                fail(lineno, "expected 'key = value'");
            std::string key = trim(s.substr(0, eq));
            std::string value = trim(s.substr(eq + 1));
            if (key.empty()) fail(lineno, "empty key");
            std::string full = section + "." + key;
            if (entries_.count(full))
                fail(lineno, "duplicate key '" + full + "'");
            entries_[full] = Entry{value, lineno};
        }
    }

    [[noreturn]] void fail(int line, const std::string& msg) const {
        throw std::invalid_argument(origin_ + ":" + std::to_string(line) +
                                    ": " + msg);
    }

    const Entry* find(const std::string& key) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return nullptr;
        it->second.used = true;
        return &it->second;
    }

    const Entry& require(const std::string& key) const {
        const Entry* e = find(key);
        if (!e)
            throw std::invalid_argument(origin_ + ": missing required key '" +
                                        key + "'");
        return *e;
    }

    double number(const std::string& key) const {
        const Entry& e = require(key);
        return to_number(e);
    }
    double number(const std::string& key, double fallback) const {
        const Entry* e = find(key);
        return e ? to_number(*e) : fallback;
    }
    long long integer(const std::string& key) const {
        const Entry& e = require(key);
        double v = to_number(e);
        if (v != std::floor(v)) fail(e.line, "'" + key + "' must be an integer");
        return static_cast<long long>(v);
    }
    long long integer(const std::string& key, long long fallback) const {
        return find(key) ? integer(key) : fallback;
    }
    std::string text(const std::string& key) const { return require(key).value; }
    std::string text(const std::string& key, const std::string& fallback) const {
        const Entry* e = find(key);
        return e ? e->value : fallback;
    }
    bool boolean(const std::string& key, bool fallback) const {
        const Entry* e = find(key);
        if (!e) return fallback;
        if (e->value == "true" || e->value == "1") return true;
        if (e->value == "false" || e->value == "0") return false;
        fail(e->line, "'" + key + "' must be true or false");
    }

    double to_number(const Entry& e) const {
        try {
            std::size_t pos;
            double v = std::stod(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            fail(e.line, "not a number: '" + e.value + "'");
        }
    }

    std::vector<std::string> list(const std::string& key) const {
        const Entry* e = find(key);
        std::vector<std::string> out;
        if (!e) return out;
        std::istringstream in(e->value);
        std::string item;
        while (std::getline(in, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(item);
        }
        return out;
    }

    void check_all_used() const {
        for (const auto& [key, e] : entries_)
            if (!e.used)
                fail(e.line, "unknown key '" + key + "'");
    }

private:
    std::string origin_;
    std::map<std::string, Entry> entries_;
};

}  // namespace

std::vector<double> log_spaced_times(double t_lo, double t_hi, int n) {
    if (!(t_lo > 0.0) || !(t_hi > t_lo) || n < 2)
        throw std::invalid_argument("log_spaced_times: need 0 < t_lo < t_hi, n >= 2");
    std::vector<double> out(n);
    double ratio = std::log(t_hi / t_lo) / (n - 1);
    for (int i = 0; i < n; ++i) out[i] = t_lo * std::exp(i * ratio);
    out.back() = t_hi;
    return out;
}

SimConfig parse_config(const std::string& text, const std::string& origin) {
    Ini ini(text, origin);
    SimConfig cfg;

    cfg.q = ini.number("sim.q");
    cfg.lambda = ini.number("sim.lambda");
    cfg.t0 = ini.number("sim.t0");
    cfg.t_end = ini.number("sim.t_end");

    std::string prof = ini.text("gamma0.profile");
    if (prof == "gaussian-bump")
        cfg.profile.kind = Gamma0Profile::Kind::gaussian_bump;
    else if (prof == "cos2-bump")
        cfg.profile.kind = Gamma0Profile::Kind::cos2_bump;
    else
        throw std::invalid_argument(origin +
                                    ": unknown gamma0 profile '" + prof + "'");
    cfg.profile.epsilon = ini.number("gamma0.epsilon");
    cfg.profile.theta_center = ini.number("gamma0.theta_center");
    cfg.profile.a_center = ini.number("gamma0.a_center");
    cfg.profile.theta_width = ini.number("gamma0.theta_width");
    cfg.profile.a_width = ini.number("gamma0.a_width");
    cfg.profile.cutoff_sigma = ini.number("gamma0.cutoff_sigma", 4.0);

    std::string sampling = ini.text("sampling.method");
    if (sampling == "grid") {
        cfg.sampling = SimConfig::Sampling::grid;
        cfg.n_theta = static_cast<int>(ini.integer("sampling.n_theta"));
        cfg.n_a = static_cast<int>(ini.integer("sampling.n_a"));
    } else if (sampling == "monte-carlo") {
        cfg.sampling = SimConfig::Sampling::monte_carlo;
        cfg.n_mc = static_cast<int>(ini.integer("sampling.n"));
        cfg.seed = static_cast<std::uint64_t>(ini.integer("sampling.seed"));
    } else {
        throw std::invalid_argument(origin + ": unknown sampling method '" +
                                    sampling + "'");
    }

    cfg.dt_max = ini.number("time.dt_max");
    cfg.dt_min = ini.number("time.dt_min");
    cfg.late_factor = ini.number("time.late_factor");

    for (const std::string& item : ini.list("output.snapshot_times")) {
        if (item.rfind("log:", 0) == 0) {
            std::istringstream in(item.substr(4));
            double lo, hi;
            int n;
            char c1, c2;
            if (!(in >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':')
                throw std::invalid_argument(
                    origin + ": snapshot_times log spec must be log:LO:HI:N");
            auto ts = log_spaced_times(lo, hi, n);
            cfg.snapshot_times.insert(cfg.snapshot_times.end(), ts.begin(),
                                      ts.end());
        } else {
            cfg.snapshot_times.push_back(std::stod(item));
        }
    }
    cfg.diagnostics_every =
        static_cast<int>(ini.integer("output.diagnostics_every", 1));

    auto norms = ini.list("diagnostics.norms");
    if (!norms.empty()) cfg.norms = norms;
    for (const std::string& s : ini.list("diagnostics.tau_grid"))
        cfg.tau_grid.push_back(std::stod(s));
    cfg.track_tangents = ini.boolean("diagnostics.track_tangents", false);
    cfg.tangent_stencil = ini.number("diagnostics.tangent_stencil", 1e-3);

    ini.check_all_used();
    cfg.validate();
    return cfg;
}

SimConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

void SimConfig::validate() const {
    auto need = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("config: ") + what);
    };
    need(q > 0.0, "q must be > 0");
    need(profile.epsilon >= 0.0, "epsilon must be >= 0");
    need(t0 >= 0.0, "t0 must be >= 0");
    need(t_end > t0, "t_end must exceed t0");
    need(profile.theta_width > 0.0 && profile.a_width > 0.0,
         "profile widths must be > 0");
    need(profile.cutoff_sigma > 0.0, "cutoff_sigma must be > 0");
    need(profile.a_center > 0.0, "a_center must be > 0");
    if (sampling == Sampling::grid)
        need(n_theta >= 1 && n_a >= 1, "grid counts must be >= 1");
    else
        need(n_mc >= 1, "monte-carlo count must be >= 1");
    need(dt_max > 0.0, "dt_max must be > 0");
    need(dt_min > 0.0 && dt_min <= dt_max, "need 0 < dt_min <= dt_max");
    need(late_factor >= 0.0, "late_factor must be >= 0");
    need(diagnostics_every >= 1, "diagnostics_every must be >= 1");
    need(tangent_stencil > 0.0, "tangent_stencil must be > 0");
    for (double ts : snapshot_times)
        need(ts >= t0 && ts <= t_end, "snapshot times must lie in [t0, t_end]");
    for (const std::string& expr : norms)
        Weight::parse(expr);  // rejects unsupported weight expressions
    need(threads >= 1, "threads must be >= 1");
    // support must stay off a = 0; Gamma0Profile::support throws otherwise
    double tlo, thi, alo, ahi;
    profile.support(&tlo, &thi, &alo, &ahi);
}

std::uint64_t fnv1a_hash(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace vprad
