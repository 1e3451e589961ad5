#include "vprad/diagnostics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace vprad {

double Weight::operator()(double theta, double a) const {
    double s = 0.0;
    for (const Term& t : terms) {
        double v = t.coeff;
        if (t.theta_pow > 0) v *= std::pow(theta, t.theta_pow);
        if (t.a_pow != 0.0) v *= std::pow(a, t.a_pow);
        s += v;
    }
    return s;
}

namespace {

struct Cursor {
    std::string_view s;
    std::size_t i = 0;

    void skip_ws() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
            ++i;
    }
    bool eof() {
        skip_ws();
        return i >= s.size();
    }
    char peek() {
        skip_ws();
        return s[i];
    }
    [[noreturn]] void fail(const std::string& what) {
        throw std::invalid_argument("weight '" + std::string(s) + "': " + what);
    }
    double number() {
        skip_ws();
        std::size_t start = i;
        if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
        while (i < s.size() &&
               (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.' ||
                s[i] == 'e' || s[i] == 'E' ||
                ((s[i] == '-' || s[i] == '+') &&
                 (s[i - 1] == 'e' || s[i - 1] == 'E'))))
            ++i;
        if (i == start) fail("expected a number");
        return std::stod(std::string(s.substr(start, i - start)));
    }
};

Weight::Term parse_term(Cursor& c) {
    Weight::Term term{1.0, 0, 0.0};
    bool any = false;
    for (;;) {
        if (c.eof()) break;
        char ch = c.peek();
        if (ch == '+') break;
        if (ch == '*') {
            ++c.i;
            continue;
        }
        if (ch == 't' || ch == 'a') {
            bool is_theta = false;
            if (c.s.compare(c.i, 5, "theta") == 0) {
                is_theta = true;
                c.i += 5;
            } else if (ch == 'a') {
                c.i += 1;
            } else {
                c.fail("unknown symbol (use 'theta' or 'a')");
            }
            double expo = 1.0;
            if (!c.eof() && c.peek() == '^') {
                ++c.i;
                expo = c.number();
            }
            if (is_theta) {
                if (expo < 0.0 || expo != std::floor(expo))
                    c.fail("theta exponent must be a nonnegative integer");
                term.theta_pow += static_cast<int>(expo);
            } else {
                term.a_pow += expo;
            }
            any = true;
        } else if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.' ||
                   ch == '-') {
            term.coeff *= c.number();
            any = true;
        } else {
            c.fail(std::string("unexpected character '") + ch + "'");
        }
    }
    if (!any) c.fail("empty term");
    return term;
}

}  // namespace

Weight Weight::parse(std::string_view expr) {
    Weight w;
    w.text = std::string(expr);
    Cursor c{expr};
    if (c.eof()) c.fail("empty expression");
    for (;;) {
        w.terms.push_back(parse_term(c));
        if (c.eof()) break;
        if (c.peek() != '+') c.fail("expected '+'");
        ++c.i;
        if (c.eof()) c.fail("trailing '+'");
    }
    return w;
}

double weighted_norm(const ParticleEnsemble& ens, const Weight& omega) {
    double s = 0.0;
    for (std::size_t j = 0; j < ens.size(); ++j) {
        double o = omega(ens.theta[j], ens.a[j]);
        s += ens.w[j] * o * o;
    }
    return std::sqrt(s);
}

namespace {

// Gradient of gamma at the particle: grad gamma(t) = J^{-T} grad gamma0.
void transported_gradient(const ParticleEnsemble& ens, std::size_t j,
                          double* dth, double* da) {
    const double* J = &ens.tangent[4 * j];
    double det = J[0] * J[3] - J[1] * J[2];
    double g0t = ens.gamma0_grad[2 * j], g0a = ens.gamma0_grad[2 * j + 1];
    *dth = (J[3] * g0t - J[2] * g0a) / det;
    *da = (-J[1] * g0t + J[0] * g0a) / det;
}

double derivative_norm(const ParticleEnsemble& ens, const Weight& omega,
                       bool wrt_theta) {
    if (!ens.has_tangents())
        throw std::logic_error(
            "derivative norms need an ensemble with tracked tangents");
    double s = 0.0;
    for (std::size_t j = 0; j < ens.size(); ++j) {
        double dth, da;
        transported_gradient(ens, j, &dth, &da);
        double g = wrt_theta ? dth : da;
        double o = omega(ens.theta[j], ens.a[j]);
        s += ens.cell_area[j] * o * o * g * g;
    }
    return std::sqrt(s);
}

}  // namespace

double weighted_dtheta_norm(const ParticleEnsemble& ens, const Weight& omega) {
    return derivative_norm(ens, omega, true);
}

double weighted_da_norm(const ParticleEnsemble& ens, const Weight& omega) {
    return derivative_norm(ens, omega, false);
}

double average(const ParticleEnsemble& ens,
               const std::function<double(double)>& tau) {
    double s = 0.0;
    for (std::size_t j = 0; j < ens.size(); ++j) s += ens.w[j] * tau(ens.a[j]);
    return s;
}

double average_indicator(const ParticleEnsemble& ens, double a_cut) {
    double s = 0.0;
    for (std::size_t j = 0; j < ens.size(); ++j)
        if (ens.a[j] <= a_cut) s += ens.w[j];
    return s;
}

double average_max_kernel(const ParticleEnsemble& ens, double a0) {
    double s = 0.0;
    for (std::size_t j = 0; j < ens.size(); ++j)
        s += ens.w[j] / std::max(a0, ens.a[j]);
    return s;
}

FieldObservables field_observables(const ParticleEnsemble& ens,
                                   const FieldTable& tbl) {
    FieldObservables obs;
    double t = ens.t;
    double a_floor = t > 0.0 ? std::pow(t, -0.25) : 0.0;
    double theta_star = t > 0.0 ? std::pow(t, 0.25) : 0.0;
    double total = 0.0, in_bulk = 0.0, in_bulk_star = 0.0;

    for (std::size_t j = 0; j < ens.size(); ++j) {
        AAState s{ens.theta[j], ens.a[j]};
        PsiGrad g = grad_psi_tilde(tbl, s, t, ens.q);
        double one_over_a = std::abs(g.dtheta) / s.a;
        obs.sup_ens_dtheta = std::max(obs.sup_ens_dtheta, one_over_a);
        obs.sup_ens_da = std::max(obs.sup_ens_da, std::abs(g.da));
        total += ens.w[j];
        bool bulk = t > 0.0 && s.a >= a_floor && std::abs(s.theta) <= 0.5 * t * s.a;
        if (bulk) {
            in_bulk += ens.w[j];
            obs.sup_bulk_da = std::max(obs.sup_bulk_da, std::abs(g.da));
        }
        if (t > 0.0 && std::abs(s.theta) <= theta_star && s.a >= a_floor &&
            s.a <= theta_star)
            in_bulk_star += ens.w[j];
    }
    if (total > 0.0) {
        obs.bulk_fraction = in_bulk / total;
        obs.bulk_star_fraction = in_bulk_star / total;
    }

    auto radii = tbl.radii();
    auto cum = tbl.cummass();
    double amp = 0.0;
    for (std::size_t k = 0; k < radii.size(); ++k)
        amp = std::max(amp, cum[k] / (radii[k] * std::sqrt(radii[k])));
    obs.sup_phase_dtheta = 0.5 * amp / std::sqrt(ens.q);
    return obs;
}

double total_energy(const ParticleEnsemble& ens, const FieldTable& tbl) {
    double kinetic = 0.0, interaction = 0.0;
    for (std::size_t j = 0; j < ens.size(); ++j) {
        PhaseState p = from_aa({ens.theta[j] + ens.t * ens.a[j], ens.a[j]}, ens.q);
        kinetic += ens.w[j] * (p.v * p.v + ens.q / p.r);
        interaction += ens.w[j] * tbl.potential(p.r);
    }
    return kinetic + ens.lambda * interaction;
}

double total_energy_pairwise(const ParticleEnsemble& ens) {
    std::size_t n = ens.size();
    std::vector<double> r(n), v(n);
    for (std::size_t j = 0; j < n; ++j) {
        PhaseState p = from_aa({ens.theta[j] + ens.t * ens.a[j], ens.a[j]}, ens.q);
        r[j] = p.r;
        v[j] = p.v;
    }
    double kinetic = 0.0, interaction = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        kinetic += ens.w[j] * (v[j] * v[j] + ens.q / r[j]);
        for (std::size_t k = 0; k < n; ++k)
            interaction += ens.w[j] * ens.w[k] / std::max(r[j], r[k]);
    }
    return kinetic + ens.lambda * interaction;
}

ActionProfile::ActionProfile(const ParticleEnsemble& ens) {
    add(ens, 1.0);
    finalize();
}

ActionProfile::ActionProfile(std::span<const ParticleEnsemble* const> window) {
    if (window.empty())
        throw std::invalid_argument("ActionProfile: empty window");
    for (const ParticleEnsemble* e : window)
        add(*e, 1.0 / static_cast<double>(window.size()));
    finalize();
}

void ActionProfile::add(const ParticleEnsemble& ens, double scale) {
    for (std::size_t j = 0; j < ens.size(); ++j) {
        actions_.push_back(ens.a[j]);
        weights_.push_back(scale * ens.w[j]);
    }
}

void ActionProfile::finalize() {
    std::size_t n = actions_.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return actions_[i] < actions_[j];
    });
    std::vector<double> a(n), w(n);
    for (std::size_t k = 0; k < n; ++k) {
        a[k] = actions_[order[k]];
        w[k] = weights_[order[k]];
    }
    actions_ = std::move(a);
    weights_ = std::move(w);
    cummass_.resize(n);
    suffix_.assign(n + 1, 0.0);
    double run = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        run += weights_[k];
        cummass_[k] = run;
    }
    for (std::size_t k = n; k-- > 0;)
        suffix_[k] = suffix_[k + 1] + weights_[k] / actions_[k];
}

double ActionProfile::einf(double a) const {
    if (!(a > 0.0))
        throw std::domain_error("einf: a must be positive");
    auto it = std::upper_bound(actions_.begin(), actions_.end(), a);
    if (it == actions_.begin()) return 0.0;
    return cummass_[static_cast<std::size_t>(it - actions_.begin()) - 1] / (a * a);
}

double ActionProfile::psinf(double a) const {
    if (!(a > 0.0))
        throw std::domain_error("psinf: a must be positive");
    auto it = std::upper_bound(actions_.begin(), actions_.end(), a);
    std::size_t k = static_cast<std::size_t>(it - actions_.begin());
    double inner = (k == 0) ? 0.0 : cummass_[k - 1] / a;
    return inner + suffix_[k];
}

double scatter_residual(const ParticleEnsemble& ens, const ActionProfile& prof,
                        const ParticleEnsemble& ref, bool unshear) {
    if (ens.size() != ref.size())
        throw std::invalid_argument("scatter_residual: mismatched particle sets");
    double lt = ens.t > 0.0 ? std::log(ens.t) : 0.0;
    double lt_ref = ref.t > 0.0 ? std::log(ref.t) : 0.0;
    double s = 0.0;
    for (std::size_t j = 0; j < ens.size(); ++j) {
        double th = ens.theta[j];
        double th_ref = ref.theta[j];
        if (unshear) {
            th += ens.lambda * lt * prof.einf(ens.a[j]);
            th_ref += ref.lambda * lt_ref * prof.einf(ref.a[j]);
        }
        double dth = th - th_ref;
        double da = ens.a[j] - ref.a[j];
        s += ens.w[j] * (dth * dth + da * da);
    }
    return std::sqrt(s);
}

FitResult decay_fit(std::span<const double> t, std::span<const double> value,
                    double t_lo, double t_hi) {
    if (t.size() != value.size())
        throw std::invalid_argument("decay_fit: size mismatch");
    std::vector<double> x, y;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi) continue;
        if (!(value[i] > 0.0))
            throw std::invalid_argument("decay_fit: nonpositive value in window");
        x.push_back(std::log(t[i]));
        y.push_back(std::log(value[i]));
    }
    int n = static_cast<int>(x.size());
    if (n < 5)
        throw std::invalid_argument("decay_fit: need at least 5 points in window");
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    FitResult fit;
    fit.n = n;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0.0;
    for (int i = 0; i < n; ++i) {
        double e = y[i] - (fit.intercept + fit.slope * x[i]);
        sse += e * e;
    }
    fit.stderr_slope = n > 2 ? std::sqrt(sse / (n - 2) / sxx) : 0.0;
    return fit;
}

}  // namespace vprad
