#include "vprad/aa.hpp"

#include <cmath>
#include <stdexcept>

namespace vprad {

namespace {

// Smallness constant of the aleph region; the source analysis only requires
// "some fixed small constant", validated here by the residual check.
constexpr double kAlephC = 0.125;

inline double sgn(double x) { return x < 0.0 ? -1.0 : 1.0; }

}  // namespace

AAState to_aa(PhaseState p, double q) {
    if (!(p.r > 0.0))
        throw std::domain_error("to_aa: r must be positive");
    double a2 = p.v * p.v + q / p.r;
    double a = std::sqrt(a2);
    if (p.v == 0.0)
        return {0.0, a};
    double rmin = q / a2;
    // r/rmin - 1 = r v^2 / q exactly, so G is evaluated without cancellation.
    double theta = sgn(p.v) * rmin * eval_G1p(p.r * p.v * p.v / q);
    return {theta, a};
}

PhaseState from_aa(AAState s, double q) {
    if (!(s.a > 0.0))
        throw std::domain_error("from_aa: a must be positive");
    double rmin = q / (s.a * s.a);
    HEval h = eval_H_full(s.a * s.a * std::abs(s.theta) / q);
    // a^2 - q/R = a^2 (1 - 1/H), so V = sign(theta) a H'.
    return {rmin * h.value, sgn(s.theta) * s.a * h.prime};
}

double R_tilde(AAState s, double t, double q) {
    return from_aa({s.theta + t * s.a, s.a}, q).r;
}

double V_tilde(AAState s, double t, double q) {
    return from_aa({s.theta + t * s.a, s.a}, q).v;
}

RTildeDeriv dR_tilde(AAState s, double t, double q) {
    if (!(s.a > 0.0))
        throw std::domain_error("dR_tilde: a must be positive");
    double a = s.a;
    double vartheta = s.theta + t * a;
    double x = a * a * std::abs(vartheta) / q;
    HEval h = eval_H_full(x);
    double value = q / (a * a) * h.value;
    double dtheta = sgn(vartheta) * h.prime;
    double da_fixed = q / (a * a * a) * (h_integral(h) - 2.0);
    return {value, dtheta, t * dtheta + da_fixed};
}

RTildeDeriv2 d2R_tilde(AAState s, double t, double q) {
    double a = s.a;
    double vartheta = s.theta + t * a;
    double x = a * a * std::abs(vartheta) / q;
    HEval h = eval_H_full(x);
    double R = q / (a * a) * h.value;
    double dtt = 0.5 * q / (a * a * R * R);
    double dta_fixed = sgn(vartheta) / a * x / (h.value * h.value);
    double daa_fixed =
        q / (a * a * a * a) *
        (6.0 - 3.0 * h_integral(h) + 2.0 * x * x / (h.value * h.value));
    return {dtt, t * dtt + dta_fixed,
            t * t * dtt + 2.0 * t * dta_fixed + daa_fixed};
}

double jacobian_to_aa(PhaseState p, double q, double rel_step) {
    if (p.v == 0.0)
        throw std::domain_error("jacobian_to_aa: stencil needs v != 0");
    double hr = rel_step * p.r;
    double hv = rel_step * std::abs(p.v);
    AAState rp = to_aa({p.r + hr, p.v}, q), rm = to_aa({p.r - hr, p.v}, q);
    AAState vp = to_aa({p.r, p.v + hv}, q), vm = to_aa({p.r, p.v - hv}, q);
    double dT_dr = (rp.theta - rm.theta) / (2.0 * hr);
    double dT_dv = (vp.theta - vm.theta) / (2.0 * hv);
    double dA_dr = (rp.a - rm.a) / (2.0 * hr);
    double dA_dv = (vp.a - vm.a) / (2.0 * hv);
    return dT_dr * dA_dv - dT_dv * dA_dr;
}

double jacobian_from_aa(AAState s, double q, double rel_step) {
    double ht = rel_step * std::max(std::abs(s.theta), q / (s.a * s.a));
    double ha = rel_step * s.a;
    PhaseState tp = from_aa({s.theta + ht, s.a}, q),
               tm = from_aa({s.theta - ht, s.a}, q);
    PhaseState ap = from_aa({s.theta, s.a + ha}, q),
               am = from_aa({s.theta, s.a - ha}, q);
    double dR_dt = (tp.r - tm.r) / (2.0 * ht);
    double dR_da = (ap.r - am.r) / (2.0 * ha);
    double dV_dt = (tp.v - tm.v) / (2.0 * ht);
    double dV_da = (ap.v - am.v) / (2.0 * ha);
    return dR_dt * dV_da - dR_da * dV_dt;
}

std::vector<Branch> invert_R(double r, double t, double q,
                             std::span<const double> a_grid,
                             std::span<const double> theta_grid,
                             double rel_tol) {
    if (!(r > 0.0) || t < 0.0 || !(q > 0.0))
        throw std::domain_error("invert_R: need r > 0, t >= 0, q > 0");
    std::vector<Branch> roots;

    auto accept = [&](BranchKind kind, AAState s) {
        if (std::abs(R_tilde(s, t, q) - r) <= rel_tol * r)
            roots.push_back({kind, s});
    };

    // tau branches: |theta + t a| = (q/a^2) G(a^2 r / q) whenever a^2 r >= q.
    for (double a : a_grid) {
        if (!(a > 0.0) || a * a * r < q)
            continue;
        double g = q / (a * a) * eval_G1p(a * a * r / q - 1.0);
        accept(BranchKind::tau1, {-t * a - g, a});
        accept(BranchKind::tau2, {-t * a + g, a});
    }

    // aleph branch: at most one a in [sqrt(q/r), A] with Rtilde(theta,a) = r.
    double astar = std::sqrt(q / r);
    double hbar =
        kAlephC * std::min(1.0, r * r * r / (q * q * q * q * q * t * t));
    if (t == 0.0) hbar = kAlephC;
    double A = astar * (1.0 + hbar);
    for (double theta : theta_grid) {
        auto f = [&](double a) { return R_tilde({theta, a}, t, q) - r; };
        double lo = astar, hi = A;
        double flo = f(lo), fhi = f(hi);
        if (flo == 0.0) {
            accept(BranchKind::aleph, {theta, lo});
            continue;
        }
        if (fhi > 0.0)
            continue;  // no sign change: no root in the region
        for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
            double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi)
                break;
            if (f(mid) > 0.0)
                lo = mid;
            else
                hi = mid;
        }
        accept(BranchKind::aleph, {theta, 0.5 * (lo + hi)});
    }
    return roots;
}

}  // namespace vprad
