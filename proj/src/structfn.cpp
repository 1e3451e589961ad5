#include "vprad/structfn.hpp"

#include <algorithm>
#include <cmath>

namespace vprad {

namespace {

// Below this, sqrt(s(s-1)) loses half the digits; use the series instead.
constexpr double kSeriesCut = 1e-8;

// Newton seed thresholds for the inversion.
constexpr double kSmallX = 1.0;  // seed H = 1 + (x/2)^2
constexpr double kLargeX = 4.0;  // seed from the large-x expansion of H

}  // namespace

double eval_G1p(double hbar) {
    if (hbar < 0.0)
        throw std::domain_error("eval_G: argument below 1");
    if (hbar <= kSeriesCut) {
        // G(1+h) = 2 sqrt(h) + h^{3/2}/3 - h^{5/2}/20 + ...
        double rt = std::sqrt(hbar);
        return rt * (2.0 + hbar * (1.0 / 3.0 - hbar / 20.0));
    }
    double rt = std::sqrt(hbar);
    double rs = std::sqrt(1.0 + hbar);
    // ln(sqrt(s)+sqrt(s-1)) = log1p(sqrt(s-1) + (sqrt(s)-1))
    return rt * rs + std::log1p(rt + hbar / (rs + 1.0));
}

double eval_G(double s) { return eval_G1p(s - 1.0); }

HEval eval_H_full(double x, double tol) {
    if (x < 0.0)
        throw std::domain_error("eval_H: negative argument");
    if (x == 0.0)
        return {1.0, 0.0, 0.0};
    if (x <= 1e-4) {
        // h = (x/2)^2 (1 - (x/2)^2/3 + O(x^4)): exact to double precision here
        double u = 0.5 * x;
        double h = u * u * (1.0 - u * u / 3.0);
        double H = 1.0 + h;
        return {H, h, std::sqrt(h / H)};
    }

    // Solve G(1+h) = x for h = H-1. Bracket from x/2 <= H <= x+1.
    double lo = std::max(0.0, 0.5 * x - 1.0);
    double hi = x;
    double h;
    if (x < kSmallX) {
        h = 0.25 * x * x;
    } else if (x > kLargeX) {
        // H(x) = x - ln(x)/2 - ln2 + 1/2 + ln(x)/(4x) + O(1/x)
        double lx = std::log(x);
        h = x - 0.5 * lx - M_LN2 + 0.5 + 0.25 * lx / x - 1.0;
    } else {
        h = 0.25 * x * x;  // adequate seed in the midrange
    }
    h = std::clamp(h, lo, hi);
    if (h == 0.0) h = 0.25 * x * x;

    const double target = tol * x;  // relative: round trips inherit it
    bool converged = false;
    for (int it = 0; it < 80; ++it) {
        double f = eval_G1p(h) - x;
        if (std::abs(f) <= target) {
            converged = true;
            break;
        }
        if (f > 0.0)
            hi = h;
        else
            lo = h;
        // Newton step: dG/dh = sqrt((1+h)/h)
        double step = f * std::sqrt(h / (1.0 + h));
        double next = h - step;
        if (!(next > lo) || !(next < hi))
            next = 0.5 * (lo + hi);  // safeguard: bisect
        if (next == h) {
            converged = true;  // bracket collapsed to a neighboring double
            break;
        }
        h = next;
    }
    if (!converged && std::abs(eval_G1p(h) - x) > 64.0 * target)
        throw std::logic_error("eval_H: Newton iteration failed to converge");

    double H = 1.0 + h;
    return {H, h, std::sqrt(h / H)};
}

double eval_H(double x, double tol) { return eval_H_full(x, tol).value; }

double eval_H_prime(double x, double tol) { return eval_H_full(x, tol).prime; }

double eval_H_second(double x, double tol) {
    double H = eval_H_full(x, tol).value;
    return 0.5 / (H * H);
}

double h_integral(const HEval& h) {
    return 2.0 * h.prime * std::asinh(std::sqrt(h.minus_one));
}

double h_integral(double x, double tol) { return h_integral(eval_H_full(x, tol)); }

}  // namespace vprad
