#pragma once

// Structure functions of the repulsive radial Kepler flow:
//   G(s) = sqrt(s(s-1)) + ln(sqrt(s)+sqrt(s-1)),  s >= 1, strictly increasing,
//   H = G^{-1} on [0,inf), H(0) = 1,
//   H'(x) = sqrt((H-1)/H),  H''(x) = 1/(2 H^2).
// G maps the radius ratio r/r_min at fixed energy to the time-like angle
// variable; H recovers the ratio. Both are almost linear:
//   x-1 <= G(x) <= 2x,  x/2 <= H(x) <= x+1.

#include <stdexcept>

namespace vprad {

// Relative tolerance used for the H = G^{-1} Newton solve.
inline constexpr double kInvertTolDefault = 1e-12;

// G(1+hbar) with hbar = s-1 passed directly. Callers that know s-1 exactly
// (e.g. r*v^2/q in the action-angle map) avoid the cancellation in s-1.
double eval_G1p(double hbar);

// G(s), s >= 1. Throws std::domain_error for s < 1.
double eval_G(double s);

// Result of one H-inversion: value, value-1 kept at full precision, and the
// derivative H' = sqrt((H-1)/H).
struct HEval {
    double value;      // H(x) >= 1
    double minus_one;  // H(x) - 1 >= 0, accurate near x = 0
    double prime;      // H'(x) in [0, 1]
};

// Solve G(H) = x to relative tolerance tol (|G(H)-x| <= tol*x), so both
// round trips inherit the relative tolerance. Throws std::domain_error for
// x < 0; a failure of the safeguarded Newton iteration is a defect and
// throws std::logic_error.
HEval eval_H_full(double x, double tol = kInvertTolDefault);

double eval_H(double x, double tol = kInvertTolDefault);
double eval_H_prime(double x, double tol = kInvertTolDefault);
double eval_H_second(double x, double tol = kInvertTolDefault);

// int_0^x s/H^2(s) ds in closed form: 2 H'(x) asinh(sqrt(H(x)-1)).
// This is the kernel of the action derivative of the radius,
//   dR/da = (q/a^3) * (h_integral(a^2|theta|/q) - 2).
double h_integral(double x, double tol = kInvertTolDefault);
double h_integral(const HEval& h);

}  // namespace vprad
