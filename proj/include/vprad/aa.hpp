#pragma once

// Canonical "action-angle" transform of the repulsive radial Kepler flow
//   rdot = v, vdot = q/(2 r^2),
// its inverse, the linearly evolved radius Rtilde(theta,a) = R(theta+t a, a)
// with derivatives, and the inversion of Rtilde(theta,a) = r.
//
// Conventions: theta = 0 at periapsis r_min = q/a^2; Theta(r,0) := 0 and
// V(0,a) := 0 exactly. The transform has Jacobian 1 and linearizes the flow:
// Theta(Phi^t) = Theta + t*A, A(Phi^t) = A.

#include <span>
#include <vector>

#include "vprad/structfn.hpp"

namespace vprad {

struct PhaseState {
    double r;  // radius > 0
    double v;  // radial velocity
};

struct AAState {
    double theta;  // angle variable (units of length)
    double a;      // action variable > 0 (units of velocity)
};

AAState to_aa(PhaseState p, double q);
PhaseState from_aa(AAState s, double q);

// R(theta + t*a, a) and V(theta + t*a, a): the state reached from label
// (theta,a) after time t of free flow. t = 0 reduces to R, V.
double R_tilde(AAState s, double t, double q);
double V_tilde(AAState s, double t, double q);

struct RTildeDeriv {
    double value;    // Rtilde
    double dtheta;   // |dtheta| <= 1
    double da;       // = [t dtheta_R + da_R](theta+ta, a)
};
RTildeDeriv dR_tilde(AAState s, double t, double q);

// Second derivatives of Rtilde; only diagnostics need these.
struct RTildeDeriv2 {
    double dtheta_dtheta;
    double dtheta_da;
    double da_da;
};
RTildeDeriv2 d2R_tilde(AAState s, double t, double q);

// Centered finite-difference Jacobian determinants of the two maps.
// to_aa requires v != 0 so the stencil stays in one half-plane.
double jacobian_to_aa(PhaseState p, double q, double rel_step = 1e-5);
double jacobian_from_aa(AAState s, double q, double rel_step = 1e-5);

// Roots of Rtilde(theta,a) = r. The tau branches are the two explicit
// solutions theta = -t*a -+ (q/a^2) G(a^2 r / q), one per queried action with
// a^2 r >= q; the aleph branch is the at-most-one solution in a at fixed
// theta below A = sqrt(q/r)(1 + hbar), hbar = c min(1, r^3/(q^5 t^2)).
enum class BranchKind { aleph, tau1, tau2 };

struct Branch {
    BranchKind kind;
    AAState state;
};

std::vector<Branch> invert_R(double r, double t, double q,
                             std::span<const double> a_grid,
                             std::span<const double> theta_grid = {},
                             double rel_tol = 1e-10);

}  // namespace vprad
