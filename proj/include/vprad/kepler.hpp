#pragma once

// Independent high-order integrator for the characteristic ODE
//   rdot = v, vdot = q/(2 r^2),
// used as the oracle against which the closed-form action-angle solution is
// checked, plus the late-time Lagrangian asymptotics of a trajectory.

#include "vprad/aa.hpp"

namespace vprad {

// Adaptive Dormand-Prince 5(4). duration may be negative (time reversal);
// local error per step is kept below abs_tol + rel_tol*|y|.
PhaseState kepler_flow(PhaseState p, double duration, double q,
                       double tol = 1e-12);

struct TrajectoryPrediction {
    double R;  // t*a - (q/(2a^2) + lambda*Einf(a)) ln t, O(1) constant dropped
    double V;  // a - q/(2 a t)
};

// Two-term late-time prediction for the trajectory labeled by (theta,a).
// einf is the asymptotic field at this action (0 for the linear check).
TrajectoryPrediction lagrangian_asymptotics(AAState s, double t, double q,
                                            double lambda = 0.0,
                                            double einf = 0.0);

}  // namespace vprad
