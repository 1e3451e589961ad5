#pragma once

// Time evolution of the conjugated density by integrating the characteristic
// system of the label dynamics,
//   dtheta/dt = +lambda * da Psi~,   da/dt = -lambda * dtheta Psi~,
// (canonical equations of h = a^2/2 + lambda Psi in the sheared chart; the
// in-code sign test against the physical-coordinate oracle is
// test_evolve.cpp), with RK4 and the mass profile frozen over each step.
// Weights never change. An independent physical-coordinate evolution of the
// same modified dynamics serves as the cross-check oracle.

#include <functional>

#include "vprad/config.hpp"
#include "vprad/diagnostics.hpp"
#include "vprad/ensemble.hpp"
#include "vprad/field.hpp"

namespace vprad {

struct StepOptions {
    int threads = 1;
    FieldUpdate field_update = FieldUpdate::staged;
    bool track_tangents = false;
    double tangent_stencil = 1e-3;  // relative FD stencil for d2 Psi~
};

// One RK4 step of length dt > 0. Throws std::runtime_error if any action
// leaves (0, inf) (dt too large).
void step_aa(ParticleEnsemble& ens, double dt, const StepOptions& opt = {});

// Physical-coordinate twin used as the oracle: same particles as (r_j, v_j).
struct PhysicalEnsemble {
    std::vector<double> r;
    std::vector<double> v;
    std::vector<double> w;
    double t = 0.0;
    double lambda = 1.0;
    double q = 1.0;
};

PhysicalEnsemble to_physical(const ParticleEnsemble& ens);
// Transport back: (theta, a) = (Theta(r,v) - t A(r,v), A(r,v)).
ParticleEnsemble to_action_angle(const PhysicalEnsemble& ens);

// One RK4 step of rdot = v, vdot = q/(2 r^2) + lambda m(r)/r^2 with the mass
// profile frozen at entry — the same modified dynamics as step_aa, so the two
// paths converge to each other at the integrator's order.
void step_physical(PhysicalEnsemble& ens, double dt,
                   const StepOptions& opt = {});

// Weighted L^2 particle distance between two label states with identical
// particle sets: sqrt( sum_j w_j (dtheta_j^2 + da_j^2) ).
double particle_distance(const ParticleEnsemble& x, const ParticleEnsemble& y);

struct RunHooks {
    std::function<void(const DiagnosticsRecord&)> on_diagnostics;
    std::function<void(const ParticleEnsemble&)> on_snapshot;
};

// Deterministic full run per the config: dt(t) = min(dt_max, max(dt_min,
// late_factor*t)) clipped to land on snapshot times and t_end; diagnostics at
// the configured cadence and at every snapshot/end time. Returns the final
// state.
ParticleEnsemble run_simulation(const SimConfig& cfg, const RunHooks& hooks = {});

// Build one diagnostics row for the current state (table must match ens.t).
DiagnosticsRecord make_record(const ParticleEnsemble& ens,
                              const FieldTable& tbl, const SimConfig& cfg);

}  // namespace vprad
