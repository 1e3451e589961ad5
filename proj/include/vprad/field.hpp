#pragma once

// Electrostatic field of the ensemble in O(N log N): sorted radii with
// cumulative mass give the local mass m(r), the field E(r) = m(r)/r^2, the
// max-kernel potential Psi(r) = Sum_j w_j / max{r, R_j}, and the action-angle
// gradient of Psi through the chain rule with dRtilde.
//
// Convention: m uses the inclusive indicator 1_{R <= r}, so a particle's own
// weight is part of the mass it sees; this keeps the pairwise max-kernel sum
// symmetric. The kernel is bounded below by q/max(a)^2, no softening exists.

#include <span>

#include "vprad/aa.hpp"
#include "vprad/ensemble.hpp"

namespace vprad {

class FieldTable {
public:
    // Sources at explicit radii (physical-coordinate path).
    FieldTable(std::span<const double> radii, std::span<const double> weights,
               double t);

    // Sources at Rtilde(theta_j, a_j, t) of the ensemble at its current time.
    static FieldTable build(const ParticleEnsemble& ens);

    double built_at() const { return t_; }
    double total_mass() const { return total_; }
    std::size_t size() const { return radii_.size(); }

    // Rightmost-radius-<=-r cumulative mass; 0 below the first source.
    double mass(double r) const;
    double field(double r) const;      // m(r)/r^2
    double potential(double r) const;  // Sum_j w_j / max{r, R_j}

    // Smoothed density rho = dm/dr over the given bandwidth (diagnostics).
    double density(double r, double bandwidth) const;

    std::span<const double> radii() const { return radii_; }
    std::span<const double> cummass() const { return cummass_; }

private:
    double t_;
    double total_;
    std::vector<double> radii_;    // ascending
    std::vector<double> cummass_;  // cummass_[k] = sum of w over radii_[0..k]
    std::vector<double> suffix_;   // suffix_[k] = sum_{j>=k} w_j / R_j
};

struct PsiGrad {
    double dtheta;
    double da;
};

// Gradient of the conjugated potential at label s and time t:
//   d_beta Psi~ = -(m(Rtilde)/Rtilde^2) * d_beta Rtilde.
PsiGrad grad_psi_tilde(const FieldTable& tbl, AAState s, double t, double q);

}  // namespace vprad
