#pragma once

// Weighted particle sampling of the conjugated density: particles carry
// labels (theta_j, a_j) and fixed weights w_j >= 0 sampling gamma^2 dtheta da.
// Weights never change; Sum(w) is conserved bitwise by construction.

#include <cstddef>
#include <vector>

namespace vprad {

struct ParticleEnsemble {
    std::vector<double> theta;
    std::vector<double> a;
    std::vector<double> w;
    double t = 0.0;
    double lambda = 1.0;
    double q = 1.0;

    // Present only for grid-sampled data with tangent tracking: per-particle
    // flow-map tangents (row-major 2x2, initialized to identity), the initial
    // profile value/gradient and the quadrature cell area.
    std::vector<double> tangent;       // 4*N, [j11 j12 j21 j22]
    std::vector<double> gamma0_grad;   // 2*N, [dgamma0/dtheta dgamma0/da]
    std::vector<double> cell_area;     // N

    std::size_t size() const { return w.size(); }
    bool has_tangents() const { return !tangent.empty(); }

    double total_mass() const;
};

// gamma0 profiles: value and gradient of the named initial density.
struct Gamma0Profile {
    enum class Kind { gaussian_bump, cos2_bump } kind = Kind::gaussian_bump;
    double epsilon = 0.0;
    double theta_center = 0.0;
    double a_center = 1.0;
    double theta_width = 0.5;   // gaussian sigma, or half-support for cos2
    double a_width = 0.175;
    double cutoff_sigma = 4.0;  // compact-support cutoff (gaussian only)

    double value(double theta, double a) const;
    void gradient(double theta, double a, double* dth, double* da) const;
    // support box [theta_lo, theta_hi] x [a_lo, a_hi]
    void support(double* tlo, double* thi, double* alo, double* ahi) const;
};

// Deterministic midpoint-rule sampling on the support box: weights
// w_j = gamma0^2(theta_j, a_j) * dtheta * da. Zero-weight cells are kept so
// particle counts are exactly n_theta*n_a (they carry no mass and no field).
ParticleEnsemble sample_grid(const Gamma0Profile& profile, int n_theta,
                             int n_a, bool with_tangents = false);

// Monte Carlo alternative: n samples uniform on the support box,
// w_j = gamma0^2 * box_area / n. Deterministic for a fixed seed.
ParticleEnsemble sample_monte_carlo(const Gamma0Profile& profile, int n,
                                    unsigned long long seed);

}  // namespace vprad
