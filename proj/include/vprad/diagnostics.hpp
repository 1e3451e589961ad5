#pragma once

// Monitored quantities: weighted L^2 norms (with tangent-transported
// derivative estimates), trajectory averages, field-decay observables, bulk
// occupancy, asymptotic field/potential profiles, the modified-scattering
// residual, and log-log decay fits.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vprad/ensemble.hpp"
#include "vprad/field.hpp"

namespace vprad {

// Weight expression omega(theta, a) = sum of coeff * theta^p * a^q with
// p a nonnegative integer and q real. Parsed from strings like
// "a^-20+theta^20+a^20" or "a+a^-1" or "2*theta^2*a^-3".
struct Weight {
    struct Term {
        double coeff;
        int theta_pow;
        double a_pow;
    };
    std::vector<Term> terms;
    std::string text;

    double operator()(double theta, double a) const;
    static Weight parse(std::string_view expr);  // throws std::invalid_argument
};

// sqrt( sum_j w_j * omega^2(theta_j, a_j) ): discrete ||omega gamma||_{L^2}.
double weighted_norm(const ParticleEnsemble& ens, const Weight& omega);

// Derivative-norm estimates ||omega d_theta gamma|| and ||omega d_a gamma||
// from the transported tangent matrices; requires ens.has_tangents().
// Diagnostic-quality: exact for the sampled flow map, quadrature-limited.
double weighted_dtheta_norm(const ParticleEnsemble& ens, const Weight& omega);
double weighted_da_norm(const ParticleEnsemble& ens, const Weight& omega);

// <tau>(t) = sum_j w_j tau(a_j) for bounded tau(a).
double average(const ParticleEnsemble& ens,
               const std::function<double(double)>& tau);
double average_indicator(const ParticleEnsemble& ens, double a_cut);
double average_max_kernel(const ParticleEnsemble& ens, double a0);

// Field-decay observables at the ensemble's current time.
//   sup_ens_*: sup over the ensemble's particles.
//   sup_phase_dtheta: sup over ALL of phase space of (1/a)|dtheta Psi~|,
//     which has the closed form max_k m(R_k) / (2 sqrt(q) R_k^{3/2}) over the
//     mass table (maximize (1/a)sqrt(1 - q/(a^2 R)) over a at fixed R).
//   sup_bulk_da: sup over ensemble particles inside the bulk
//     B = {a >= t^{-1/4}, |theta| <= t a/2}.
struct FieldObservables {
    double sup_ens_dtheta = 0.0;   // sup (1/a)|dtheta Psi~| over particles
    double sup_phase_dtheta = 0.0;
    double sup_ens_da = 0.0;       // sup |da Psi~| over particles
    double sup_bulk_da = 0.0;
    double bulk_fraction = 0.0;       // mass fraction in B
    double bulk_star_fraction = 0.0;  // mass fraction in B* (smaller bulk)
};
FieldObservables field_observables(const ParticleEnsemble& ens,
                                   const FieldTable& tbl);

// Discrete total energy in physical coordinates,
//   sum_j w_j (V_j^2 + q/R_j) + lambda * sum_{j,k} w_j w_k / max{R_j, R_k},
// with the interaction sum evaluated through the table in O(N log N).
double total_energy(const ParticleEnsemble& ens, const FieldTable& tbl);
// O(N^2) pairwise oracle for the interaction sum (tests, N small).
double total_energy_pairwise(const ParticleEnsemble& ens);

// Asymptotic per-action profiles from one or more late-time states:
//   Einf(a) = a^{-2} * (mass with action <= a),
//   Psinf(a) = sum_j w_j / max{a, a_j}.
// Several states average the profiles exactly (mass-weighted union).
class ActionProfile {
public:
    explicit ActionProfile(const ParticleEnsemble& ens);
    explicit ActionProfile(std::span<const ParticleEnsemble* const> window);

    double einf(double a) const;
    double psinf(double a) const;

private:
    void add(const ParticleEnsemble& ens, double scale);
    void finalize();
    std::vector<double> actions_;
    std::vector<double> weights_;
    std::vector<double> cummass_;
    std::vector<double> suffix_;  // suffix sums of w/alpha
};

// Lagrangian proxy for the modified-scattering L^2 distance between the
// state at time ens.t and the reference state (same particle identities):
//   sqrt( sum_j w_j [ (theta^_j - theta^_ref_j)^2 + (a_j - a_ref_j)^2 ] ),
// where theta^ = theta + lambda ln(t) Einf(a) when unshear is set and the
// raw theta otherwise.
double scatter_residual(const ParticleEnsemble& ens, const ActionProfile& prof,
                        const ParticleEnsemble& ref, bool unshear);

struct FitResult {
    double slope = 0.0;
    double stderr_slope = 0.0;
    double intercept = 0.0;
    int n = 0;
};

// Ordinary least squares on (ln t, ln value) over t in [t_lo, t_hi].
// Throws std::invalid_argument for < 5 points or nonpositive values.
FitResult decay_fit(std::span<const double> t, std::span<const double> value,
                    double t_lo, double t_hi);

// One diagnostics row; columns are emitted in the order of the members and
// of the declared norm/average lists.
struct DiagnosticsRecord {
    double t = 0.0;
    double mass = 0.0;
    double energy = 0.0;
    std::vector<std::pair<std::string, double>> norms;
    FieldObservables field;
    std::vector<std::pair<std::string, double>> averages;
    std::optional<double> scatter;
};

}  // namespace vprad
