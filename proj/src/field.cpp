#include "vprad/field.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace vprad {

FieldTable::FieldTable(std::span<const double> radii,
                       std::span<const double> weights, double t)
    : t_(t) {
    std::size_t n = radii.size();
    if (weights.size() != n)
        throw std::invalid_argument("FieldTable: radii/weights size mismatch");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    // stable: equal radii accumulate in input order
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return radii[i] < radii[j];
    });
    radii_.resize(n);
    cummass_.resize(n);
    suffix_.resize(n + 1);
    double run = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        radii_[k] = radii[order[k]];
        if (!(radii_[k] > 0.0))
            throw std::invalid_argument("FieldTable: nonpositive radius");
        run += weights[order[k]];
        cummass_[k] = run;
    }
    total_ = run;
    suffix_[n] = 0.0;
    for (std::size_t k = n; k-- > 0;)
        suffix_[k] = suffix_[k + 1] + weights[order[k]] / radii_[k];
}

FieldTable FieldTable::build(const ParticleEnsemble& ens) {
    std::size_t n = ens.size();
    std::vector<double> radii(n);
    for (std::size_t j = 0; j < n; ++j)
        radii[j] = R_tilde({ens.theta[j], ens.a[j]}, ens.t, ens.q);
    return FieldTable(radii, ens.w, ens.t);
}

double FieldTable::mass(double r) const {
    if (!(r > 0.0))
        throw std::domain_error("FieldTable::mass: r must be positive");
    auto it = std::upper_bound(radii_.begin(), radii_.end(), r);
    if (it == radii_.begin())
        return 0.0;
    return cummass_[static_cast<std::size_t>(it - radii_.begin()) - 1];
}

double FieldTable::field(double r) const { return mass(r) / (r * r); }

double FieldTable::potential(double r) const {
    if (!(r > 0.0))
        throw std::domain_error("FieldTable::potential: r must be positive");
    auto it = std::upper_bound(radii_.begin(), radii_.end(), r);
    std::size_t k = static_cast<std::size_t>(it - radii_.begin());
    double inner = (k == 0) ? 0.0 : cummass_[k - 1] / r;
    return inner + suffix_[k];
}

double FieldTable::density(double r, double bandwidth) const {
    if (!(bandwidth > 0.0))
        throw std::domain_error("FieldTable::density: bandwidth must be > 0");
    double lo = r - 0.5 * bandwidth;
    double hi = r + 0.5 * bandwidth;
    double mlo = lo > 0.0 ? mass(lo) : 0.0;
    return (mass(hi) - mlo) / bandwidth;
}

PsiGrad grad_psi_tilde(const FieldTable& tbl, AAState s, double t, double q) {
    if (tbl.size() == 0)
        return {0.0, 0.0};
    RTildeDeriv d = dR_tilde(s, t, q);
    double m = tbl.mass(d.value);
    if (m == 0.0)
        return {0.0, 0.0};
    double f = -m / (d.value * d.value);
    return {f * d.dtheta, f * d.da};
}

}  // namespace vprad
