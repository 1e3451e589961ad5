#include "vprad/ensemble.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace vprad {

double ParticleEnsemble::total_mass() const {
    double s = 0.0;
    for (double wj : w) s += wj;
    return s;
}

double Gamma0Profile::value(double theta, double a) const {
    double dt = (theta - theta_center) / theta_width;
    double da = (a - a_center) / a_width;
    if (kind == Kind::gaussian_bump) {
        if (std::abs(dt) > cutoff_sigma || std::abs(da) > cutoff_sigma)
            return 0.0;
        return epsilon * std::exp(-0.5 * (dt * dt + da * da));
    }
    // cos2_bump: smooth compact support on |dt|,|da| <= 1
    if (std::abs(dt) >= 1.0 || std::abs(da) >= 1.0)
        return 0.0;
    double ct = std::cos(0.5 * M_PI * dt), ca = std::cos(0.5 * M_PI * da);
    return epsilon * ct * ct * ca * ca;
}

void Gamma0Profile::gradient(double theta, double a, double* dth,
                             double* da_out) const {
    double dt = (theta - theta_center) / theta_width;
    double da = (a - a_center) / a_width;
    double val = value(theta, a);
    if (kind == Kind::gaussian_bump) {
        *dth = -dt / theta_width * val;
        *da_out = -da / a_width * val;
        return;
    }
    if (val == 0.0) {
        *dth = *da_out = 0.0;
        return;
    }
    *dth = -epsilon * M_PI / theta_width * std::cos(0.5 * M_PI * dt) *
           std::sin(0.5 * M_PI * dt) * std::cos(0.5 * M_PI * da) *
           std::cos(0.5 * M_PI * da);
    *da_out = -epsilon * M_PI / a_width * std::cos(0.5 * M_PI * dt) *
              std::cos(0.5 * M_PI * dt) * std::cos(0.5 * M_PI * da) *
              std::sin(0.5 * M_PI * da);
}

void Gamma0Profile::support(double* tlo, double* thi, double* alo,
                            double* ahi) const {
    double kt = (kind == Kind::gaussian_bump) ? cutoff_sigma : 1.0;
    *tlo = theta_center - kt * theta_width;
    *thi = theta_center + kt * theta_width;
    *alo = a_center - kt * a_width;
    *ahi = a_center + kt * a_width;
    if (*alo <= 0.0)
        throw std::invalid_argument(
            "gamma0 support reaches a <= 0; shrink a_width or cutoff");
}

ParticleEnsemble sample_grid(const Gamma0Profile& profile, int n_theta,
                             int n_a, bool with_tangents) {
    if (n_theta < 1 || n_a < 1)
        throw std::invalid_argument("sample_grid: counts must be >= 1");
    double tlo, thi, alo, ahi;
    profile.support(&tlo, &thi, &alo, &ahi);
    double dth = (thi - tlo) / n_theta;
    double da = (ahi - alo) / n_a;
    double area = dth * da;

    ParticleEnsemble ens;
    std::size_t n = static_cast<std::size_t>(n_theta) * n_a;
    ens.theta.reserve(n);
    ens.a.reserve(n);
    ens.w.reserve(n);
    for (int i = 0; i < n_theta; ++i) {
        double th = tlo + (i + 0.5) * dth;
        for (int j = 0; j < n_a; ++j) {
            double aj = alo + (j + 0.5) * da;
            double g = profile.value(th, aj);
            ens.theta.push_back(th);
            ens.a.push_back(aj);
            ens.w.push_back(g * g * area);
        }
    }
    if (with_tangents) {
        ens.tangent.assign(4 * n, 0.0);
        ens.gamma0_grad.assign(2 * n, 0.0);
        ens.cell_area.assign(n, area);
        for (std::size_t j = 0; j < n; ++j) {
            ens.tangent[4 * j + 0] = 1.0;
            ens.tangent[4 * j + 3] = 1.0;
            profile.gradient(ens.theta[j], ens.a[j], &ens.gamma0_grad[2 * j],
                             &ens.gamma0_grad[2 * j + 1]);
        }
    }
    return ens;
}

ParticleEnsemble sample_monte_carlo(const Gamma0Profile& profile, int n,
                                    unsigned long long seed) {
    if (n < 1)
        throw std::invalid_argument("sample_monte_carlo: n must be >= 1");
    double tlo, thi, alo, ahi;
    profile.support(&tlo, &thi, &alo, &ahi);
    std::mt19937_64 rng(seed);
    auto unit = [&rng]() {
        return (rng() >> 11) * 0x1.0p-53;  // uniform in [0,1)
    };
    double box = (thi - tlo) * (ahi - alo);

    ParticleEnsemble ens;
    ens.theta.reserve(n);
    ens.a.reserve(n);
    ens.w.reserve(n);
    for (int j = 0; j < n; ++j) {
        double th = tlo + (thi - tlo) * unit();
        double aj = alo + (ahi - alo) * unit();
        double g = profile.value(th, aj);
        ens.theta.push_back(th);
        ens.a.push_back(aj);
        ens.w.push_back(g * g * box / n);
    }
    return ens;
}

}  // namespace vprad
