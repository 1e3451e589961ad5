#include "vprad/evolve.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "vprad/parallel.hpp"

namespace vprad {

namespace {

struct Rhs {
    double dtheta;
    double da;
};

// A particle's own weight is carried with it instead of read positionally
// off the frozen table: m_eff(r) = m(r) - w_self 1_{r >= R_self} + w_self.
// This agrees with the inclusive m(R_j) at the particle's own radius and
// removes the self-jump it would otherwise straddle at low radial velocity
// near periapsis (which degrades the two-chart mutual convergence to O(dt)).
struct SelfTerm {
    double weight = 0.0;
    double radius = 0.0;

    double effective_mass(const FieldTable& tbl, double r) const {
        double m = tbl.mass(r);
        if (r < radius) m += weight;
        return m;
    }
};

// Label dynamics: dtheta/dt = +lambda daPsi~, da/dt = -lambda dthetaPsi~.
inline Rhs label_rhs(const FieldTable& tbl, double theta, double a, double tau,
                     double lambda, double q, const SelfTerm& self) {
    RTildeDeriv d = dR_tilde({theta, a}, tau, q);
    double m = self.effective_mass(tbl, d.value);
    if (m == 0.0) return {0.0, 0.0};
    double f = -m / (d.value * d.value);
    return {lambda * f * d.da, -lambda * f * d.dtheta};
}

struct Mat2 {
    double m11, m12, m21, m22;
};

// Jacobian of the label RHS by centered differences of the effective field.
Mat2 rhs_jacobian(const FieldTable& tbl, double theta, double a, double tau,
                  double lambda, double q, const SelfTerm& self, double rel) {
    double ht = rel * std::max(1.0, std::abs(theta));
    double ha = rel * a;
    auto grad = [&](double th, double aa) {
        RTildeDeriv d = dR_tilde({th, aa}, tau, q);
        double f = -self.effective_mass(tbl, d.value) / (d.value * d.value);
        return PsiGrad{f * d.dtheta, f * d.da};
    };
    PsiGrad tp = grad(theta + ht, a);
    PsiGrad tm = grad(theta - ht, a);
    PsiGrad ap = grad(theta, a + ha);
    PsiGrad am = grad(theta, a - ha);
    double psi_tt = (tp.dtheta - tm.dtheta) / (2.0 * ht);
    double psi_ta = (tp.da - tm.da) / (2.0 * ht);
    double psi_at = (ap.dtheta - am.dtheta) / (2.0 * ha);
    double psi_aa = (ap.da - am.da) / (2.0 * ha);
    return {lambda * psi_ta, lambda * psi_aa, -lambda * psi_tt,
            -lambda * psi_at};
}

inline Mat2 matmul(const Mat2& A, const Mat2& B) {
    return {A.m11 * B.m11 + A.m12 * B.m21, A.m11 * B.m12 + A.m12 * B.m22,
            A.m21 * B.m11 + A.m22 * B.m21, A.m21 * B.m12 + A.m22 * B.m22};
}

}  // namespace

namespace {

void step_aa_frozen(ParticleEnsemble& ens, double dt, const StepOptions& opt) {
    const FieldTable tbl = FieldTable::build(ens);
    const double t = ens.t;
    const double lambda = ens.lambda, q = ens.q;
    const bool tangents = opt.track_tangents && ens.has_tangents();
    std::atomic<bool> bad{false};

    parallel_for(ens.size(), opt.threads, [&](std::size_t j) {
        if (bad.load(std::memory_order_relaxed)) return;
        try {
            double th = ens.theta[j], a = ens.a[j];
            SelfTerm self{ens.w[j], R_tilde({th, a}, t, q)};
            Rhs k1 = label_rhs(tbl, th, a, t, lambda, q, self);
            Rhs k2 = label_rhs(tbl, th + 0.5 * dt * k1.dtheta,
                               a + 0.5 * dt * k1.da, t + 0.5 * dt, lambda, q,
                               self);
            Rhs k3 = label_rhs(tbl, th + 0.5 * dt * k2.dtheta,
                               a + 0.5 * dt * k2.da, t + 0.5 * dt, lambda, q,
                               self);
            Rhs k4 = label_rhs(tbl, th + dt * k3.dtheta, a + dt * k3.da,
                               t + dt, lambda, q, self);
            double th_new = th + dt / 6.0 *
                                     (k1.dtheta + 2.0 * k2.dtheta +
                                      2.0 * k3.dtheta + k4.dtheta);
            double a_new =
                a + dt / 6.0 * (k1.da + 2.0 * k2.da + 2.0 * k3.da + k4.da);
            if (!(a_new > 0.0)) {
                bad.store(true, std::memory_order_relaxed);
                return;
            }

            if (tangents) {
                Mat2 J{ens.tangent[4 * j], ens.tangent[4 * j + 1],
                       ens.tangent[4 * j + 2], ens.tangent[4 * j + 3]};
                double rel = opt.tangent_stencil;
                Mat2 A1 = rhs_jacobian(tbl, th, a, t, lambda, q, self, rel);
                Mat2 K1 = matmul(A1, J);
                auto at = [&](const Mat2& K, double c) {
                    return Mat2{J.m11 + c * dt * K.m11, J.m12 + c * dt * K.m12,
                                J.m21 + c * dt * K.m21, J.m22 + c * dt * K.m22};
                };
                Mat2 A2 = rhs_jacobian(tbl, th + 0.5 * dt * k1.dtheta,
                                       a + 0.5 * dt * k1.da, t + 0.5 * dt,
                                       lambda, q, self, rel);
                Mat2 K2 = matmul(A2, at(K1, 0.5));
                Mat2 A3 = rhs_jacobian(tbl, th + 0.5 * dt * k2.dtheta,
                                       a + 0.5 * dt * k2.da, t + 0.5 * dt,
                                       lambda, q, self, rel);
                Mat2 K3 = matmul(A3, at(K2, 0.5));
                Mat2 A4 = rhs_jacobian(tbl, th + dt * k3.dtheta,
                                       a + dt * k3.da, t + dt, lambda, q, self,
                                       rel);
                Mat2 K4 = matmul(A4, at(K3, 1.0));
                ens.tangent[4 * j] =
                    J.m11 + dt / 6.0 * (K1.m11 + 2 * K2.m11 + 2 * K3.m11 + K4.m11);
                ens.tangent[4 * j + 1] =
                    J.m12 + dt / 6.0 * (K1.m12 + 2 * K2.m12 + 2 * K3.m12 + K4.m12);
                ens.tangent[4 * j + 2] =
                    J.m21 + dt / 6.0 * (K1.m21 + 2 * K2.m21 + 2 * K3.m21 + K4.m21);
                ens.tangent[4 * j + 3] =
                    J.m22 + dt / 6.0 * (K1.m22 + 2 * K2.m22 + 2 * K3.m22 + K4.m22);
            }

            ens.theta[j] = th_new;
            ens.a[j] = a_new;
        } catch (const std::exception&) {
            bad.store(true, std::memory_order_relaxed);
        }
    });
    if (bad.load())
        throw std::runtime_error(
            "step_aa: an action left (0, inf); dt is too large");
    ens.t = t + dt;
}

// Collective RK4: each stage's mass profile is rebuilt from the predicted
// stage positions, so every particle sits exactly on its own table radius at
// every evaluation (inclusive mass, no self-jump excursions).
void step_aa_staged(ParticleEnsemble& ens, double dt, const StepOptions& opt) {
    const double t = ens.t;
    const double lambda = ens.lambda, q = ens.q;
    const std::size_t n = ens.size();
    const bool tangents = opt.track_tangents && ens.has_tangents();
    std::atomic<bool> bad{false};

    std::vector<double> radii(n), sth(n), sa(n);
    std::vector<double> kt[4], ka[4];
    for (int i = 0; i < 4; ++i) {
        kt[i].resize(n);
        ka[i].resize(n);
    }
    std::vector<Mat2> A[4];
    if (tangents)
        for (int i = 0; i < 4; ++i) A[i].resize(n);

    auto predict = [&](int from, double c) {
        parallel_for(n, opt.threads, [&](std::size_t j) {
            sth[j] = ens.theta[j] + c * dt * kt[from][j];
            sa[j] = ens.a[j] + c * dt * ka[from][j];
            if (!(sa[j] > 0.0)) bad.store(true, std::memory_order_relaxed);
        });
        if (bad.load())
            throw std::runtime_error(
                "step_aa: an action left (0, inf); dt is too large");
    };

    auto stage = [&](int i, double tau) {
        parallel_for(n, opt.threads, [&](std::size_t j) {
            radii[j] = R_tilde({sth[j], sa[j]}, tau, q);
        });
        FieldTable tbl(radii, ens.w, tau);
        parallel_for(n, opt.threads, [&](std::size_t j) {
            try {
                RTildeDeriv d = dR_tilde({sth[j], sa[j]}, tau, q);
                double m = tbl.mass(d.value);
                double f = m > 0.0 ? -m / (d.value * d.value) : 0.0;
                kt[i][j] = lambda * f * d.da;
                ka[i][j] = -lambda * f * d.dtheta;
                if (tangents)
                    A[i][j] = rhs_jacobian(tbl, sth[j], sa[j], tau, lambda, q,
                                           SelfTerm{ens.w[j], d.value},
                                           opt.tangent_stencil);
            } catch (const std::exception&) {
                bad.store(true, std::memory_order_relaxed);
            }
        });
        if (bad.load())
            throw std::runtime_error(
                "step_aa: stage evaluation failed; dt is too large");
    };

    sth = ens.theta;
    sa = ens.a;
    stage(0, t);
    predict(0, 0.5);
    stage(1, t + 0.5 * dt);
    predict(1, 0.5);
    stage(2, t + 0.5 * dt);
    predict(2, 1.0);
    stage(3, t + dt);

    parallel_for(n, opt.threads, [&](std::size_t j) {
        double a_new = ens.a[j] + dt / 6.0 *
                                      (ka[0][j] + 2.0 * ka[1][j] +
                                       2.0 * ka[2][j] + ka[3][j]);
        if (!(a_new > 0.0)) {
            bad.store(true, std::memory_order_relaxed);
            return;
        }
        if (tangents) {
            Mat2 J{ens.tangent[4 * j], ens.tangent[4 * j + 1],
                   ens.tangent[4 * j + 2], ens.tangent[4 * j + 3]};
            Mat2 K1 = matmul(A[0][j], J);
            auto at = [&](const Mat2& K, double c) {
                return Mat2{J.m11 + c * dt * K.m11, J.m12 + c * dt * K.m12,
                            J.m21 + c * dt * K.m21, J.m22 + c * dt * K.m22};
            };
            Mat2 K2 = matmul(A[1][j], at(K1, 0.5));
            Mat2 K3 = matmul(A[2][j], at(K2, 0.5));
            Mat2 K4 = matmul(A[3][j], at(K3, 1.0));
            ens.tangent[4 * j] =
                J.m11 + dt / 6.0 * (K1.m11 + 2 * K2.m11 + 2 * K3.m11 + K4.m11);
            ens.tangent[4 * j + 1] =
                J.m12 + dt / 6.0 * (K1.m12 + 2 * K2.m12 + 2 * K3.m12 + K4.m12);
            ens.tangent[4 * j + 2] =
                J.m21 + dt / 6.0 * (K1.m21 + 2 * K2.m21 + 2 * K3.m21 + K4.m21);
            ens.tangent[4 * j + 3] =
                J.m22 + dt / 6.0 * (K1.m22 + 2 * K2.m22 + 2 * K3.m22 + K4.m22);
        }
        ens.theta[j] += dt / 6.0 * (kt[0][j] + 2.0 * kt[1][j] +
                                    2.0 * kt[2][j] + kt[3][j]);
        ens.a[j] = a_new;
    });
    if (bad.load())
        throw std::runtime_error(
            "step_aa: an action left (0, inf); dt is too large");
    ens.t = t + dt;
}

}  // namespace

void step_aa(ParticleEnsemble& ens, double dt, const StepOptions& opt) {
    if (!(dt > 0.0))
        throw std::invalid_argument("step_aa: dt must be positive");
    if (opt.field_update == FieldUpdate::frozen)
        step_aa_frozen(ens, dt, opt);
    else
        step_aa_staged(ens, dt, opt);
}

PhysicalEnsemble to_physical(const ParticleEnsemble& ens) {
    PhysicalEnsemble out;
    out.t = ens.t;
    out.lambda = ens.lambda;
    out.q = ens.q;
    out.w = ens.w;
    out.r.resize(ens.size());
    out.v.resize(ens.size());
    for (std::size_t j = 0; j < ens.size(); ++j) {
        PhaseState p = from_aa({ens.theta[j] + ens.t * ens.a[j], ens.a[j]}, ens.q);
        out.r[j] = p.r;
        out.v[j] = p.v;
    }
    return out;
}

ParticleEnsemble to_action_angle(const PhysicalEnsemble& ens) {
    ParticleEnsemble out;
    out.t = ens.t;
    out.lambda = ens.lambda;
    out.q = ens.q;
    out.w = ens.w;
    out.theta.resize(ens.r.size());
    out.a.resize(ens.r.size());
    for (std::size_t j = 0; j < ens.r.size(); ++j) {
        AAState s = to_aa({ens.r[j], ens.v[j]}, ens.q);
        out.theta[j] = s.theta - ens.t * s.a;
        out.a[j] = s.a;
    }
    return out;
}

namespace {

void step_physical_frozen(PhysicalEnsemble& ens, double dt,
                          const StepOptions& opt) {
    const FieldTable tbl(ens.r, ens.w, ens.t);
    const double lambda = ens.lambda, q = ens.q;
    std::atomic<bool> bad{false};

    auto rhs = [&](double r, double v, const SelfTerm& self, double* dr,
                   double* dv) -> bool {
        if (!(r > 0.0)) return false;
        *dr = v;
        *dv = 0.5 * q / (r * r) +
              lambda * self.effective_mass(tbl, r) / (r * r);
        return true;
    };

    parallel_for(ens.r.size(), opt.threads, [&](std::size_t j) {
        if (bad.load(std::memory_order_relaxed)) return;
        double r = ens.r[j], v = ens.v[j];
        SelfTerm self{ens.w[j], r};
        double k1r, k1v, k2r, k2v, k3r, k3v, k4r, k4v;
        bool ok =
            rhs(r, v, self, &k1r, &k1v) &&
            rhs(r + 0.5 * dt * k1r, v + 0.5 * dt * k1v, self, &k2r, &k2v) &&
            rhs(r + 0.5 * dt * k2r, v + 0.5 * dt * k2v, self, &k3r, &k3v) &&
            rhs(r + dt * k3r, v + dt * k3v, self, &k4r, &k4v);
        if (!ok) {
            bad.store(true, std::memory_order_relaxed);
            return;
        }
        double r_new = r + dt / 6.0 * (k1r + 2 * k2r + 2 * k3r + k4r);
        if (!(r_new > 0.0)) {
            bad.store(true, std::memory_order_relaxed);
            return;
        }
        ens.r[j] = r_new;
        ens.v[j] = v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    });
    if (bad.load())
        throw std::runtime_error(
            "step_physical: a radius left (0, inf); dt is too large");
    ens.t += dt;
}

void step_physical_staged(PhysicalEnsemble& ens, double dt,
                          const StepOptions& opt) {
    const double lambda = ens.lambda, q = ens.q;
    const std::size_t n = ens.r.size();
    std::atomic<bool> bad{false};

    std::vector<double> sr(n), sv(n);
    std::vector<double> kr[4], kv[4];
    for (int i = 0; i < 4; ++i) {
        kr[i].resize(n);
        kv[i].resize(n);
    }

    auto predict = [&](int from, double c) {
        parallel_for(n, opt.threads, [&](std::size_t j) {
            sr[j] = ens.r[j] + c * dt * kr[from][j];
            sv[j] = ens.v[j] + c * dt * kv[from][j];
            if (!(sr[j] > 0.0)) bad.store(true, std::memory_order_relaxed);
        });
        if (bad.load())
            throw std::runtime_error(
                "step_physical: a radius left (0, inf); dt is too large");
    };

    auto stage = [&](int i, double tau) {
        FieldTable tbl(sr, ens.w, tau);
        parallel_for(n, opt.threads, [&](std::size_t j) {
            kr[i][j] = sv[j];
            kv[i][j] = 0.5 * q / (sr[j] * sr[j]) +
                       lambda * tbl.mass(sr[j]) / (sr[j] * sr[j]);
        });
    };

    sr = ens.r;
    sv = ens.v;
    stage(0, ens.t);
    predict(0, 0.5);
    stage(1, ens.t + 0.5 * dt);
    predict(1, 0.5);
    stage(2, ens.t + 0.5 * dt);
    predict(2, 1.0);
    stage(3, ens.t + dt);

    parallel_for(n, opt.threads, [&](std::size_t j) {
        double r_new = ens.r[j] + dt / 6.0 * (kr[0][j] + 2 * kr[1][j] +
                                              2 * kr[2][j] + kr[3][j]);
        if (!(r_new > 0.0)) {
            bad.store(true, std::memory_order_relaxed);
            return;
        }
        ens.r[j] = r_new;
        ens.v[j] += dt / 6.0 * (kv[0][j] + 2 * kv[1][j] + 2 * kv[2][j] +
                                kv[3][j]);
    });
    if (bad.load())
        throw std::runtime_error(
            "step_physical: a radius left (0, inf); dt is too large");
    ens.t += dt;
}

}  // namespace

void step_physical(PhysicalEnsemble& ens, double dt, const StepOptions& opt) {
    if (!(dt > 0.0))
        throw std::invalid_argument("step_physical: dt must be positive");
    if (opt.field_update == FieldUpdate::frozen)
        step_physical_frozen(ens, dt, opt);
    else
        step_physical_staged(ens, dt, opt);
}

double particle_distance(const ParticleEnsemble& x, const ParticleEnsemble& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("particle_distance: size mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        double dth = x.theta[j] - y.theta[j];
        double da = x.a[j] - y.a[j];
        s += x.w[j] * (dth * dth + da * da);
    }
    return std::sqrt(s);
}

DiagnosticsRecord make_record(const ParticleEnsemble& ens,
                              const FieldTable& tbl, const SimConfig& cfg) {
    DiagnosticsRecord rec;
    rec.t = ens.t;
    double mass = 0.0;
    for (double wj : ens.w) mass += wj;
    rec.mass = mass;
    rec.energy = total_energy(ens, tbl);
    for (const std::string& expr : cfg.norms)
        rec.norms.emplace_back("norm:" + expr,
                               weighted_norm(ens, Weight::parse(expr)));
    if (cfg.track_tangents && ens.has_tangents()) {
        rec.norms.emplace_back(
            "dnorm_theta:a+a^-1",
            weighted_dtheta_norm(ens, Weight::parse("a+a^-1")));
        rec.norms.emplace_back("dnorm_a:a",
                               weighted_da_norm(ens, Weight::parse("a")));
    }
    rec.field = field_observables(ens, tbl);
    for (double cut : cfg.tau_grid) {
        char name[48];
        std::snprintf(name, sizeof name, "avg_ind:%.6g", cut);
        rec.averages.emplace_back(name, average_indicator(ens, cut));
    }
    for (double cut : cfg.tau_grid) {
        char name[48];
        std::snprintf(name, sizeof name, "avg_ker:%.6g", cut);
        rec.averages.emplace_back(name, average_max_kernel(ens, cut));
    }
    return rec;
}

ParticleEnsemble run_simulation(const SimConfig& cfg, const RunHooks& hooks) {
    cfg.validate();
    ParticleEnsemble ens =
        cfg.sampling == SimConfig::Sampling::grid
            ? sample_grid(cfg.profile, cfg.n_theta, cfg.n_a, cfg.track_tangents)
            : sample_monte_carlo(cfg.profile, cfg.n_mc, cfg.seed);
    ens.t = cfg.t0;
    ens.lambda = cfg.lambda;
    ens.q = cfg.q;

    StepOptions opt;
    opt.threads = cfg.threads;
    opt.track_tangents = cfg.track_tangents;
    opt.tangent_stencil = cfg.tangent_stencil;

    std::vector<double> snaps = cfg.snapshot_times;
    std::sort(snaps.begin(), snaps.end());

    auto emit_diagnostics = [&] {
        if (!hooks.on_diagnostics) return;
        FieldTable tbl = FieldTable::build(ens);
        hooks.on_diagnostics(make_record(ens, tbl, cfg));
    };

    const double t_tiny = 1e-12 * std::max(1.0, std::abs(cfg.t_end));
    std::size_t next_snap = 0;
    auto flush_snapshots = [&] {
        bool any = false;
        while (next_snap < snaps.size() && snaps[next_snap] <= ens.t + t_tiny) {
            if (hooks.on_snapshot) hooks.on_snapshot(ens);
            ++next_snap;
            any = true;
        }
        return any;
    };

    flush_snapshots();
    emit_diagnostics();

    long step_count = 0;
    while (ens.t < cfg.t_end - t_tiny) {
        double dt = std::min(cfg.dt_max,
                             std::max(cfg.dt_min, cfg.late_factor * ens.t));
        double target = cfg.t_end;
        if (next_snap < snaps.size() && snaps[next_snap] < target)
            target = snaps[next_snap];
        if (ens.t + dt >= target - t_tiny)
            dt = target - ens.t;
        step_aa(ens, dt, opt);
        if (ens.t >= target - t_tiny) ens.t = target;
        ++step_count;

        bool event = flush_snapshots() || ens.t >= cfg.t_end - t_tiny;
        if (event || step_count % cfg.diagnostics_every == 0)
            emit_diagnostics();
    }
    return ens;
}

}  // namespace vprad
