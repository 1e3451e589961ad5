#include "vprad/kepler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vprad {

namespace {

struct State {
    double r, v;
};

inline State rhs(const State& y, double q) {
    return {y.v, 0.5 * q / (y.r * y.r)};
}

}  // namespace

PhaseState kepler_flow(PhaseState p, double duration, double q, double tol) {
    if (!(p.r > 0.0))
        throw std::domain_error("kepler_flow: r must be positive");
    if (duration == 0.0)
        return p;

    // Dormand-Prince 5(4) coefficients.
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113,
                            b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    // 4th order weights for the error estimate
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                            e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    const double dir = duration > 0.0 ? 1.0 : -1.0;
    const double t_end = duration;
    double t = 0.0;
    State y{p.r, p.v};
    double h = dir * std::min(std::abs(duration),
                              0.01 * y.r / std::max(1.0, std::abs(y.v)));
    State k1 = rhs(y, q);

    int rejects_in_a_row = 0;
    while (dir * (t_end - t) > 0.0) {
        if (dir * (t + h) > dir * t_end)
            h = t_end - t;
        if (std::abs(h) < 1e3 * std::abs(t) * 2.2e-16 && std::abs(t) > 0.0)
            throw std::runtime_error("kepler_flow: step size underflow");

        auto adv = [&](double c1, double c2, double c3, double c4, double c5,
                       const State* k2, const State* k3, const State* k4,
                       const State* k5) {
            State s{y.r + h * c1 * k1.r, y.v + h * c1 * k1.v};
            if (k2) { s.r += h * c2 * k2->r; s.v += h * c2 * k2->v; }
            if (k3) { s.r += h * c3 * k3->r; s.v += h * c3 * k3->v; }
            if (k4) { s.r += h * c4 * k4->r; s.v += h * c4 * k4->v; }
            if (k5) { s.r += h * c5 * k5->r; s.v += h * c5 * k5->v; }
            return s;
        };

        State y2 = adv(a21, 0, 0, 0, 0, nullptr, nullptr, nullptr, nullptr);
        if (y2.r <= 0.0) { h *= 0.5; continue; }
        State k2 = rhs(y2, q);
        State y3 = adv(a31, a32, 0, 0, 0, &k2, nullptr, nullptr, nullptr);
        if (y3.r <= 0.0) { h *= 0.5; continue; }
        State k3 = rhs(y3, q);
        State y4 = adv(a41, a42, a43, 0, 0, &k2, &k3, nullptr, nullptr);
        if (y4.r <= 0.0) { h *= 0.5; continue; }
        State k4 = rhs(y4, q);
        State y5 = adv(a51, a52, a53, a54, 0, &k2, &k3, &k4, nullptr);
        if (y5.r <= 0.0) { h *= 0.5; continue; }
        State k5 = rhs(y5, q);
        State y6 = adv(a61, a62, a63, a64, a65, &k2, &k3, &k4, &k5);
        if (y6.r <= 0.0) { h *= 0.5; continue; }
        State k6 = rhs(y6, q);

        State y_new{y.r + h * (b1 * k1.r + b3 * k3.r + b4 * k4.r + b5 * k5.r +
                               b6 * k6.r),
                    y.v + h * (b1 * k1.v + b3 * k3.v + b4 * k4.v + b5 * k5.v +
                               b6 * k6.v)};
        if (y_new.r <= 0.0) { h *= 0.5; continue; }
        State k7 = rhs(y_new, q);

        double err_r = h * (e1 * k1.r + e3 * k3.r + e4 * k4.r + e5 * k5.r +
                            e6 * k6.r + e7 * k7.r);
        double err_v = h * (e1 * k1.v + e3 * k3.v + e4 * k4.v + e5 * k5.v +
                            e6 * k6.v + e7 * k7.v);
        double sc_r = tol * std::max(1.0, std::abs(y_new.r));
        double sc_v = tol * std::max(1.0, std::abs(y_new.v));
        double err = std::sqrt(0.5 * ((err_r / sc_r) * (err_r / sc_r) +
                                      (err_v / sc_v) * (err_v / sc_v)));

        if (err <= 1.0) {
            t += h;
            y = y_new;
            k1 = k7;  // FSAL
            rejects_in_a_row = 0;
        } else if (++rejects_in_a_row > 60) {
            throw std::runtime_error("kepler_flow: repeated step rejection");
        }
        double fac = 0.9 * std::pow(err > 0.0 ? err : 1e-10, -0.2);
        h *= std::clamp(fac, 0.2, 5.0);
    }
    return {y.r, y.v};
}

TrajectoryPrediction lagrangian_asymptotics(AAState s, double t, double q,
                                            double lambda, double einf) {
    double a = s.a;
    double lt = std::log(t);
    return {t * a - (0.5 * q / (a * a) + lambda * einf) * lt,
            a - 0.5 * q / (a * t)};
}

}  // namespace vprad
