#include <doctest.h>

#include <cmath>
#include <vector>

#include "vprad/structfn.hpp"

using namespace vprad;

namespace {

// Adaptive Simpson quadrature of s/H^2(s) on [0, x]; the independent oracle
// for the closed-form h_integral.
double simpson(double a, double b) {
    auto f = [](double s) {
        double H = eval_H(s);
        return s / (H * H);
    };
    double m = 0.5 * (a + b);
    return (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
}

double integral_oracle(double a, double b, double tol, int depth = 0) {
    double m = 0.5 * (a + b);
    double whole = simpson(a, b);
    double halves = simpson(a, m) + simpson(m, b);
    if (depth > 40 || std::abs(whole - halves) < 15.0 * tol)
        return halves + (halves - whole) / 15.0;
    return integral_oracle(a, m, 0.5 * tol, depth + 1) +
           integral_oracle(m, b, 0.5 * tol, depth + 1);
}

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i)
        g[i] = lo * std::pow(hi / lo, double(i) / (n - 1));
    return g;
}

}  // namespace

TEST_SUITE_BEGIN("structfn");

TEST_CASE("G closed-form anchors") {
    CHECK(eval_G(1.0) == 0.0);
    // G(2) = sqrt(2) + ln(1 + sqrt(2))
    CHECK(eval_G(2.0) == doctest::Approx(2.2955871493926381).epsilon(1e-15));
    CHECK_THROWS_AS(eval_G(0.999), std::domain_error);
}

TEST_CASE("G near-periapsis expansion") {
    // G(1+h) = 2 sqrt(h) + O(h^{3/2})
    for (double h : {1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2}) {
        double g = eval_G1p(h);
        CHECK(std::abs(g - 2.0 * std::sqrt(h)) <= 10.0 * std::pow(h, 1.5));
    }
    // series path and closed form agree across the switchover
    for (double h : {1e-9, 5e-9, 1e-8, 2e-8, 1e-7}) {
        double series = 2.0 * std::sqrt(h) * (1.0 + h / 6.0);
        CHECK(eval_G1p(h) == doctest::Approx(series).epsilon(1e-12));
    }
}

TEST_CASE("G bounds and monotonicity") {
    double prev = 0.0;
    for (double s : log_grid(1.0 + 1e-12, 1e6, 4000)) {
        double g = eval_G(s);
        CHECK(g >= s - 1.0);
        CHECK(g <= s + std::log(2.0 * std::sqrt(s)));
        CHECK(g <= 2.0 * s);
        CHECK(g > prev);
        prev = g;
    }
}

TEST_CASE("H anchors and round trips") {
    CHECK(eval_H(0.0) == 1.0);
    CHECK(eval_H(eval_G(2.0)) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK_THROWS_AS(eval_H(-1e-9), std::domain_error);

    // large-x expansion: H(x) = x - ln(x)/2 - ln2 + 1/2 + ln(x)/(4x) + O(1/x)
    for (double x : {50.0, 100.0, 1e3, 1e4}) {
        double lx = std::log(x);
        double expansion = x - 0.5 * lx - M_LN2 + 0.5 + 0.25 * lx / x;
        CHECK(std::abs(eval_H(x) - expansion) <= 5.0 / x);
    }
    // H(100) four-term value quoted with absolute 0.02 slack
    double x = 100.0;
    double four = x - 0.5 * std::log(x) - M_LN2 + 0.5 + 0.25 * std::log(x) / x;
    CHECK(std::abs(eval_H(x) - four) < 0.02);
}

TEST_CASE("H bounds, inverse property, monotonicity") {
    // H-1 is strictly increasing (H itself saturates to 1.0 in double for
    // x below ~3e-8)
    double prev = -1.0;
    for (double x : log_grid(1e-8, 1e6, 4000)) {
        HEval h = eval_H_full(x);
        CHECK(h.value >= 0.5 * x);
        CHECK(h.value <= x + 1.0);
        CHECK(std::abs(eval_G1p(h.minus_one) - x) <= 1e-12 * x);
        CHECK(h.minus_one > prev);
        prev = h.minus_one;
    }
    for (double s : log_grid(1.0 + 1e-10, 1e6, 500)) {
        double x = eval_G(s);
        CHECK(eval_H(x) == doctest::Approx(s).epsilon(1e-12));
    }
}

TEST_CASE("H derivatives") {
    CHECK(eval_H_prime(0.0) == 0.0);
    CHECK(eval_H_second(0.0) == 0.5);
    CHECK(eval_H_prime(eval_G(2.0)) ==
          doctest::Approx(std::sqrt(0.5)).epsilon(1e-13));

    for (double x : log_grid(1e-3, 1e4, 200)) {
        HEval h = eval_H_full(x);
        CHECK(h.prime >= 0.0);
        CHECK(h.prime <= 1.0);
        CHECK(h.prime >= 1.0 - 1.0 / h.value - 1e-15);
        CHECK(eval_H_second(x) ==
              doctest::Approx(0.5 / (h.value * h.value)).epsilon(1e-12));
        // centered differences of H
        double dx = 1e-6 * std::max(1.0, x);
        double fd = (eval_H(x + dx) - eval_H(x - dx)) / (2.0 * dx);
        CHECK(h.prime == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("h_integral matches adaptive quadrature") {
    for (double x : {1e-3, 0.1, 1.0, 3.0, 10.0, 100.0, 1e3}) {
        double oracle = integral_oracle(0.0, x, 1e-12);
        CHECK(h_integral(x) == doctest::Approx(oracle).epsilon(1e-9));
    }
    CHECK(h_integral(0.0) == 0.0);
    // large-x behavior ~ ln x + 2 ln 2 (H' -> 1, asinh(sqrt(H-1)) ~ ln(2 sqrt(x)))
    double x = 1e8;
    CHECK(h_integral(x) ==
          doctest::Approx(std::log(x) + 2.0 * M_LN2).epsilon(1e-3));
}

TEST_SUITE_END();
