#include <doctest.h>

#include <cmath>
#include <vector>

#include "vprad/field.hpp"

using namespace vprad;

TEST_SUITE_BEGIN("field");

TEST_CASE("single-particle mass, field, potential") {
    double R1 = 2.0, w = 0.5;
    FieldTable tbl(std::vector<double>{R1}, std::vector<double>{w}, 0.0);

    CHECK(tbl.mass(1.0) == 0.0);
    CHECK(tbl.mass(R1) == w);  // inclusive at the jump
    CHECK(tbl.mass(10.0) == w);
    CHECK(tbl.field(1.0) == 0.0);
    CHECK(tbl.field(2.0 * R1) == doctest::Approx(w / (4.0 * R1 * R1)));
    CHECK(tbl.potential(1.0) == doctest::Approx(w / R1));   // constant inside
    CHECK(tbl.potential(4.0) == doctest::Approx(w / 4.0));  // Coulomb outside
    CHECK_THROWS_AS(tbl.mass(0.0), std::domain_error);
}

TEST_CASE("two equal weights jump twice; ties accumulate") {
    FieldTable tbl(std::vector<double>{1.0, 3.0, 3.0}, std::vector<double>{0.25, 0.25, 0.25},
                   0.0);
    CHECK(tbl.mass(0.5) == 0.0);
    CHECK(tbl.mass(1.0) == 0.25);
    CHECK(tbl.mass(2.9) == 0.25);
    CHECK(tbl.mass(3.0) == 0.75);
    CHECK(tbl.total_mass() == 0.75);
}

TEST_CASE("pairwise oracle for the interaction sum") {
    // Sum_j w_j Psi(R_j) via the table equals the O(N^2) double sum
    std::vector<double> radii, weights;
    unsigned long long s = 88172645463325252ull;
    auto rng = [&s]() {
        s ^= s << 13; s ^= s >> 7; s ^= s << 17;
        return (s >> 11) * 0x1.0p-53;
    };
    for (int j = 0; j < 500; ++j) {
        radii.push_back(0.1 + 10.0 * rng());
        weights.push_back(rng() / 500.0);
    }
    FieldTable tbl(radii, weights, 0.0);
    double via_table = 0.0, pairwise = 0.0;
    for (std::size_t j = 0; j < radii.size(); ++j) {
        via_table += weights[j] * tbl.potential(radii[j]);
        for (std::size_t k = 0; k < radii.size(); ++k)
            pairwise += weights[j] * weights[k] / std::max(radii[j], radii[k]);
    }
    CHECK(via_table == doctest::Approx(pairwise).epsilon(1e-12));
}

TEST_CASE("monotonicity and derivative consistency") {
    std::vector<double> radii, weights;
    for (int j = 0; j < 200; ++j) {
        radii.push_back(0.5 + 0.05 * j);
        weights.push_back(1e-3 * (1 + j % 5));
    }
    FieldTable tbl(radii, weights, 0.0);
    double mprev = -1.0, psiprev = 1e300;
    for (double r = 0.1; r < 15.0; r += 0.07) {
        double m = tbl.mass(r);
        double psi = tbl.potential(r);
        CHECK(m >= mprev);
        CHECK(tbl.field(r) >= 0.0);
        CHECK(psi > 0.0);
        CHECK(psi <= psiprev + 1e-15);
        mprev = m;
        psiprev = psi;
        // -dPsi/dr = E away from jumps (midpoints of the radius comb)
        double rr = r + 0.035;
        double h = 1e-7;
        if (std::abs(std::remainder(rr - 0.5, 0.05)) > 2.0 * h && rr > 0.3) {
            double fd = -(tbl.potential(rr + h) - tbl.potential(rr - h)) / (2 * h);
            CHECK(fd == doctest::Approx(tbl.field(rr)).epsilon(1e-6).scale(1.0));
        }
    }
}

TEST_CASE("density integrates a step back to its weight") {
    FieldTable tbl(std::vector<double>{2.0}, std::vector<double>{0.7}, 0.0);
    double bw = 0.05, sum = 0.0;
    for (double r = 1.0; r < 3.0; r += bw) sum += tbl.density(r, bw) * bw;
    CHECK(sum == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(tbl.density(10.0, 0.1) == 0.0);
}

TEST_CASE("grad_psi_tilde edge cases") {
    ParticleEnsemble empty;
    FieldTable tbl0 = FieldTable::build(empty);
    PsiGrad g0 = grad_psi_tilde(tbl0, {0.3, 1.0}, 1.0, 1.0);
    CHECK(g0.dtheta == 0.0);
    CHECK(g0.da == 0.0);

    // single far particle, query point well inside: m(Rtilde) = 0
    FieldTable tbl(std::vector<double>{100.0}, std::vector<double>{0.5}, 0.0);
    PsiGrad g = grad_psi_tilde(tbl, {0.0, 1.0}, 0.0, 1.0);
    CHECK(g.dtheta == 0.0);
    CHECK(g.da == 0.0);

    // inside mass pulls the sign from dRtilde
    FieldTable near(std::vector<double>{0.5}, std::vector<double>{0.5}, 0.0);
    PsiGrad gn = grad_psi_tilde(near, {2.0, 1.0}, 0.0, 1.0);
    RTildeDeriv d = dR_tilde({2.0, 1.0}, 0.0, 1.0);
    CHECK(gn.dtheta ==
          doctest::Approx(-0.5 / (d.value * d.value) * d.dtheta).epsilon(1e-14));
}

TEST_CASE("build uses Rtilde radii at the ensemble time") {
    ParticleEnsemble ens;
    ens.theta = {0.0, 1.0};
    ens.a = {1.0, 1.5};
    ens.w = {0.1, 0.2};
    ens.t = 3.0;
    ens.q = 1.0;
    FieldTable tbl = FieldTable::build(ens);
    double r0 = R_tilde({0.0, 1.0}, 3.0, 1.0);
    CHECK(tbl.mass(r0) >= 0.1);  // own weight included (inclusive <=)
    CHECK(tbl.built_at() == 3.0);
    CHECK(tbl.total_mass() == doctest::Approx(0.3));
}

TEST_SUITE_END();
