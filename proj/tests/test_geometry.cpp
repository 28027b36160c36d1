#include "anidec/anisotropy.hpp"
#include "anidec/regulation.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace anidec;

namespace {
Vec v2(Real x, Real y) {
    Vec v(2);
    v << x, y;
    return v;
}
Anisotropy desk() { return Anisotropy(v2(1.2, 1.8)); }
}  // namespace

TEST_CASE("anisotropy invariants") {
    auto an = desk();
    CHECK(an.nu() == doctest::Approx(3.0));
    CHECK(an.alpha1() == doctest::Approx(1.2));
    CHECK(an.alpha2() == doctest::Approx(1.8));
    CHECK(an.nu() > an.dim());
    CHECK_THROWS_AS(Anisotropy(v2(1.0, 1.5)), std::invalid_argument);
    CHECK_THROWS_AS(Anisotropy(v2(0.5, 2.0)), std::invalid_argument);
}

TEST_CASE("dilate") {
    Anisotropy iso(v2(1.5, 1.5));
    Vec out = iso.dilate(4.0, v2(1, 0));
    CHECK(out[0] == doctest::Approx(8.0).epsilon(1e-14));
    CHECK(out[1] == 0.0);

    auto an = desk();
    Vec xi = v2(0.3, -0.7);
    Vec id = an.dilate(1.0, xi);
    CHECK(id[0] == xi[0]);
    CHECK(id[1] == xi[1]);

    Vec two = an.dilate(2.0, v2(1, 1));
    CHECK(two[0] == doctest::Approx(std::pow(2.0, 1.2)).epsilon(1e-15));
    CHECK(two[1] == doctest::Approx(std::pow(2.0, 1.8)).epsilon(1e-15));

    CHECK_THROWS_AS(an.dilate(0.0, xi), std::domain_error);
    CHECK_THROWS_AS(an.dilate(-1.0, xi), std::domain_error);
}

TEST_CASE("quasi-norm closed form and bisection oracle") {
    Anisotropy iso(v2(2, 2));
    // all exponents equal: |xi|_a = |xi|^{1/a}
    CHECK(iso.quasi_norm(v2(3, 4)) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));

    auto an = desk();
    CHECK(an.quasi_norm(v2(1, 0)) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(an.quasi_norm(v2(0, 1)) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(an.quasi_norm(v2(0, 0)) == 0.0);

    Rng rng(42);
    for (int k = 0; k < 200; ++k) {
        Vec xi = rng.normal_vec(2) * std::pow(10.0, rng.uniform(-3.0, 3.0));
        if (xi.norm() == 0) continue;
        Real got = an.quasi_norm(xi);
        Real want = oracles::quasi_norm_bisect(an.exponents(), xi);
        CHECK(got == doctest::Approx(want).epsilon(1e-10));
    }
}

TEST_CASE("quasi-norm homogeneity") {
    auto an = desk();
    Rng rng(7);
    Real worst = 0;
    for (int k = 0; k < 2000; ++k) {
        Vec xi = rng.normal_vec(2) * std::pow(10.0, rng.uniform(-2.0, 2.0));
        Real t = std::pow(10.0, rng.uniform(-2.0, 2.0));
        if (xi.norm() == 0) continue;
        Real lhs = an.quasi_norm(an.dilate(t, xi));
        Real rhs = t * an.quasi_norm(xi);
        worst = std::max(worst, std::abs(lhs - rhs) / rhs);
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("quasi-norm continuity") {
    auto an = desk();
    Vec xi = v2(0.8, -0.55);
    Real base = an.quasi_norm(xi);
    Real prev = 1.0;
    for (Real h = 1e-1; h >= 1e-8; h *= 0.1) {
        Real dev = std::abs(an.quasi_norm(xi + v2(h, h)) - base);
        CHECK(dev <= prev + 1e-15);
        prev = dev;
    }
    CHECK(prev <= 1e-6);
}

TEST_CASE("envelope bounds between euclidean powers") {
    auto an = desk();
    Rng rng(3);
    for (int k = 0; k < 500; ++k) {
        Vec xi = rng.normal_vec(2) * std::pow(10.0, rng.uniform(-3.0, 3.0));
        Real e = xi.norm();
        if (e == 0) continue;
        Real q = an.quasi_norm(xi);
        if (q >= 1.0) {
            CHECK(q >= std::pow(e, 1.0 / an.alpha2()) * (1 - 1e-12));
            CHECK(q <= std::pow(e, 1.0 / an.alpha1()) * (1 + 1e-12));
        } else {
            CHECK(q >= std::pow(e, 1.0 / an.alpha1()) * (1 - 1e-12));
            CHECK(q <= std::pow(e, 1.0 / an.alpha2()) * (1 + 1e-12));
        }
    }
}

TEST_CASE("ball membership") {
    auto an = desk();
    CHECK_FALSE(an.ball_contains(v2(0, 0), 1.0, v2(1, 0)));  // boundary point
    Vec xi = v2(0.4, 0.2);
    CHECK(an.ball_contains(xi, 0.5, xi));

    Anisotropy iso(v2(2, 2));
    CHECK_FALSE(iso.ball_contains(v2(0, 0), 2.0, v2(3, 4)));  // |xi|_a = sqrt(5) > 2

    // membership must agree with the root solve
    Rng rng(5);
    for (int k = 0; k < 300; ++k) {
        Vec c = rng.normal_vec(2);
        Vec p = rng.normal_vec(2);
        Real r = std::pow(10.0, rng.uniform(-1.5, 1.0));
        bool fast = an.ball_contains(c, r, p);
        bool slow = an.quasi_norm(p - c) < r;
        CHECK(fast == slow);
    }
}

TEST_CASE("triangle constant estimate") {
    Anisotropy iso(v2(2, 2));
    Real k1 = iso.estimate_triangle_constant(1000);
    CHECK(k1 >= 1.0);
    CHECK(k1 <= std::sqrt(2.0) + 1e-9);

    auto an = desk();
    Real ka = an.estimate_triangle_constant(1000, 99);
    Anisotropy an2(v2(1.2, 1.8));
    Real kb = an2.estimate_triangle_constant(10000, 99);
    CHECK(kb >= ka);  // max over a superset of the same stream
}

TEST_CASE("ball volume scales like t^nu") {
    auto an = desk();
    Real kappa = an.unit_ball_volume(512);
    // d = 2 cross-check: the unit quasi-ball coincides with the euclidean disc
    CHECK(kappa == doctest::Approx(M_PI).epsilon(0.01));
    for (Real t : {0.35, 1.7}) {
        Real vol = an.measure_ball(t, 512);
        CHECK(vol == doctest::Approx(kappa * std::pow(t, an.nu())).epsilon(0.01));
    }
    Real mc = oracles::ball_volume_mc(an, 0.7, 200000, 123);
    CHECK(mc == doctest::Approx(kappa * std::pow(0.7, an.nu())).epsilon(0.02));
}

TEST_CASE("anisotropy json round trip") {
    auto an = desk();
    auto back = Anisotropy::from_json(an.to_json());
    CHECK(back.exponents() == an.exponents());
}

// ---------------------------------------------------------------------------

TEST_CASE("ramp profile") {
    CHECK(ramp(0.1) == 1.0);
    CHECK(ramp(2.0 / 3.0) == 1.0);
    CHECK(ramp(4.0 / 3.0) == 0.0);
    CHECK(ramp(5.0) == 0.0);
    Real prev = 1.0;
    for (int i = 0; i <= 100; ++i) {
        Real r = 0.5 + i * 0.01;
        Real v = ramp(r);
        CHECK(v <= prev + 1e-15);
        prev = v;
    }
}

TEST_CASE("alpha family evaluation") {
    auto an = desk();
    auto h = HybridRegulation::alpha_family(an, 0.5);
    // |xi|_a = 1/2 is in the ramp = 1 regime: h~ = h1 = (1/2)^{3/2}
    Vec u = v2(1, 0);
    Vec xi = an.dilate(0.5, u);
    CHECK(h.evaluate(xi) == doctest::Approx(std::pow(0.5, 1.5)).epsilon(1e-12));
    // |xi|_a = 2 forces ramp = 0: h~ = h2 = 2^{1/2}
    Vec xi2 = an.dilate(2.0, u);
    CHECK(h.evaluate(xi2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    // at |xi|_a = 1 both branches equal 1
    CHECK(h.evaluate_radial(1.0) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(h.evaluate(v2(0, 0)), std::domain_error);
    CHECK(h.evaluate_radial(0.07) > 0.0);
}

TEST_CASE("family bounds on pure regions") {
    auto an = desk();
    auto h = HybridRegulation::alpha_family(an, 0.5);
    for (int i = 0; i < 64; ++i) {
        Real r = 0.05 + i * 0.6 / 64;  // below 2/3
        if (r > 2.0 / 3.0) break;
        Real h1 = h.h1_radial(r);
        CHECK(h1 >= std::pow(r, h.h1_exp()) * (1 - 1e-12));  // c0 = 1
        CHECK(h1 <= r * (1 + 1e-12));                        // c1 = 1
        CHECK(h.evaluate_radial(r) == doctest::Approx(h1));
    }
    for (int i = 0; i < 64; ++i) {
        Real r = 4.0 / 3.0 + i * 0.2;
        Real h2 = h.h2_radial(r);
        CHECK(h2 >= 1.0 - 1e-12);            // c2 = 1
        CHECK(h2 <= r * (1 + 1e-12));        // c3 = 1
        CHECK(h.evaluate_radial(r) == doctest::Approx(h2));
    }
}

TEST_CASE("moderation estimate") {
    auto an = desk();
    Annulus ann{0.125, 8.0};

    // constant h: ratio is exactly 1
    auto est_const = estimate_moderation_radial(
        an, [](Real) { return 0.7; }, 0.5, ann, {}, 21);
    CHECK(est_const.ratio == doctest::Approx(1.0));

    auto h = HybridRegulation::alpha_family(an, 0.5);
    auto est = h.estimate_moderation(0.25, ann);
    CHECK(est.ratio >= 1.0);
    CHECK(est.ratio < 10.0);
    CHECK(est.pairs > 0);

    // refinement stability and a pairwise brute-force oracle on a coarse grid
    RegulationGrid fine;
    fine.radial = 96;
    fine.dirs = 32;
    auto est2 = h.estimate_moderation(0.25, ann, fine);
    CHECK(est2.ratio <= est.ratio * 1.25);
    CHECK(est2.ratio >= est.ratio / 1.25);

    // oracle: all pairs from a coarse deterministic point cloud
    std::vector<Vec> pts;
    for (int ir = 0; ir < 40; ++ir) {
        Real r = 0.125 * std::pow(64.0, ir / 39.0);
        for (int k = 0; k < 24; ++k) {
            Real th = 2 * M_PI * k / 24;
            pts.push_back(an.dilate(r, v2(std::cos(th), std::sin(th))));
        }
    }
    Real r_oracle = 1.0;
    for (const auto& xi : pts) {
        Real hx = h.evaluate(xi);
        for (const auto& zeta : pts) {
            if (an.quasi_norm(xi - zeta) <= 0.25 * hx) {
                Real hz = h.evaluate(zeta);
                r_oracle = std::max(r_oracle, std::max(hx / hz, hz / hx));
            }
        }
    }
    CHECK(r_oracle <= est2.ratio * 1.05);
}

TEST_CASE("extra condition on h2") {
    auto an = desk();
    Annulus ann{0.125, 8.0};

    auto good = HybridRegulation::alpha_family(an, 0.5);
    auto rep = good.check_extra_condition(good.beta(), 1.0, ann);
    CHECK(rep.pass);
    CHECK(rep.r1_fit > 0);
    CHECK(std::isfinite(rep.r1_fit));

    auto flat = HybridRegulation(an, 1.5, 0.0, 1.0);  // constant h2
    auto rep_flat = flat.check_extra_condition(1.0, 1.0, ann);
    CHECK(rep_flat.pass);
    CHECK(rep_flat.r1_fit <= 1.0 + 1e-9);  // h2(zeta)/(a h2(xi)) = 1/a <= 1/rho1

    auto bad = HybridRegulation::alpha_family(an, 1.0, 0.5);
    auto rep_bad = bad.check_extra_condition(0.5, 1.0, ann);
    CHECK_FALSE(rep_bad.pass);
}

TEST_CASE("regulation json round trip") {
    auto an = desk();
    auto h = HybridRegulation::alpha_family(an, 0.5);
    auto back = HybridRegulation::from_json(an, h.to_json());
    CHECK(back.h1_exp() == doctest::Approx(1.5));
    CHECK(back.h2_exp() == doctest::Approx(0.5));
    auto custom = HybridRegulation::from_json(an, R"({"h1_exp":2.0,"h2_exp":0.25,"beta":0.75})");
    CHECK(custom.h1_exp() == doctest::Approx(2.0));
    CHECK(custom.beta() == doctest::Approx(0.75));
}
