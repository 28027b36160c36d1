#include "anidec/covering.hpp"

#include <doctest.h>

using namespace anidec;

namespace {
Vec v2(Real x, Real y) {
    Vec v(2);
    v << x, y;
    return v;
}

const Covering& small_covering() {
    static Covering cov = [] {
        Anisotropy an(v2(1.2, 1.8));
        auto h = HybridRegulation::alpha_family(an, 0.5);
        return build_covering(an, h, 0.25, 0.8, Annulus{0.25, 4.0});
    }();
    return cov;
}
}  // namespace

TEST_CASE("ellipsoid overlap") {
    CHECK(ellipsoids_overlap(v2(0, 0), v2(1, 1), v2(1.5, 0), v2(1, 1)));        // crossing discs
    CHECK_FALSE(ellipsoids_overlap(v2(0, 0), v2(1, 1), v2(2.5, 0), v2(1, 1)));  // separated
    CHECK(ellipsoids_overlap(v2(0, 0), v2(2, 2), v2(0.1, 0), v2(0.5, 0.5)));    // nested
    CHECK(ellipsoids_overlap(v2(0, 0), v2(3, 0.2), v2(0, 0.5), v2(0.2, 3)));    // cross shape
    CHECK_FALSE(ellipsoids_overlap(v2(0, 0), v2(1, 0.1), v2(0, 1), v2(1, 0.1)));
    // near-tangent pair
    CHECK_FALSE(ellipsoids_overlap(v2(0, 0), v2(1, 1), v2(2.0 + 1e-9, 0), v2(1, 1)));
}

TEST_CASE("build covering: validation") {
    Anisotropy an(v2(1.2, 1.8));
    auto h = HybridRegulation::alpha_family(an, 0.5);
    CHECK_THROWS_AS(build_covering(an, h, 0.45, 0.8, Annulus{0.5, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(build_covering(an, h, 0.3, 0.8, Annulus{1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(build_covering(an, h, 0.3, 0.8, Annulus{2.0, 1.0}), std::invalid_argument);
}

TEST_CASE("covering basics") {
    const auto& cov = small_covering();
    CHECK(cov.count() > 10);
    CHECK(cov.n0() >= 1);
    CHECK(cov.delta_prime() > 0.0);
    CHECK(cov.delta_prime() < cov.delta());

    // scales are exactly the regulation values at the centers
    for (int j = 0; j < cov.count(); ++j) {
        CHECK(cov.scale(j) == doctest::Approx(cov.regulation().evaluate(cov.center(j))).epsilon(1e-12));
    }

    // packing invariant with the verified factor
    const auto& an = cov.aniso();
    for (int j = 0; j < cov.count(); ++j) {
        for (int k : cov.neighbors(j)) {
            if (k <= j) continue;
            Real rho = an.quasi_norm(cov.center(j) - cov.center(k));
            CHECK(rho >= cov.delta_prime() * std::max(cov.scale(j), cov.scale(k)) * (1 - 1e-12));
        }
    }
}

TEST_CASE("covering verification and overlap height") {
    const auto& cov = small_covering();
    auto v1 = cov.verify_admissible(24);
    CHECK(v1.covered);
    auto v2x = cov.verify_admissible(48);
    CHECK(v2x.covered);
    CHECK(v2x.n0 == v1.n0);  // height stable under grid doubling
}

TEST_CASE("neighbors") {
    const auto& cov = small_covering();
    const auto& an = cov.aniso();
    int max_nb = 0;
    for (int j = 0; j < cov.count(); ++j) {
        const auto& nb = cov.neighbors(j);
        CHECK(std::find(nb.begin(), nb.end(), j) != nb.end());  // self overlap
        max_nb = std::max(max_nb, static_cast<int>(nb.size()));
    }
    CHECK(max_nb >= 1);

    // exhaustive pair check against the exact overlap test
    for (int j = 0; j < cov.count(); ++j) {
        Vec ej(2), ek(2);
        for (int i = 0; i < 2; ++i)
            ej[i] = std::pow(2.0 * cov.delta() * cov.scale(j), an.exponents()[i]);
        for (int k = 0; k < cov.count(); ++k) {
            for (int i = 0; i < 2; ++i)
                ek[i] = std::pow(2.0 * cov.delta() * cov.scale(k), an.exponents()[i]);
            bool listed = std::find(cov.neighbors(j).begin(), cov.neighbors(j).end(), k) !=
                          cov.neighbors(j).end();
            bool overlap = (j == k) || ellipsoids_overlap(cov.center(j), ej, cov.center(k), ek);
            CHECK(listed == overlap);
        }
    }

    // widely separated centers are never neighbors
    Real K = cov.triangle_constant();
    for (int j = 0; j < cov.count(); ++j) {
        for (int k = 0; k < cov.count(); ++k) {
            Real rho = an.quasi_norm(cov.center(j) - cov.center(k));
            if (rho > 2.0 * cov.delta() * K * (cov.scale(j) + cov.scale(k))) {
                const auto& nb = cov.neighbors(j);
                CHECK(std::find(nb.begin(), nb.end(), k) == nb.end());
            }
        }
    }
}

TEST_CASE("moderation transfer to neighbor scales") {
    const auto& cov = small_covering();
    auto est = cov.regulation().estimate_moderation(cov.delta0(), Annulus{0.25, 4.0});
    for (int j = 0; j < cov.count(); ++j) {
        for (int k : cov.neighbors(j)) {
            Real ratio = cov.scale(j) / cov.scale(k);
            CHECK(ratio <= est.ratio * 1.05);
            CHECK(ratio >= 1.0 / (est.ratio * 1.05));
        }
    }
}

TEST_CASE("greedy maximality: no center lies in an earlier center's packing ball") {
    const auto& cov = small_covering();
    const auto& an = cov.aniso();
    // acceptance order = index order, so removing center k would leave the
    // point xi_k uncovered by the packing-radius balls of all j < k
    for (int j = 0; j < cov.count(); ++j) {
        for (int k : cov.neighbors(j)) {
            if (k <= j) continue;
            CHECK_FALSE(an.ball_contains(cov.center(j), cov.delta() * cov.scale(j), cov.center(k)));
        }
    }
}

TEST_CASE("determinism") {
    Anisotropy an(v2(1.2, 1.8));
    auto h = HybridRegulation::alpha_family(an, 0.5);
    auto c1 = build_covering(an, h, 0.3, 0.8, Annulus{0.5, 2.0});
    auto c2 = build_covering(an, h, 0.3, 0.8, Annulus{0.5, 2.0});
    REQUIRE(c1.count() == c2.count());
    for (int j = 0; j < c1.count(); ++j) {
        CHECK(c1.center(j) == c2.center(j));
        CHECK(c1.scale(j) == c2.scale(j));
    }
    CHECK(c1.to_json() == c2.to_json());
    CHECK(c1.to_csv() == c2.to_csv());
}

TEST_CASE("interior points") {
    const auto& cov = small_covering();
    // mid-annulus points should be interior, annulus-edge points not
    Vec mid = cov.aniso().dilate(1.0, v2(std::cos(0.3), std::sin(0.3)));
    Vec edge = cov.aniso().dilate(0.26, v2(1, 0));
    CHECK(cov.is_interior(mid));
    CHECK_FALSE(cov.is_interior(edge));
}
