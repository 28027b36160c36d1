#pragma once

// Test-only oracles, independent of the library's solver and quadrature
// paths.  Each one is a deliberately plain implementation (bisection,
// brute-force enumeration, Monte Carlo) used to freeze expected values.

#include "anidec/anisotropy.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace oracles {

using anidec::Real;
using anidec::Vec;

/// |xi|_a by plain bisection on t -> |D_a(1/t) xi| (no logs, no Newton).
inline Real quasi_norm_bisect(const Vec& a, const Vec& xi) {
    Real e = xi.norm();
    if (e == 0.0) return 0.0;
    auto euclid_of = [&](Real t) {
        Real s = 0;
        for (int i = 0; i < a.size(); ++i) s += std::pow(t, -2.0 * a[i]) * xi[i] * xi[i];
        return std::sqrt(s);
    };
    Real lo = 1e-12, hi = 1.0;
    while (euclid_of(lo) < 1.0) lo *= 0.5;
    while (euclid_of(hi) > 1.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        Real mid = 0.5 * (lo + hi);
        (euclid_of(mid) > 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Monte Carlo measure of B_a(0, r) in its bounding box.
inline Real ball_volume_mc(const anidec::Anisotropy& an, Real r, long n, unsigned seed) {
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<Real> u(-1.0, 1.0);
    const int d = an.dim();
    Vec x(d);
    Real box = 1.0;
    std::vector<Real> half(d);
    for (int i = 0; i < d; ++i) {
        half[i] = std::pow(r, an.exponents()[i]);
        box *= 2.0 * half[i];
    }
    long hit = 0;
    for (long k = 0; k < n; ++k) {
        for (int i = 0; i < d; ++i) x[i] = half[i] * u(eng);
        if (an.quasi_norm(x) < r) ++hit;
    }
    return box * static_cast<Real>(hit) / static_cast<Real>(n);
}

}  // namespace oracles
