#include "anidec/anisotropy.hpp"

#include <json.hpp>

#include <cmath>
#include <stdexcept>

namespace anidec {

Anisotropy::Anisotropy(Vec a) : a_(std::move(a)) {
    if (a_.size() == 0) throw std::invalid_argument("anisotropy: empty exponent vector");
    for (int i = 0; i < a_.size(); ++i) {
        if (!(a_[i] > 1.0)) throw std::invalid_argument("anisotropy: every exponent must exceed 1");
    }
    nu_ = a_.sum();
    alpha1_ = a_.minCoeff();
    alpha2_ = a_.maxCoeff();
}

Vec Anisotropy::dilate(Real t, const Vec& xi) const {
    if (!(t > 0.0)) throw std::domain_error("dilate: t must be positive");
    Vec out(xi.size());
    for (int i = 0; i < xi.size(); ++i) out[i] = std::pow(t, a_[i]) * xi[i];
    return out;
}

Real Anisotropy::quasi_norm(const Vec& xi) const {
    // Solve sum_i xi_i^2 t^{-2 a_i} = 1.  In lambda = log t the residual
    // G(lambda) = log sum_i exp(l_i - 2 a_i lambda) is decreasing and convex,
    // so Newton from the left end of the bracket converges monotonically.
    const int d = dim();
    Real e2 = 0;
    for (int i = 0; i < d; ++i) e2 += sqr(xi[i]);
    if (e2 == 0.0) return 0.0;
    const Real E = std::sqrt(e2);

    // start at t0 = max_i |xi_i|^{1/a_i}: G(log t0) >= 0, within a factor
    // 2^{1/(2 alpha1)} of the root, so the monotone Newton needs few steps
    Real lam = -1e300;
    for (int i = 0; i < d; ++i) {
        if (xi[i] != 0.0) lam = std::max(lam, std::log(std::abs(xi[i])) / a_[i]);
    }
    const Real lam_hi = (E >= 1.0) ? std::log(E) / alpha1_ : std::log(E) / alpha2_;

    Real lbuf[8];
    std::vector<Real> lbig;
    Real* lp = lbuf;
    if (d > 8) {
        lbig.resize(d);
        lp = lbig.data();
    }
    for (int i = 0; i < d; ++i) lp[i] = (xi[i] == 0.0) ? -1e300 : std::log(sqr(xi[i]));

    for (int iter = 0; iter < 200; ++iter) {
        Real s = 0, sa = 0;
        for (int i = 0; i < d; ++i) {
            if (lp[i] <= -1e299) continue;
            Real term = std::exp(lp[i] - 2.0 * a_[i] * lam);
            s += term;
            sa += a_[i] * term;
        }
        const Real G = std::log(s);
        const Real dG = -2.0 * sa / s;  // in [-2 alpha2, -2 alpha1]
        Real next = lam - G / dG;
        if (next > lam_hi) next = 0.5 * (lam + lam_hi);  // safeguard inside bracket
        if (std::abs(next - lam) <= 1e-14 * (1.0 + std::abs(lam))) {
            return std::exp(next);
        }
        lam = next;
    }
    throw std::runtime_error("quasi_norm: iteration cap reached");
}

bool Anisotropy::ball_contains(const Vec& center, Real radius, const Vec& xi) const {
    if (!(radius > 0.0)) throw std::domain_error("ball_contains: radius must be positive");
    Real s = 0;
    for (int i = 0; i < dim(); ++i) s += sqr((xi[i] - center[i]) * std::pow(radius, -a_[i]));
    return s < 1.0;
}

Real Anisotropy::estimate_triangle_constant(long samples, std::uint64_t seed) const {
    if (samples < 1) throw std::invalid_argument("estimate_triangle_constant: samples >= 1");
    if (k_samples_ >= samples) return k_est_;
    Rng rng(seed);
    const int d = dim();
    Real best = 1.0;  // the pair (xi, 0) contributes exactly 1
    for (long s = 0; s < samples; ++s) {
        Vec u = rng.normal_vec(d);
        Vec v = rng.normal_vec(d);
        Real sigma = rng.uniform(0.0, 1.0);
        if (u.norm() == 0 || v.norm() == 0 || sigma == 0.0 || sigma == 1.0) continue;
        u.normalize();  // |u| = 1 so |u|_a = 1
        v.normalize();
        Vec xi = dilate(sigma, u);        // |xi|_a = sigma
        Vec zeta = dilate(1 - sigma, v);  // |zeta|_a = 1 - sigma
        best = std::max(best, quasi_norm(xi + zeta));
    }
    k_est_ = std::max(k_est_, best);
    k_samples_ = samples;
    return k_est_;
}

Real Anisotropy::measure_ball(Real radius, int resolution) const {
    // Midpoint counting over the exact bounding box [-r^{a_i}, r^{a_i}]^d.
    const int d = dim();
    std::vector<Real> half(d), h(d), scale(d);
    for (int i = 0; i < d; ++i) {
        half[i] = std::pow(radius, a_[i]);
        h[i] = 2.0 * half[i] / resolution;
        scale[i] = std::pow(radius, -a_[i]);
    }
    std::int64_t total = 1;
    for (int i = 0; i < d; ++i) total *= resolution;

    const std::int64_t chunk = (total + num_threads() - 1) / num_threads();
    std::vector<std::int64_t> counts((total + chunk - 1) / chunk, 0);
    parallel_chunks(total, [&](std::int64_t b, std::int64_t e) {
        const auto slot = static_cast<std::size_t>(b / chunk);
        std::int64_t cnt = 0;
        for (std::int64_t f = b; f < e; ++f) {
            std::int64_t r = f;
            Real s2 = 0;
            for (int k = d - 1; k >= 0; --k) {
                int i = static_cast<int>(r % resolution);
                r /= resolution;
                Real xk = -half[k] + (i + 0.5) * h[k];
                s2 += sqr(xk * scale[k]);
            }
            if (s2 < 1.0) ++cnt;
        }
        counts[slot] += cnt;
    });
    std::int64_t inside = 0;
    for (auto c : counts) inside += c;
    Real cell = 1.0;
    for (int i = 0; i < d; ++i) cell *= h[i];
    return static_cast<Real>(inside) * cell;
}

Real Anisotropy::unit_ball_volume(int resolution) const {
    if (kappa_ && kappa_res_ >= resolution) return *kappa_;
    kappa_ = measure_ball(1.0, resolution);
    kappa_res_ = resolution;
    return *kappa_;
}

std::string Anisotropy::to_json() const {
    nlohmann::json j;
    j["a"] = std::vector<Real>(a_.data(), a_.data() + a_.size());
    return j.dump();
}

Anisotropy Anisotropy::from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    std::vector<Real> a = j.at("a").get<std::vector<Real>>();
    Vec v = Eigen::Map<Vec>(a.data(), static_cast<Eigen::Index>(a.size()));
    return Anisotropy(v);
}

}  // namespace anidec
