#include "anidec/covering.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace anidec {

namespace {

// Nearest-point parameter solve for an axis-aligned ellipsoid {sum (y_i/f_i)^2 = 1}
// and an outside query q: F(t) = sum (f_i q_i / (t + f_i^2))^2 is strictly
// decreasing on (0, inf) with F(0) > 1; bisection is unconditionally robust.
Real nearest_surface_distance(const Vec& q, const Vec& f) {
    const int d = static_cast<int>(q.size());
    Real hi = f.maxCoeff() + q.norm();
    Real lo = 0.0;
    auto F = [&](Real t) {
        Real s = 0;
        for (int i = 0; i < d; ++i) s += sqr(f[i] * q[i] / (t + sqr(f[i])));
        return s;
    };
    while (F(hi) > 1.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        Real mid = 0.5 * (lo + hi);
        (F(mid) > 1.0 ? lo : hi) = mid;
        if (hi - lo < 1e-14 * (1.0 + hi)) break;
    }
    const Real t = 0.5 * (lo + hi);
    Real dist2 = 0;
    for (int i = 0; i < d; ++i) {
        const Real yi = sqr(f[i]) * q[i] / (t + sqr(f[i]));
        dist2 += sqr(q[i] - yi);
    }
    return std::sqrt(dist2);
}

}  // namespace

bool ellipsoids_overlap(const Vec& c1, const Vec& e1, const Vec& c2, const Vec& e2) {
    const int d = static_cast<int>(c1.size());
    // Rescale so ellipsoid 1 becomes the unit ball at the origin.
    Vec p(d), f(d);
    for (int i = 0; i < d; ++i) {
        p[i] = (c2[i] - c1[i]) / e1[i];
        f[i] = e2[i] / e1[i];
    }
    Real inside2 = 0;
    for (int i = 0; i < d; ++i) inside2 += sqr(p[i] / f[i]);
    if (inside2 < 1.0) return true;  // origin inside ellipsoid 2
    if (p.norm() < 1.0) return true; // ellipsoid-2 center inside unit ball
    return nearest_surface_distance(-p, f) < 1.0;
}

Vec Covering::to_local(int j, const Vec& xi) const {
    Vec u(xi.size());
    const Real t = scales_[j];
    for (int i = 0; i < xi.size(); ++i) u[i] = (xi[i] - centers_[j][i]) * std::pow(t, -aniso_.exponents()[i]);
    return u;
}

Vec Covering::to_global(int j, const Vec& u) const {
    Vec xi(u.size());
    const Real t = scales_[j];
    for (int i = 0; i < u.size(); ++i) xi[i] = centers_[j][i] + u[i] * std::pow(t, aniso_.exponents()[i]);
    return xi;
}

bool Covering::in_support(int j, const Vec& xi) const {
    return aniso_.ball_contains(centers_[j], 2.0 * delta_ * scales_[j], xi);
}

void Covering::build_buckets() {
    bucket_base_ = std::log2(ann_.r_min) - 1.0;
    const int nb = static_cast<int>(std::ceil((std::log2(ann_.r_max) + 1.0 - bucket_base_) *
                                              kBucketsPerOctave)) + 1;
    buckets_.assign(nb, {});
    for (int j = 0; j < count(); ++j) {
        int b = static_cast<int>((std::log2(radii_[j]) - bucket_base_) * kBucketsPerOctave);
        b = std::clamp(b, 0, nb - 1);
        buckets_[b].push_back(j);
    }
}

void Covering::bucket_range(Real r, int& lo, int& hi) const {
    // Centers whose delta-balls can reach radius r satisfy
    // | |xi_j|_a - r | <= K * 2 delta * h_max; pad by one bucket.
    Real h_max = std::max(reg_.evaluate_radial(ann_.r_min), reg_.evaluate_radial(ann_.r_max));
    h_max = std::max(h_max, reg_.evaluate_radial(std::clamp(1.0, ann_.r_min, ann_.r_max)));
    const Real reach = 2.5 * 2.0 * delta_ * h_max;
    const Real lo_r = std::max(ann_.r_min * 0.5, r - reach);
    const Real hi_r = r + reach;
    lo = std::clamp(static_cast<int>((std::log2(lo_r) - bucket_base_) * kBucketsPerOctave) - 1, 0,
                    static_cast<int>(buckets_.size()) - 1);
    hi = std::clamp(static_cast<int>((std::log2(hi_r) - bucket_base_) * kBucketsPerOctave) + 1, 0,
                    static_cast<int>(buckets_.size()) - 1);
}

std::vector<int> Covering::covering_elements(const Vec& xi) const {
    std::vector<int> out;
    const Real r = aniso_.quasi_norm(xi);
    if (r <= 0) return out;
    int lo, hi;
    bucket_range(r, lo, hi);
    for (int b = lo; b <= hi; ++b) {
        for (int j : buckets_[b]) {
            if (in_support(j, xi)) out.push_back(j);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool Covering::is_interior(const Vec& xi) const {
    auto js = covering_elements(xi);
    if (js.empty()) return false;
    for (int j : js) {
        if (boundary_[j]) return false;
    }
    return true;
}

std::vector<int> Covering::expand(const std::vector<int>& js) const {
    std::vector<char> mark(count(), 0);
    for (int j : js) {
        for (int k : neighbors_[j]) mark[k] = 1;
    }
    std::vector<int> out;
    for (int j = 0; j < count(); ++j)
        if (mark[j]) out.push_back(j);
    return out;
}

bool Covering::is_deep_interior(int j) const {
    if (boundary_[j]) return false;
    for (int k : neighbors_[j])
        if (boundary_[k]) return false;
    return true;
}

namespace {

// Euclidean half-width of the ball B_a(., rho) in direction v (support
// function of the axis-aligned ellipsoid with semi-axes rho^{a_i}).
Real ball_support(const Anisotropy& aniso, Real rho, const Vec& v) {
    Real s = 0;
    for (int i = 0; i < v.size(); ++i) s += sqr(std::pow(rho, aniso.exponents()[i]) * v[i]);
    return std::sqrt(s);
}

// Points on the shell {|xi|_a = r}, spaced so consecutive points sit about
// `1/q` of the local ball support apart (euclidean, measured along the
// tangent).  Quasi-distance is the wrong density gauge here: for a small
// euclidean gap g the quasi-norm grows like g^{1/alpha2}.
// d = 2 marches the angle deterministically; higher d uses a seeded cloud.
std::vector<Vec> shell_points(const Anisotropy& aniso, Real r, Real ball_radius, int q,
                              Real phase) {
    const int d = aniso.dim();
    std::vector<Vec> pts;
    if (d == 2) {
        const Real a1 = aniso.exponents()[0], a2 = aniso.exponents()[1];
        const Real r1 = std::pow(r, a1), r2 = std::pow(r, a2);
        Real th = phase * 2.0 * M_PI;
        const Real th_end = th + 2.0 * M_PI;
        while (th < th_end) {
            Vec u(2), tang(2);
            u << std::cos(th), std::sin(th);
            pts.push_back(aniso.dilate(r, u));
            tang << -r1 * std::sin(th), r2 * std::cos(th);
            const Real speed = tang.norm();
            tang /= speed;
            const Real step = ball_support(aniso, ball_radius, tang) / (q * speed);
            th += std::min(step, 2.0 * M_PI / 16.0);
        }
    } else {
        Rng rng(static_cast<std::uint64_t>(1e9 * r) + 17u);
        Real prod = 1.0, biggest = 1.0;
        for (int i = 0; i < d; ++i) {
            Real ratio = std::max(1.0, q * std::pow(r / ball_radius, aniso.exponents()[i]));
            prod *= ratio;
            biggest = std::max(biggest, ratio);
        }
        long n = static_cast<long>(8.0 * prod / biggest) + 32;
        pts.reserve(n);
        for (long k = 0; k < n; ++k) {
            Vec u = rng.normal_vec(d);
            if (u.norm() == 0) continue;
            u.normalize();
            pts.push_back(aniso.dilate(r, u));
        }
    }
    return pts;
}

// Radial march step at shell radius r: euclidean displacement per unit of r
// is |diag(a_i r^{a_i-1}) u|; match it against the ball support along that
// direction at a few probe angles and take the safest step.
Real radial_step(const Anisotropy& aniso, Real r, Real ball_radius, int q) {
    const int d = aniso.dim();
    Real best = r;  // cap: one shell never jumps more than 20% of r
    for (int k = 0; k < 8; ++k) {
        Vec u(d);
        if (d == 2) {
            Real th = 2.0 * M_PI * (k + 0.3) / 8.0;
            u << std::cos(th), std::sin(th);
        } else {
            Rng rng(31u * k + 5u);
            u = rng.normal_vec(d);
            u.normalize();
        }
        Vec dr(d);
        for (int i = 0; i < d; ++i)
            dr[i] = aniso.exponents()[i] * std::pow(r, aniso.exponents()[i] - 1.0) * u[i];
        const Real speed = dr.norm();
        Vec v = dr / speed;
        best = std::min(best, ball_support(aniso, ball_radius, v) / (q * speed));
    }
    return std::min(best, 0.2 * r);
}

}  // namespace

Covering build_covering(const Anisotropy& aniso, const HybridRegulation& reg, Real delta,
                        Real delta0, const Annulus& ann, const CoveringGrid& grid) {
    if (!ann.valid()) throw std::invalid_argument("build_covering: annulus requires 0 < r_min < r_max");
    if (!(delta > 0.0) || !(delta < 0.5 * delta0))
        throw std::invalid_argument(
            "build_covering: covering radius factor must satisfy 0 < delta < delta0/2 "
            "(moderation scale constraint)");

    Covering cov(aniso, reg, delta, delta0, ann);
    cov.k_est_ = aniso.estimate_triangle_constant(20000);

    // Greedy maximal packing over shells of increasing |.|_a.
    const Real h_max = std::max({reg.evaluate_radial(ann.r_min), reg.evaluate_radial(ann.r_max),
                                 reg.evaluate_radial(std::clamp(1.0, ann.r_min, ann.r_max))});
    const Real reach = 2.5 * 2.0 * delta * h_max;

    Real r = ann.r_min;
    const Real slack = grid.pack_slack;
    while (r <= ann.r_max) {
        const Real h = reg.evaluate_radial(r);
        const Real rho = slack * delta * h;  // rejection ball radius at this shell
        for (const Vec& xi : shell_points(aniso, r, rho, grid.pack_density, 0.0)) {
            bool clear = true;
            for (int j = static_cast<int>(cov.centers_.size()) - 1; j >= 0; --j) {
                // centers are produced in radius order: stop once out of reach
                if (cov.radii_[j] < r - reach) break;
                if (aniso.ball_contains(cov.centers_[j], slack * delta * cov.scales_[j], xi)) {
                    clear = false;
                    break;
                }
            }
            if (clear) {
                cov.centers_.push_back(xi);
                cov.scales_.push_back(reg.evaluate(xi));
                cov.radii_.push_back(aniso.quasi_norm(xi));
            }
        }
        r += radial_step(aniso, r, rho, grid.pack_density);
    }
    if (cov.centers_.empty()) throw CoveringError("build_covering: empty covering", {});
    cov.build_buckets();

    // Boundary tags from rim probes of the 2 delta support balls.
    const int nj = cov.count();
    cov.boundary_.assign(nj, 0);
    for (int j = 0; j < nj; ++j) {
        Real rim_lo = 1e300, rim_hi = 0;
        const int nd = 64;
        for (int k = 0; k < nd; ++k) {
            Vec u(aniso.dim());
            if (aniso.dim() == 2) {
                Real th = 2.0 * M_PI * k / nd;
                u << std::cos(th), std::sin(th);
            } else {
                Rng rng(1000u * j + k);
                u = rng.normal_vec(aniso.dim());
                u.normalize();
            }
            Vec zeta = cov.centers_[j] + aniso.dilate(2.0 * delta * cov.scales_[j], u);
            Real rz = aniso.quasi_norm(zeta);
            rim_lo = std::min(rim_lo, rz);
            rim_hi = std::max(rim_hi, rz);
        }
        if (rim_lo < ann.r_min * 1.05 || rim_hi > ann.r_max / 1.05) cov.boundary_[j] = 1;
    }

    // Neighbor lists: bounding-box prefilter, then exact axis-aligned
    // ellipsoid overlap of the 2 delta support balls.
    cov.neighbors_.assign(nj, {});
    const int d = aniso.dim();
    std::vector<Vec> semi(nj, Vec(d));
    for (int j = 0; j < nj; ++j) {
        for (int i = 0; i < d; ++i) semi[j][i] = std::pow(2.0 * delta * cov.scales_[j], aniso.exponents()[i]);
    }
    parallel_chunks(nj, [&](std::int64_t jb, std::int64_t je) {
        for (int j = static_cast<int>(jb); j < je; ++j) {
            int lo, hi;
            cov.bucket_range(cov.radii_[j], lo, hi);
            for (int b = lo; b <= hi; ++b) {
                for (int k : cov.buckets_[b]) {
                    bool boxes = true;
                    for (int i = 0; i < d && boxes; ++i) {
                        boxes = std::abs(cov.centers_[j][i] - cov.centers_[k][i]) <
                                semi[j][i] + semi[k][i];
                    }
                    if (!boxes) continue;
                    if (j == k || ellipsoids_overlap(cov.centers_[j], semi[j], cov.centers_[k], semi[k]))
                        cov.neighbors_[j].push_back(k);
                }
            }
            std::sort(cov.neighbors_[j].begin(), cov.neighbors_[j].end());
        }
    });

    // Largest verified disjointness factor (quasi-triangle sufficient
    // criterion), capped just under delta.
    Real dp = delta * (1.0 - 1e-12);
    for (int j = 0; j < nj; ++j) {
        for (int k : cov.neighbors_[j]) {
            if (k <= j) continue;
            Real rho = aniso.quasi_norm(cov.centers_[j] - cov.centers_[k]);
            dp = std::min(dp, rho / (cov.k_est_ * (cov.scales_[j] + cov.scales_[k])));
        }
    }
    cov.delta_prime_ = dp;

    auto ver = cov.verify_admissible(grid.verify_density);
    cov.n0_ = ver.n0;
    if (!ver.covered) {
        throw CoveringError("build_covering: 2*delta covering verification failed", ver.uncovered);
    }
    return cov;
}

Covering::VerifyResult Covering::verify_admissible(int density) const {
    VerifyResult res;
    res.covered = true;

    std::vector<Real> shell_r;
    Real r = ann_.r_min;
    while (r <= ann_.r_max) {
        shell_r.push_back(r);
        const Real rho = 2.0 * delta_ * reg_.evaluate_radial(r);
        r += radial_step(aniso_, r, rho, density);
    }
    const auto ns = static_cast<std::int64_t>(shell_r.size());
    std::vector<int> shell_n0(ns, 0);
    std::vector<std::vector<Vec>> shell_unc(ns);

    parallel_chunks(ns, [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t s = b; s < e; ++s) {
            const Real rs = shell_r[s];
            const Real rho = 2.0 * delta_ * reg_.evaluate_radial(rs);
            for (const Vec& xi : shell_points(aniso_, rs, rho, density, 0.37)) {
                int lo, hi, cnt = 0;
                bucket_range(rs, lo, hi);
                for (int bk = lo; bk <= hi; ++bk) {
                    for (int j : buckets_[bk]) {
                        if (in_support(j, xi)) ++cnt;
                    }
                }
                shell_n0[s] = std::max(shell_n0[s], cnt);
                if (cnt == 0 && shell_unc[s].size() < 8) shell_unc[s].push_back(xi);
            }
        }
    });
    for (std::int64_t s = 0; s < ns; ++s) {
        res.n0 = std::max(res.n0, shell_n0[s]);
        for (auto& p : shell_unc[s]) {
            res.covered = false;
            if (res.uncovered.size() < 32) res.uncovered.push_back(p);
        }
    }
    return res;
}

std::string Covering::to_json() const {
    nlohmann::json j;
    j["delta"] = delta_;
    j["delta0"] = delta0_;
    j["delta_prime"] = delta_prime_;
    j["n0"] = n0_;
    j["annulus"] = {ann_.r_min, ann_.r_max};
    j["triangle_constant"] = k_est_;
    auto& centers = j["centers"] = nlohmann::json::array();
    auto& scales = j["scales"] = nlohmann::json::array();
    auto& bd = j["boundary"] = nlohmann::json::array();
    for (int i = 0; i < count(); ++i) {
        centers.push_back(std::vector<Real>(centers_[i].data(), centers_[i].data() + centers_[i].size()));
        scales.push_back(scales_[i]);
        bd.push_back(static_cast<int>(boundary_[i]));
    }
    return j.dump();
}

std::string Covering::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "j";
    for (int i = 0; i < aniso_.dim(); ++i) os << ",xi" << i;
    os << ",t,neighbors,boundary\n";
    for (int jdx = 0; jdx < count(); ++jdx) {
        os << jdx;
        for (int i = 0; i < aniso_.dim(); ++i) os << "," << centers_[jdx][i];
        os << "," << scales_[jdx] << "," << neighbors_[jdx].size() << ","
           << static_cast<int>(boundary_[jdx]) << "\n";
    }
    return os.str();
}

}  // namespace anidec
