#include "anidec/frame.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace anidec {

namespace {
constexpr Real kTwoPi = 6.283185307179586476925287;
}

FrameSystem::FrameSystem(Covering cov, FrameParams params)
    : cov_(std::move(cov)), params_(params) {
    const auto& an = cov_.aniso();
    const int d = an.dim();
    if (d > 8) throw std::invalid_argument("frame: dimension cap is 8");
    if (params_.n_lat < 1 || params_.n_lat > params_.cube_res / 2 - 1)
        throw std::invalid_argument("frame: n_lat must lie in [1, cube_res/2 - 1]");
    Real half = 0;
    for (int i = 0; i < d; ++i) half = std::max(half, std::pow(2.0 * cov_.delta(), an.exponents()[i]));
    a_cube_ = params_.cube_margin * half;

    pow_t_.resize(cov_.count(), Vec(d));
    pow_t_inv_.resize(cov_.count(), Vec(d));
    for (int j = 0; j < cov_.count(); ++j) {
        for (int i = 0; i < d; ++i) {
            pow_t_[j][i] = std::pow(cov_.scale(j), an.exponents()[i]);
            pow_t_inv_[j][i] = 1.0 / pow_t_[j][i];
        }
    }
    inv_2delta_sq_ = Vec(d);
    for (int i = 0; i < d; ++i)
        inv_2delta_sq_[i] = std::pow(2.0 * cov_.delta(), -2.0 * an.exponents()[i]);
}

Vec FrameSystem::to_global(int j, const Vec& u) const {
    Vec xi(u.size());
    for (int i = 0; i < u.size(); ++i) xi[i] = pow_t_[j][i] * u[i] + cov_.center(j)[i];
    return xi;
}

Vec FrameSystem::to_local(int j, const Vec& xi) const {
    Vec u(xi.size());
    for (int i = 0; i < xi.size(); ++i) u[i] = (xi[i] - cov_.center(j)[i]) * pow_t_inv_[j][i];
    return u;
}

std::int64_t FrameSystem::cube_size() const {
    std::int64_t s = 1;
    for (int i = 0; i < aniso().dim(); ++i) s *= params_.cube_res;
    return s;
}

Vec FrameSystem::cube_point(std::int64_t flat) const {
    const int d = aniso().dim();
    const int M = params_.cube_res;
    const Real h = cube_step();
    Vec u(d);
    for (int i = d - 1; i >= 0; --i) {
        u[i] = -a_cube_ + static_cast<Real>(flat % M) * h;
        flat /= M;
    }
    return u;
}

Real FrameSystem::bump(Real rho) const {
    const Real delta = cov_.delta();
    if (params_.bump_beta > 0.0) {
        const Real s = rho / (2.0 * delta);
        if (s >= 1.0) return 0.0;
        return std::exp(-params_.bump_beta * s * s / (1.0 - s * s));
    }
    return smooth_step((2.0 * delta - rho) / delta);
}

Real FrameSystem::bump_at(int j, const Vec& xi) const {
    // |T_j^{-1} xi|_a = |xi - xi_j|_a / t_j by homogeneity
    const Real rho = aniso().quasi_norm(xi - cov_.center(j)) / cov_.scale(j);
    return bump(rho);
}

Real FrameSystem::bapu(int j, const Vec& xi, Bapu mode) const {
    const Real num = bump_at(j, xi);
    if (num == 0.0) return 0.0;
    Real den = 0;
    for (int k : cov_.neighbors(j)) {
        const Real v = bump_at(k, xi);
        den += (mode == Bapu::plain) ? v : v * v;
    }
    if (den < 1e-200) throw std::runtime_error("bapu: covering defect (vanishing denominator)");
    return (mode == Bapu::plain) ? num / den : num / std::sqrt(den);
}

Real FrameSystem::partition_sum(const Vec& xi, Bapu mode) const {
    Real s = 0;
    for (int j : cov_.covering_elements(xi)) {
        const Real v = bapu(j, xi, mode);
        s += (mode == Bapu::plain) ? v : v * v;
    }
    return s;
}

FrameSystem::CubeCache FrameSystem::compute_cube_cache(int j) const {
    const auto& an = aniso();
    const int d = an.dim();
    const int M = params_.cube_res;
    const Real h = cube_step();
    const auto& nbr = cov_.neighbors(j);

    // local affine maps u -> T_k^{-1} T_j u = tau .* u + o
    const int nn = static_cast<int>(nbr.size());
    std::vector<Vec> tau(nn, Vec(d)), off(nn, Vec(d));
    int self = -1;
    for (int m = 0; m < nn; ++m) {
        const int k = nbr[m];
        if (k == j) self = m;
        for (int i = 0; i < d; ++i) {
            tau[m][i] = pow_t_[j][i] * pow_t_inv_[k][i];
            off[m][i] = (cov_.center(j)[i] - cov_.center(k)[i]) * pow_t_inv_[k][i];
        }
    }

    CubeCache out;
    out.mu_hat.setZero(cube_size());
    out.den.setZero(cube_size());
    const std::int64_t total = cube_size();
    parallel_chunks(total, [&](std::int64_t b, std::int64_t e) {
        Vec u(d), w(d);
        for (std::int64_t f = b; f < e; ++f) {
            std::int64_t r = f;
            for (int i = d - 1; i >= 0; --i) {
                u[i] = -a_cube_ + static_cast<Real>(r % M) * h;
                r /= M;
            }
            Real den = 0, num = 0;
            for (int m = 0; m < nn; ++m) {
                Real q2 = 0;
                for (int i = 0; i < d; ++i) {
                    w[i] = tau[m][i] * u[i] + off[m][i];
                    q2 += sqr(w[i]) * inv_2delta_sq_[i];
                }
                if (q2 >= 1.0) continue;  // outside supp of this bump
                const Real v = bump(an.quasi_norm(w));
                den += v * v;
                if (m == self) num = v;
            }
            out.den[f] = den;
            out.mu_hat[f] = (num > 0.0 && den > 0.0) ? num / std::sqrt(den) : 0.0;
        }
    });
    return out;
}

std::shared_ptr<const FrameSystem::CubeCache> FrameSystem::cube_cache(int j) const {
    {
        std::shared_lock lk(mu_mutex_);
        auto it = mu_cache_.find(j);
        if (it != mu_cache_.end()) return it->second;
    }
    auto val = std::make_shared<CubeCache>(compute_cube_cache(j));
    std::unique_lock lk(mu_mutex_);
    auto [it, inserted] = mu_cache_.emplace(j, val);
    return it->second;
}

std::shared_ptr<const Eigen::ArrayXd> FrameSystem::mu_hat(int j) const {
    auto c = cube_cache(j);
    return {c, &c->mu_hat};
}

// ---------------------------------------------------------------------------
// separable evaluation of coefficient combinations on cube grids

CVec FrameSystem::field_on_cube(int j, const CoefficientField& c) const {
    const auto& an = aniso();
    const int d = an.dim();
    const int M = params_.cube_res;
    const int N = params_.n_lat;
    const int side = 2 * N + 1;
    const Real h = cube_step();
    const Real pia = M_PI / a_cube_;
    auto cache = cube_cache(j);

    CVec out = CVec::Zero(cube_size());
    if (d != 2) {
        // generic path: pointwise synthesis
        FreqFunction f = synthesize(c);
        for (std::int64_t g = 0; g < out.size(); ++g)
            out[g] = f.hat(to_global(j, cube_point(g)));
        return out;
    }

    using RowMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::ArrayXd ug(M);
    for (int g = 0; g < M; ++g) ug[g] = -a_cube_ + g * h;

    for (int k : cov_.neighbors(j)) {
        const CVec* blk = c.block_ptr(k);
        if (blk == nullptr || blk->isZero(0)) continue;

        Vec tau(d), off(d);
        for (int i = 0; i < d; ++i) {
            tau[i] = pow_t_[j][i] * pow_t_inv_[k][i];
            off[i] = (cov_.center(j)[i] - cov_.center(k)[i]) * pow_t_inv_[k][i];
        }

        // T_i(m + N, g) = exp(-i pia m (tau_i u_g + off_i))
        RowMat T1(side, M), T2(side, M);
        for (int axis = 0; axis < 2; ++axis) {
            RowMat& T = axis == 0 ? T1 : T2;
            for (int g = 0; g < M; ++g) {
                const Complex w = std::polar(1.0, -pia * (tau[axis] * ug[g] + off[axis]));
                T(N, g) = Complex(1, 0);
                for (int m = 1; m <= N; ++m) {
                    T(N + m, g) = T(N + m - 1, g) * w;
                    T(N - m, g) = std::conj(T(N + m, g));
                }
            }
        }
        Eigen::Map<const RowMat> B(blk->data(), side, side);
        RowMat tmp = B * T2;                 // side x M
        RowMat field = T1.transpose() * tmp; // M x M (g1, g2)

        const Real pref = std::pow(2.0 * a_cube_, -0.5 * d) *
                          std::pow(cov_.scale(k), -0.5 * an.nu());
        // pointwise bump of k over j's grid, shared denominator from the cache
        parallel_chunks(static_cast<std::int64_t>(M), [&](std::int64_t rb, std::int64_t re) {
            Vec w(d);
            for (std::int64_t g1 = rb; g1 < re; ++g1) {
                for (int g2 = 0; g2 < M; ++g2) {
                    const std::int64_t fl = g1 * M + g2;
                    const Real den = cache->den[fl];
                    if (den <= 0.0) continue;
                    w[0] = tau[0] * ug[g1] + off[0];
                    w[1] = tau[1] * ug[g2] + off[1];
                    Real q2 = sqr(w[0]) * inv_2delta_sq_[0] + sqr(w[1]) * inv_2delta_sq_[1];
                    if (q2 >= 1.0) continue;
                    const Real psi = bump(an.quasi_norm(w));
                    if (psi == 0.0) continue;
                    out[fl] += pref * (psi / std::sqrt(den)) * field(g1, g2);
                }
            }
        });
    }
    return out;
}

CVec FrameSystem::hat_on_cube(int j, const FreqFunction& f) const {
    if (f.coeffs && aniso().dim() == 2) return field_on_cube(j, *f.coeffs);
    auto cache = cube_cache(j);
    CVec vals = CVec::Zero(cube_size());
    for (std::int64_t g = 0; g < vals.size(); ++g) {
        if (cache->mu_hat[g] == 0.0) continue;  // masked: every use multiplies by mu_hat
        vals[g] = f.hat(to_global(j, cube_point(g)));
    }
    return vals;
}

// ---------------------------------------------------------------------------
// padded profiles

CArray padded_inverse(const CArray& cube_vals, Real a_cube, int pad) {
    const int d = cube_vals.rank();
    const int M = cube_vals.dim(0);
    const int Mp = M * pad;
    const Real h = 2.0 * a_cube / M;

    std::vector<int> dims(d, Mp);
    CArray big(dims);
    std::vector<int> idx(d);
    for (std::int64_t f = 0; f < cube_vals.size(); ++f) {
        cube_vals.unflat(f, idx);
        std::int64_t bf = 0;
        for (int i = 0; i < d; ++i) bf = bf * Mp + idx[i];
        big[bf] = cube_vals[f];
    }
    big.dft_all_axes(+1);

    CArray out(dims);
    const Real scale = std::pow(h, d) * std::pow(kTwoPi, -0.5 * d);
    for (std::int64_t f = 0; f < big.size(); ++f) {
        big.unflat(f, idx);
        Complex tw(1, 0);
        std::int64_t of = 0;
        for (int i = 0; i < d; ++i) {
            int k = idx[i] <= Mp / 2 - 1 ? idx[i] : idx[i] - Mp;  // signed bin
            tw *= std::polar(1.0, -M_PI * k / static_cast<Real>(pad));
            of = of * Mp + (k + Mp / 2);
        }
        out[of] = big[f] * tw * scale;
    }
    return out;
}

bool PaddedProfile::in_range(const Vec& y, Real pad) const {
    const Real lim = range() - pad * spacing_;
    for (int i = 0; i < y.size(); ++i) {
        if (std::abs(y[i]) > lim) return false;
    }
    return true;
}

namespace {
inline void catmull_rom(Real t, Real w[4]) {
    const Real t2 = t * t, t3 = t2 * t;
    w[0] = 0.5 * (-t3 + 2 * t2 - t);
    w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
    w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
    w[3] = 0.5 * (t3 - t2);
}
}  // namespace

Complex PaddedProfile::eval(const Vec& y) const {
    const int d = static_cast<int>(y.size());
    const int Mp = vals_.dim(0);
    int base[8];
    Real wts[8][4];
    for (int i = 0; i < d; ++i) {
        const Real s = y[i] / spacing_ + Mp / 2;
        const Real fl = std::floor(s);
        const int b = static_cast<int>(fl) - 1;
        if (b < 0 || b + 3 >= Mp) return {0, 0};
        base[i] = b;
        catmull_rom(s - fl, wts[i]);
    }
    Complex acc(0, 0);
    int steps = 1;
    for (int i = 0; i < d; ++i) steps *= 4;
    for (int s = 0; s < steps; ++s) {
        int rem = s;
        Real w = 1.0;
        std::int64_t f = 0;
        for (int i = 0; i < d; ++i) {
            const int o = rem % 4;
            rem /= 4;
            w *= wts[i][o];
            f = f * Mp + (base[i] + o);
        }
        acc += w * vals_[f];
    }
    return acc;
}

std::shared_ptr<const PaddedProfile> FrameSystem::profile(int j) const {
    std::lock_guard lk(prof_mutex_);
    auto it = prof_cache_.find(j);
    if (it != prof_cache_.end()) return it->second;

    const int M = params_.cube_res;
    auto mh = mu_hat(j);
    std::vector<int> dims(aniso().dim(), M);
    CArray cube(dims);
    for (std::int64_t f = 0; f < cube.size(); ++f) cube[f] = Complex((*mh)[f], 0.0);
    auto prof = std::make_shared<PaddedProfile>(padded_inverse(cube, a_cube_, params_.profile_pad),
                                                M_PI / (a_cube_ * params_.profile_pad));
    prof_cache_.emplace(j, prof);
    prof_order_.push_back(j);
    if (prof_order_.size() > 12) {
        prof_cache_.erase(prof_order_.front());
        prof_order_.erase(prof_order_.begin());
    }
    return prof;
}

// ---------------------------------------------------------------------------
// atoms

Vec FrameSystem::lattice_point(const FrameIndex& idx) const {
    const int d = aniso().dim();
    Vec x(d);
    for (int i = 0; i < d; ++i)
        x[i] = pow_t_inv_[idx.j][i] * (M_PI / a_cube_) * idx.n[i];
    return x;
}

Complex FrameSystem::atom_freq(const FrameIndex& idx, const Vec& xi) const {
    const int d = aniso().dim();
    const Real phi = bapu(idx.j, xi, Bapu::sqrt);
    if (phi == 0.0) return {0, 0};
    const Vec u = to_local(idx.j, xi);
    Real phase = 0;
    for (int i = 0; i < d; ++i) phase -= (M_PI / a_cube_) * idx.n[i] * u[i];
    const Real pref = std::pow(2.0 * a_cube_, -0.5 * d) * std::pow(cov_.scale(idx.j), -0.5 * aniso().nu());
    return phi * pref * std::polar(1.0, phase);
}

Complex FrameSystem::atom_direct(const FrameIndex& idx, const Vec& x) const {
    const int d = aniso().dim();
    Vec y(d);
    for (int i = 0; i < d; ++i)
        y[i] = pow_t_[idx.j][i] * x[i] - (M_PI / a_cube_) * idx.n[i];
    auto prof = profile(idx.j);
    if (!prof->in_range(y)) throw std::out_of_range("atom_direct: outside cached profile box");
    Real phase = x.dot(cov_.center(idx.j));
    const Real pref = std::pow(2.0 * a_cube_, -0.5 * d) * std::pow(cov_.scale(idx.j), 0.5 * aniso().nu());
    return pref * std::polar(1.0, phase) * prof->eval(y);
}

Real FrameSystem::atom_norm_sq(int j) const {
    auto mh = mu_hat(j);
    const Real h = cube_step();
    return std::pow(2.0 * a_cube_, -aniso().dim()) * std::pow(h, aniso().dim()) * (mh->square().sum());
}

// ---------------------------------------------------------------------------
// analysis / synthesis

CVec FrameSystem::analyze_one(int j, const FreqFunction& f, Real* tot_out, Real* guard_out) const {
    const int d = aniso().dim();
    const int M = params_.cube_res;
    auto mh = mu_hat(j);

    CVec vals = hat_on_cube(j, f);
    std::vector<int> dims(d, M);
    CArray F(dims);
    const std::int64_t total = F.size();
    for (std::int64_t fl = 0; fl < total; ++fl) {
        const Real m = (*mh)[fl];
        if (m != 0.0) F[fl] = vals[fl] * m;
    }
    F.dft_all_axes(+1);

    // quadrature guard data: the top wrapped shells proxy for the unseen
    // tail beyond Nyquist that would alias onto the extracted window
    Real tot = 0, guard = 0;
    const int guard_from = M / 2 - 4;
    std::vector<int> idx(d);
    for (std::int64_t fl = 0; fl < total; ++fl) {
        const Real e = std::norm(F[fl]);
        tot += e;
        F.unflat(fl, idx);
        int wmax = 0;
        for (int i = 0; i < d; ++i) wmax = std::max(wmax, std::min(idx[i], M - idx[i]));
        if (wmax > guard_from) guard += e;
    }
    if (tot_out) *tot_out = tot;
    if (guard_out) *guard_out = guard;

    const int N = params_.n_lat;
    const int side = 2 * N + 1;
    std::int64_t bsize = 1;
    for (int i = 0; i < d; ++i) bsize *= side;
    const Real pref = std::pow(2.0 * a_cube_, -0.5 * d) *
                      std::pow(cov_.scale(j), 0.5 * aniso().nu()) * std::pow(cube_step(), d);
    CVec blk(bsize);
    std::vector<int> nidx(d);
    for (std::int64_t b = 0; b < bsize; ++b) {
        std::int64_t r = b;
        int sgn = 0;
        std::int64_t fl = 0;
        for (int i = d - 1; i >= 0; --i) {
            nidx[i] = static_cast<int>(r % side) - N;
            r /= side;
        }
        for (int i = 0; i < d; ++i) {
            sgn += nidx[i];
            fl = fl * M + ((nidx[i] % M) + M) % M;
        }
        blk[b] = pref * ((sgn % 2 == 0) ? 1.0 : -1.0) * F[fl];
    }
    return blk;
}

CoefficientField FrameSystem::analyze(const FreqFunction& f) const {
    const auto U = cov_.expand(f.support);
    CoefficientField out(aniso().dim(), params_.n_lat);
    std::vector<CVec> blocks(U.size());
    std::vector<Real> tots(U.size(), 0.0), guards(U.size(), 0.0);
    parallel_chunks(static_cast<std::int64_t>(U.size()), [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i) blocks[i] = analyze_one(U[i], f, &tots[i], &guards[i]);
    });
    Real tot = 0, guard = 0;
    for (std::size_t i = 0; i < U.size(); ++i) {
        tot += tots[i];
        guard += guards[i];
    }
    if (tot > 0 && guard / tot > params_.alias_tol)
        throw std::runtime_error("analyze: cube resolution too low for this input (aliasing guard)");
    for (std::size_t i = 0; i < U.size(); ++i) out.block(U[i]) = std::move(blocks[i]);
    return out;
}

FreqFunction FrameSystem::synthesize(const CoefficientField& coeffs) const {
    auto cc = std::make_shared<CoefficientField>(coeffs);
    const FrameSystem* sys = this;
    FreqFunction out;
    out.support = cc->js();
    out.coeffs = cc;
    const int d = aniso().dim();
    const int N = params_.n_lat;
    const Real pia = M_PI / a_cube_;
    out.hat = [cc, sys, d, N, pia](const Vec& xi) -> Complex {
        Complex acc(0, 0);
        for (int j : sys->cov_.covering_elements(xi)) {
            const CVec* blkp = cc->block_ptr(j);
            if (blkp == nullptr) continue;
            const Real phi = sys->bapu(j, xi, Bapu::sqrt);
            if (phi == 0.0) continue;
            const Vec u = sys->to_local(j, xi);
            const int side = 2 * N + 1;
            std::vector<std::vector<Complex>> tab(d, std::vector<Complex>(side));
            for (int i = 0; i < d; ++i) {
                const Complex w = std::polar(1.0, -pia * u[i]);
                tab[i][N] = Complex(1, 0);
                for (int m = 1; m <= N; ++m) {
                    tab[i][N + m] = tab[i][N + m - 1] * w;
                    tab[i][N - m] = std::conj(tab[i][N + m]);
                }
            }
            const CVec& blk = *blkp;
            Complex s(0, 0);
            std::int64_t bsize = blk.size();
            for (std::int64_t b = 0; b < bsize; ++b) {
                const Complex c = blk[b];
                if (c == Complex(0, 0)) continue;
                Complex ph(1, 0);
                std::int64_t r = b;
                for (int i = d - 1; i >= 0; --i) {
                    ph *= tab[i][static_cast<int>(r % side)];
                    r /= side;
                }
                s += c * ph;
            }
            const Real pref = std::pow(2.0 * sys->a_cube_, -0.5 * d) *
                              std::pow(sys->cov_.scale(j), -0.5 * sys->aniso().nu());
            acc += phi * pref * s;
        }
        return acc;
    };
    return out;
}

FreqFunction FrameSystem::atom_fn(const FrameIndex& idx) const {
    CoefficientField c(aniso().dim(), params_.n_lat);
    c.set(idx.j, idx.n, Complex(1, 0));
    return synthesize(c);
}

Real FrameSystem::l2_norm(const FreqFunction& f) const {
    return std::sqrt(std::abs(inner(f, f)));
}

Complex FrameSystem::inner(const FreqFunction& f, const FreqFunction& g) const {
    std::vector<int> both = f.support;
    both.insert(both.end(), g.support.begin(), g.support.end());
    std::sort(both.begin(), both.end());
    both.erase(std::unique(both.begin(), both.end()), both.end());
    const auto U = cov_.expand(both);
    const Real hd = std::pow(cube_step(), aniso().dim());
    const bool same = (&f == &g) || (f.coeffs && f.coeffs == g.coeffs);

    std::vector<Complex> parts(U.size(), Complex(0, 0));
    parallel_chunks(static_cast<std::int64_t>(U.size()), [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i) {
            const int j = U[i];
            auto mh = mu_hat(j);
            CVec fv = hat_on_cube(j, f);
            CVec gv = same ? fv : hat_on_cube(j, g);
            KahanC s;
            for (std::int64_t fl = 0; fl < mh->size(); ++fl) {
                const Real m = (*mh)[fl];
                if (m == 0.0) continue;
                s.add(m * m * fv[fl] * std::conj(gv[fl]));
            }
            parts[i] = s.value() * std::pow(cov_.scale(j), aniso().nu()) * hd;
        }
    });
    KahanC total;
    for (const auto& p : parts) total.add(p);
    return total.value();
}

// ---------------------------------------------------------------------------
// decomposition space norms

Real FrameSystem::function_space_norm(const FreqFunction& f, const SpaceParams& sp,
                                      NormFlavor flavor, const DirectGrid* grid) const {
    if (!(sp.p > 0) || !(sp.q > 0)) throw std::domain_error("space norm: p, q must be positive");
    if (sp.p < params_.pq_floor || sp.q < params_.pq_floor)
        throw std::domain_error("space norm: p or q below the quadrature stability floor");
    if (flavor == NormFlavor::triebel_lizorkin && std::isinf(sp.p))
        throw std::domain_error("space norm: p < inf required for the TL flavor");

    const auto U = cov_.expand(f.support);
    const int d = aniso().dim();
    const Real hd = std::pow(cube_step(), d);

    if (sp.p == 2.0 && sp.q == 2.0) {
        // Plancherel route: both flavors reduce to sum_j t^{2s} ||phi_j f^||_2^2
        std::vector<Real> parts(U.size(), 0.0);
        parallel_chunks(static_cast<std::int64_t>(U.size()), [&](std::int64_t b, std::int64_t e) {
            for (std::int64_t i = b; i < e; ++i) {
                const int j = U[i];
                auto mh = mu_hat(j);
                CVec fv = hat_on_cube(j, f);
                Kahan s;
                for (std::int64_t fl = 0; fl < mh->size(); ++fl) {
                    const Real m = (*mh)[fl];
                    if (m == 0.0) continue;
                    s.add(m * m * std::norm(fv[fl]));
                }
                parts[i] = s.sum * std::pow(cov_.scale(j), aniso().nu()) * hd *
                           std::pow(cov_.scale(j), 2.0 * sp.s);
            }
        });
        Real total = 0;
        for (Real p : parts) total += p;
        return std::sqrt(total);
    }

    const int pad = 4;
    auto make_G = [&](int j) {
        auto mh = mu_hat(j);
        CVec fv = hat_on_cube(j, f);
        std::vector<int> dims(d, params_.cube_res);
        CArray cube(dims);
        for (std::int64_t fl = 0; fl < cube.size(); ++fl) {
            const Real m = (*mh)[fl];
            if (m != 0.0) cube[fl] = fv[fl] * m;
        }
        return PaddedProfile(padded_inverse(cube, a_cube_, pad), M_PI / (a_cube_ * pad));
    };

    if (flavor == NormFlavor::modulation) {
        std::vector<Real> contrib(U.size(), 0.0);
        for (std::size_t i = 0; i < U.size(); ++i) {
            const int j = U[i];
            PaddedProfile G = make_G(j);
            const Real t = cov_.scale(j);
            const Real hy = std::pow(G.spacing(), d);
            Real acc = 0, mx = 0;
            for (std::int64_t fl = 0; fl < G.values().size(); ++fl) {
                const Real mag = std::abs(G.values()[fl]);
                mx = std::max(mx, mag);
                if (!std::isinf(sp.p)) acc += std::pow(mag, sp.p) * hy;
            }
            contrib[i] = std::isinf(sp.p)
                             ? std::pow(t, sp.s + aniso().nu()) * mx
                             : std::pow(t, sp.s + aniso().nu() - aniso().nu() / sp.p) *
                                   std::pow(acc, 1.0 / sp.p);
        }
        if (std::isinf(sp.q)) {
            Real mx = 0;
            for (Real c : contrib) mx = std::max(mx, c);
            return mx;
        }
        Real s = 0;
        for (Real c : contrib) s += std::pow(c, sp.q);
        return std::pow(s, 1.0 / sp.q);
    }

    // TL flavor, general (p, q): pointwise coupling across scales on a grid
    if (grid == nullptr)
        throw std::invalid_argument("space norm: TL flavor with (p,q) != (2,2) needs a DirectGrid");
    std::int64_t npts = 1;
    for (int i = 0; i < d; ++i) npts *= grid->res;
    std::vector<Real> acc(npts, 0.0);
    const bool qinf = std::isinf(sp.q);
    Vec step(d);
    for (int i = 0; i < d; ++i) step[i] = (grid->hi[i] - grid->lo[i]) / grid->res;

    for (int j : U) {
        PaddedProfile G = make_G(j);
        const Real t = cov_.scale(j);
        const Real w = std::pow(t, sp.s + aniso().nu());
        parallel_chunks(npts, [&](std::int64_t b, std::int64_t e) {
            Vec x(d), y(d);
            for (std::int64_t fl = b; fl < e; ++fl) {
                std::int64_t r = fl;
                for (int i = d - 1; i >= 0; --i) {
                    x[i] = grid->lo[i] + (static_cast<Real>(r % grid->res) + 0.5) * step[i];
                    r /= grid->res;
                }
                for (int i = 0; i < d; ++i) y[i] = pow_t_[j][i] * x[i];
                const Real mag = w * std::abs(G.eval(y));
                if (qinf)
                    acc[fl] = std::max(acc[fl], mag);
                else
                    acc[fl] += std::pow(mag, sp.q);
            }
        });
    }
    Real cell = 1.0;
    for (int i = 0; i < d; ++i) cell *= step[i];
    Real total = 0;
    for (std::int64_t i = 0; i < npts; ++i)
        total += std::pow(acc[i], qinf ? sp.p : sp.p / sp.q) * cell;
    return std::pow(total, 1.0 / sp.p);
}

// ---------------------------------------------------------------------------

FreqFunction lincomb(std::vector<std::pair<Complex, FreqFunction>> terms) {
    auto data = std::make_shared<std::vector<std::pair<Complex, FreqFunction>>>(std::move(terms));
    FreqFunction out;
    for (const auto& t : *data) {
        out.support.insert(out.support.end(), t.second.support.begin(), t.second.support.end());
    }
    std::sort(out.support.begin(), out.support.end());
    out.support.erase(std::unique(out.support.begin(), out.support.end()), out.support.end());

    // coefficient combinations stay coefficient combinations
    bool all_coeff = !data->empty();
    for (const auto& t : *data) all_coeff = all_coeff && (t.second.coeffs != nullptr);
    if (all_coeff) {
        auto merged = std::make_shared<CoefficientField>(*(*data)[0].second.coeffs);
        merged->scale((*data)[0].first);
        for (std::size_t i = 1; i < data->size(); ++i)
            merged->axpy((*data)[i].first, *(*data)[i].second.coeffs);
        out.coeffs = merged;
    }
    out.hat = [data](const Vec& xi) {
        Complex s(0, 0);
        for (const auto& t : *data) s += t.first * t.second.hat(xi);
        return s;
    };
    return out;
}

std::pair<FreqFunction, CoefficientField> random_interior_field(const FrameSystem& sys,
                                                                int n_elements, int modes,
                                                                std::uint64_t seed, Real scale_lo,
                                                                Real scale_hi) {
    const auto& cov = sys.covering();
    std::vector<int> candidates;
    for (int j = 0; j < cov.count(); ++j) {
        if (cov.is_deep_interior(j) && cov.scale(j) >= scale_lo && cov.scale(j) <= scale_hi)
            candidates.push_back(j);
    }
    if (candidates.empty()) throw std::runtime_error("random_interior_field: no deep interior elements");
    Rng rng(seed);
    CoefficientField c(sys.aniso().dim(), sys.n_lat());
    const int d = sys.aniso().dim();
    for (int e = 0; e < n_elements; ++e) {
        const int j = candidates[rng.uniform_int(0, static_cast<int>(candidates.size()) - 1)];
        VecI n(d);
        std::vector<int> cursor(d, -modes);
        while (true) {
            for (int i = 0; i < d; ++i) n[i] = cursor[i];
            c.add(j, n, Complex(rng.normal(), rng.normal()) / std::sqrt(2.0));
            int axis = d - 1;
            while (axis >= 0 && ++cursor[axis] > modes) cursor[axis--] = -modes;
            if (axis < 0) break;
        }
    }
    return {sys.synthesize(c), c};
}

}  // namespace anidec
