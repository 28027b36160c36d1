#pragma once

#include "anidec/coefficients.hpp"
#include "anidec/covering.hpp"
#include "anidec/ndarray.hpp"

#include <functional>
#include <memory>
#include <mutex>
#include <shared_mutex>

namespace anidec {

struct FrameParams {
    int cube_res = 64;      // samples per axis on the cube K
    int n_lat = 8;          // lattice truncation |n|_inf <= n_lat
    Real cube_margin = 1.0; // a_cube = margin * minimal containing half-side
    int profile_pad = 8;    // zero-pad factor for direct-space profiles
    // Fraction of per-element integrand energy allowed within 4 bins of
    // Nyquist (proxy bound for aliasing corruption).  Fidelity experiments
    // set ~1e-9; the loose default only rejects flagrant undersampling,
    // since elements with strong neighbor scale contrast legitimately push
    // pulled-back content toward Nyquist without harming factor-2 studies.
    Real alias_tol = 0.5;
    Real pq_floor = 0.25;   // quadrature-stability floor for p, q
    // Bump profile: beta <= 0 selects the plateau step (1 on the delta ball);
    // beta > 0 selects the gaussian-core bump exp(-beta rho^2 / ((2d)^2 - rho^2)),
    // whose cube spectrum concentrates far better at desk resolutions.
    Real bump_beta = 0.0;
};

/// Frequency-side function: an exact pointwise evaluator of f^ together with
/// the covering elements whose support balls meet supp(f^).  Functions built
/// from frame coefficients are band-limited by construction, which keeps all
/// quadratures per-ball and spectrally accurate; no global frequency grid
/// could resolve every scale of a homogeneous covering at once.
/// When the function is a frame-coefficient combination, `coeffs` is set and
/// cube quadratures use a separable fast path instead of pointwise sums.
struct FreqFunction {
    std::function<Complex(const Vec&)> hat;
    std::shared_ptr<const CoefficientField> coeffs;
    std::vector<int> support;
};

/// Uniform box grid in direct space for the general-(p, q) Triebel-Lizorkin
/// quadrature (the one path that genuinely couples scales pointwise in x).
struct DirectGrid {
    Vec lo, hi;
    int res = 128;
};

/// Direct-space profile on the padded dual lattice of the cube, with bicubic
/// interpolation between lattice points.
class PaddedProfile {
public:
    PaddedProfile(CArray vals, Real spacing) : vals_(std::move(vals)), spacing_(spacing) {}
    Real spacing() const { return spacing_; }
    Real range() const { return 0.5 * spacing_ * vals_.dim(0); }
    bool in_range(const Vec& y, Real pad = 2.0) const;
    Complex eval(const Vec& y) const;  // bicubic; 0 outside range
    const CArray& values() const { return vals_; }

private:
    CArray vals_;
    Real spacing_;
};

/// Square-root BAPU frame over a structured covering: bump, partition,
/// band-limited atoms in frequency and direct space, FFT analysis/synthesis,
/// and the continuous decomposition-space norms.
class FrameSystem {
public:
    FrameSystem(Covering cov, FrameParams params = {});

    const Covering& covering() const { return cov_; }
    const Anisotropy& aniso() const { return cov_.aniso(); }
    const FrameParams& params() const { return params_; }
    Real cube_half_side() const { return a_cube_; }
    int cube_res() const { return params_.cube_res; }
    int n_lat() const { return params_.n_lat; }

    /// Radial profile of the bump: 1 on [0, delta], 0 on [2 delta, inf).
    Real bump(Real quasi_radius) const;
    Real bump_at(int j, const Vec& xi) const;  // Psi(T_j^{-1} xi)

    enum class Bapu { plain, sqrt };
    Real bapu(int j, const Vec& xi, Bapu mode) const;
    Real partition_sum(const Vec& xi, Bapu mode) const;  // sum psi_j or sum phi_j^2

    struct CubeCache {
        Eigen::ArrayXd mu_hat;  // phi_j(T_j u) on the cube grid
        Eigen::ArrayXd den;     // sum_k Psi_k(T_j u)^2
    };
    /// phi_j(T_j u) sampled on the cube grid (row-major, cube_res^d).
    std::shared_ptr<const CubeCache> cube_cache(int j) const;
    std::shared_ptr<const Eigen::ArrayXd> mu_hat(int j) const;

    /// Values of (sum_{k,n} c_{k,n} eta^_{k,n})(T_j u) on the cube grid of j,
    /// evaluated by separable per-axis phase contractions.
    CVec field_on_cube(int j, const CoefficientField& c) const;
    /// mu_j on the padded dual lattice.
    std::shared_ptr<const PaddedProfile> profile(int j) const;

    Complex atom_freq(const FrameIndex& idx, const Vec& xi) const;
    Complex atom_direct(const FrameIndex& idx, const Vec& x) const;  // throws outside profile range
    Real atom_norm_sq(int j) const;  // ||eta_{j,n}||_2^2 (independent of n)
    Vec lattice_point(const FrameIndex& idx) const;  // x_{j,n} = A_j^{-1} (pi/a) n

    CoefficientField analyze(const FreqFunction& f) const;
    FreqFunction synthesize(const CoefficientField& coeffs) const;
    FreqFunction atom_fn(const FrameIndex& idx) const;

    Real l2_norm(const FreqFunction& f) const;
    Complex inner(const FreqFunction& f, const FreqFunction& g) const;

    Real function_space_norm(const FreqFunction& f, const SpaceParams& sp, NormFlavor flavor,
                             const DirectGrid* grid = nullptr) const;

    // cube grid helpers
    Real cube_step() const { return 2.0 * a_cube_ / params_.cube_res; }
    Vec cube_point(std::int64_t flat) const;
    std::int64_t cube_size() const;

    // scale helpers (cached powers of t_j)
    Vec to_global(int j, const Vec& u) const;
    Vec to_local(int j, const Vec& xi) const;

private:
    CubeCache compute_cube_cache(int j) const;
    CVec analyze_one(int j, const FreqFunction& f, Real* tot_out = nullptr,
                     Real* guard_out = nullptr) const;
    /// f^ values on the cube grid of j (fast path when f.coeffs is set).
    CVec hat_on_cube(int j, const FreqFunction& f) const;

    Covering cov_;
    FrameParams params_;
    Real a_cube_ = 0;
    std::vector<Vec> pow_t_, pow_t_inv_;  // per j: t_j^{a_i}, t_j^{-a_i}
    Vec inv_2delta_sq_;                   // (2 delta)^{-2 a_i} pattern reused per scale

    mutable std::shared_mutex mu_mutex_;
    mutable std::map<int, std::shared_ptr<const CubeCache>> mu_cache_;
    mutable std::mutex prof_mutex_;
    mutable std::map<int, std::shared_ptr<const PaddedProfile>> prof_cache_;
    mutable std::vector<int> prof_order_;  // small LRU
};

/// Zero-padded inverse DFT of cube samples: values of
/// (2 pi)^{-d/2} integral_K F(u) e^{i y u} du on the lattice
/// y in (pi/(a pad)) Z^d, |y_i| <= (pi/a)(M/2).
CArray padded_inverse(const CArray& cube_vals, Real a_cube, int pad);

FreqFunction lincomb(std::vector<std::pair<Complex, FreqFunction>> terms);

/// Random band-limited test function supported on deep-interior covering
/// elements with |n|_inf <= modes; returns the coefficients used.
std::pair<FreqFunction, CoefficientField> random_interior_field(
    const FrameSystem& sys, int n_elements, int modes, std::uint64_t seed,
    Real scale_lo = 0.0, Real scale_hi = 1e300);

}  // namespace anidec
