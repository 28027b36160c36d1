#pragma once

#include "anidec/core.hpp"

#include <optional>
#include <string>

namespace anidec {

/// Anisotropic scaling structure on R^d: exponent vector a with a_i > 1,
/// dilations D_a(t) = diag(t^{a_i}), and the induced quasi-norm |.|_a
/// defined as the unique t > 0 with |D_a(1/t) xi| = 1.
class Anisotropy {
public:
    explicit Anisotropy(Vec a);

    int dim() const { return static_cast<int>(a_.size()); }
    const Vec& exponents() const { return a_; }
    Real nu() const { return nu_; }          // homogeneous dimension, sum of a_i
    Real alpha1() const { return alpha1_; }  // min exponent
    Real alpha2() const { return alpha2_; }  // max exponent

    /// D_a(t) xi; throws std::domain_error for t <= 0.
    Vec dilate(Real t, const Vec& xi) const;

    /// |xi|_a with relative accuracy ~1e-12 (guarded Newton on log t).
    Real quasi_norm(const Vec& xi) const;

    /// Exact membership test for B_a(center, radius): uses
    /// |xi - c|_a < r  <=>  |D_a(1/r)(xi - c)| < 1 (homogeneity), no root solve.
    bool ball_contains(const Vec& center, Real radius, const Vec& xi) const;

    /// Empirical quasi-triangle constant over `samples` random pairs
    /// normalized to |xi|_a + |zeta|_a = 1; always >= 1 (the pair zeta = 0 is
    /// included).  Deterministic in (samples, seed); growing `samples` with a
    /// fixed seed extends the same sample stream.  Result is cached together
    /// with its sample count.
    Real estimate_triangle_constant(long samples, std::uint64_t seed = 7u) const;
    long triangle_constant_samples() const { return k_samples_; }

    /// Lattice (midpoint) measure of B_a(0, radius) over its exact bounding
    /// box, `resolution` cells per axis.
    Real measure_ball(Real radius, int resolution = 512) const;

    /// kappa_d^a = |B_a(0,1)|, cached measure_ball(1, resolution).
    Real unit_ball_volume(int resolution = 512) const;

    std::string to_json() const;
    static Anisotropy from_json(const std::string& text);

private:
    Vec a_;
    Real nu_ = 0, alpha1_ = 0, alpha2_ = 0;
    mutable Real k_est_ = 1.0;
    mutable long k_samples_ = 0;
    mutable std::optional<Real> kappa_;
    mutable int kappa_res_ = 0;
};

}  // namespace anidec
