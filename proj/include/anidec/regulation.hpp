#pragma once

#include "anidec/anisotropy.hpp"

#include <string>
#include <vector>

namespace anidec {

/// C-infinity monotone step: 0 for s <= 0, 1 for s >= 1, built from the
/// standard bump quotient f(s) / (f(s) + f(1-s)) with f(s) = exp(-1/s).
Real smooth_step(Real s);

/// Ramp in |.|_a: equal to 1 on (0, 2/3], 0 on [4/3, inf), smooth and
/// nonincreasing in between.
Real ramp(Real r);

struct Annulus {
    Real r_min = 0, r_max = 0;  // in |.|_a units
    bool valid() const { return r_min > 0 && r_min < r_max; }
};

struct ModerationEstimate {
    Real delta0 = 0;
    Real ratio = 1;  // R: max of h(xi)/h(zeta) over admissible sampled pairs
    long pairs = 0;
    std::vector<Real> octave_ratio;  // per-octave R values over the annulus
};

struct ExtraConditionReport {
    bool pass = false;
    Real r1_fit = 0;                  // smallest R1 seen to dominate all samples
    Real r1_growth = 0;               // spread of per-octave R1 fits
    ModerationEstimate power_mod;     // moderation of h2^{1+beta}
    Real moderation_growth = 0;       // spread of per-octave moderation ratios
    std::string note;
};

struct RegulationGrid {
    int radial = 48;     // sample radii per octave of the annulus
    int dirs = 16;       // directions per sample point
    int fractions = 4;   // radius fractions per direction
};

/// Moderation estimate for an arbitrary radial function h(xi) = h_r(|xi|_a):
/// max ratio h(xi)/h(zeta) over sampled pairs with dist(xi,zeta) <= delta0 h(xi).
ModerationEstimate estimate_moderation_radial(const Anisotropy& aniso,
                                              const std::function<Real(Real)>& h_radial,
                                              Real delta0, const Annulus& ann,
                                              const RegulationGrid& grid = {},
                                              std::uint64_t seed = 11u);

/// Hybrid regulation function: ramp-glued pair of moderate functions.
/// Built-in family: h1 = |xi|_a^{e1}, h2 = |xi|_a^{e2} with e1 >= 1;
/// the alpha-family uses e1 = 2 - alpha, e2 = alpha.
class HybridRegulation {
public:
    HybridRegulation(Anisotropy aniso, Real h1_exp, Real h2_exp, Real beta);
    static HybridRegulation alpha_family(Anisotropy aniso, Real alpha);
    static HybridRegulation alpha_family(Anisotropy aniso, Real alpha, Real beta);

    const Anisotropy& aniso() const { return aniso_; }
    Real h1_exp() const { return e1_; }
    Real h2_exp() const { return e2_; }
    Real beta() const { return beta_; }

    Real h1_radial(Real r) const { return std::pow(r, e1_); }
    Real h2_radial(Real r) const { return std::pow(r, e2_); }

    /// h~(xi) = ramp * h1 + (1 - ramp) * h2; throws std::domain_error at 0.
    Real evaluate(const Vec& xi) const;
    /// Same through the radial profile (the built-in family depends on xi
    /// only through |xi|_a).
    Real evaluate_radial(Real r) const;

    /// Max ratio h~(xi)/h~(zeta) over sampled pairs with
    /// dist(xi, zeta) <= delta0 * h~(xi).
    ModerationEstimate estimate_moderation(Real delta0, const Annulus& ann,
                                           const RegulationGrid& grid = {},
                                           std::uint64_t seed = 11u) const;

    /// Checks both halves of the extra requirement on h2: moderation of
    /// h2^{1+beta} and the linear domination h2(zeta) <= R1 * a * h2(xi)
    /// whenever |xi - zeta|_a <= a h2(xi), a >= rho1.  Never throws on
    /// violation; the report carries the diagnostics.
    ExtraConditionReport check_extra_condition(Real beta, Real rho1, const Annulus& ann,
                                               const RegulationGrid& grid = {},
                                               std::uint64_t seed = 13u) const;

    std::string to_json() const;
    static HybridRegulation from_json(Anisotropy aniso, const std::string& text);

private:
    Anisotropy aniso_;
    Real e1_, e2_, beta_;
};

}  // namespace anidec
