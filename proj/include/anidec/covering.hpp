#pragma once

#include "anidec/regulation.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace anidec {

struct CoveringGrid {
    // Candidate / verification point spacing as a fraction of the local ball
    // support width (euclidean, per direction).
    int pack_density = 12;
    int verify_density = 5;
    // Greedy rejection radius factor (times delta * h).  Values above 1 thin
    // the packing; the 2*delta covering check remains the hard gate.  Keep
    // pack_slack * (1 + candidate gap) * K <= 2.
    Real pack_slack = 1.25;
};

class CoveringError : public std::runtime_error {
public:
    CoveringError(const std::string& what, std::vector<Vec> uncovered)
        : std::runtime_error(what), uncovered_points(std::move(uncovered)) {}
    std::vector<Vec> uncovered_points;
};

/// Structured admissible covering of a truncated frequency annulus by
/// quasi-balls B_a(xi_j, delta * h~(xi_j)), built by deterministic greedy
/// packing in shells of increasing |.|_a.  The affine maps are
/// T_j u = D_a(t_j) u + xi_j with t_j = h~(xi_j).
class Covering {
public:
    Covering(Anisotropy aniso, HybridRegulation reg, Real delta, Real delta0, Annulus ann)
        : aniso_(std::move(aniso)), reg_(std::move(reg)), delta_(delta), delta0_(delta0), ann_(ann) {}

    const Anisotropy& aniso() const { return aniso_; }
    const HybridRegulation& regulation() const { return reg_; }
    Real delta() const { return delta_; }
    Real delta0() const { return delta0_; }
    const Annulus& annulus() const { return ann_; }

    int count() const { return static_cast<int>(centers_.size()); }
    const Vec& center(int j) const { return centers_[j]; }
    Real scale(int j) const { return scales_[j]; }
    Real center_radius(int j) const { return radii_[j]; }
    bool is_boundary(int j) const { return boundary_[j] != 0; }
    const std::vector<int>& neighbors(int j) const { return neighbors_[j]; }

    Real delta_prime() const { return delta_prime_; }
    int n0() const { return n0_; }
    Real triangle_constant() const { return k_est_; }

    Vec to_local(int j, const Vec& xi) const;   // T_j^{-1} xi
    Vec to_global(int j, const Vec& u) const;   // T_j u

    /// True iff xi lies in the open support ball B_a(xi_j, 2 delta t_j).
    bool in_support(int j, const Vec& xi) const;

    /// All j whose support ball contains xi (bucket-accelerated).
    std::vector<int> covering_elements(const Vec& xi) const;

    /// Covered by >= 1 ball, all of whose covering balls are non-boundary.
    bool is_interior(const Vec& xi) const;

    /// Sorted union of neighbor lists over js.
    std::vector<int> expand(const std::vector<int>& js) const;

    /// j together with all its neighbors is non-boundary.
    bool is_deep_interior(int j) const;

    std::string to_json() const;
    std::string to_csv() const;  // rows (j, xi_j..., t_j, #neighbors, boundary)

    friend Covering build_covering(const Anisotropy&, const HybridRegulation&, Real delta,
                                   Real delta0, const Annulus&, const CoveringGrid&);

    struct VerifyResult {
        bool covered = false;
        int n0 = 0;
        std::vector<Vec> uncovered;
    };
    VerifyResult verify_admissible(int density) const;

private:
    void build_buckets();
    void bucket_range(Real r, int& lo, int& hi) const;

    Anisotropy aniso_;
    HybridRegulation reg_;
    Real delta_, delta0_;
    Annulus ann_;

    std::vector<Vec> centers_;
    std::vector<Real> scales_;
    std::vector<Real> radii_;  // |xi_j|_a
    std::vector<char> boundary_;
    std::vector<std::vector<int>> neighbors_;
    Real delta_prime_ = 0;
    int n0_ = 0;
    Real k_est_ = 1;

    // centers bucketed by log2 |xi_j|_a for windowed pair queries
    std::vector<std::vector<int>> buckets_;
    Real bucket_base_ = 0;
    static constexpr int kBucketsPerOctave = 4;
};

/// Greedy maximal packing followed by covering verification at radius 2*delta
/// (throws CoveringError with an uncovered-point report on failure).
/// Requires 0 < delta < delta0 / 2 and a valid annulus.
Covering build_covering(const Anisotropy& aniso, const HybridRegulation& reg, Real delta,
                        Real delta0, const Annulus& ann, const CoveringGrid& grid = {});

/// Exact overlap test for two axis-aligned open ellipsoids
/// {x : sum ((x_i - c_i)/e_i)^2 < 1}.
bool ellipsoids_overlap(const Vec& c1, const Vec& e1, const Vec& c2, const Vec& e2);

}  // namespace anidec
