#pragma once

#include "anidec/core.hpp"

#include <map>
#include <string>
#include <vector>

namespace anidec {

/// Index of a frame element: covering element j and lattice offset n.
struct FrameIndex {
    int j = 0;
    VecI n;

    bool operator==(const FrameIndex& o) const { return j == o.j && n == o.n; }
};

struct SpaceParams {
    Real s = 0;  // smoothness
    Real p = 2;  // integrability (inf allowed where flagged)
    Real q = 2;
    Real r() const { return std::min({1.0, p, q}); }
};

enum class NormFlavor { triebel_lizorkin, modulation };

/// Finitely supported coefficients indexed by (j, n), |n|_inf <= n_lat.
/// Storage is a dense (2 n_lat + 1)^d block per participating j.
class CoefficientField {
public:
    CoefficientField() = default;
    CoefficientField(int dim, int n_lat) : d_(dim), n_lat_(n_lat) {}

    int dim() const { return d_; }
    int n_lat() const { return n_lat_; }
    int side() const { return 2 * n_lat_ + 1; }
    std::int64_t block_size() const {
        std::int64_t s = 1;
        for (int i = 0; i < d_; ++i) s *= side();
        return s;
    }

    std::int64_t offset(const VecI& n) const;  // row-major over n + n_lat
    VecI offset_to_n(std::int64_t off) const;

    Complex get(int j, const VecI& n) const;
    void set(int j, const VecI& n, Complex v);
    void add(int j, const VecI& n, Complex v);

    bool has_block(int j) const { return blocks_.count(j) != 0; }
    CVec& block(int j);  // creates zero block on demand
    const CVec* block_ptr(int j) const {
        auto it = blocks_.find(j);
        return it == blocks_.end() ? nullptr : &it->second;
    }
    const std::map<int, CVec>& blocks() const { return blocks_; }
    std::vector<int> js() const;

    Real l2_norm_sq() const;
    long nonzeros() const;
    void scale(Complex a);
    /// this += a * other (same dim / n_lat)
    void axpy(Complex a, const CoefficientField& other);
    Complex dot(const CoefficientField& other) const;  // <this, other>, conjugate-linear in other

    std::string to_csv() const;  // rows: j, n..., re, im
    static CoefficientField from_csv(int dim, int n_lat, const std::string& text);
    std::vector<char> to_binary() const;
    static CoefficientField from_binary(const std::vector<char>& buf);

private:
    int d_ = 0, n_lat_ = 0;
    std::map<int, CVec> blocks_;
};

}  // namespace anidec
