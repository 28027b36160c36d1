#pragma once

#include "anidec/core.hpp"

#include <cassert>
#include <vector>

namespace anidec {

/// Dense complex array over a small number of axes (row-major).
/// Carries the multi-dimensional DFTs used for cube quadratures and
/// profile synthesis.  Sizes are arbitrary; powers of two are typical.
class CArray {
public:
    CArray() = default;
    explicit CArray(std::vector<int> dims);

    const std::vector<int>& dims() const { return dims_; }
    int dim(int axis) const { return dims_[axis]; }
    int rank() const { return static_cast<int>(dims_.size()); }
    std::int64_t size() const { return static_cast<std::int64_t>(v_.size()); }

    Complex* data() { return v_.data(); }
    const Complex* data() const { return v_.data(); }
    Complex& operator[](std::int64_t i) { return v_[i]; }
    const Complex& operator[](std::int64_t i) const { return v_[i]; }

    std::int64_t flat(const std::vector<int>& idx) const {
        std::int64_t f = 0;
        for (int k = 0; k < rank(); ++k) f = f * dims_[k] + idx[k];
        return f;
    }
    void unflat(std::int64_t f, std::vector<int>& idx) const {
        idx.resize(dims_.size());
        for (int k = rank() - 1; k >= 0; --k) {
            idx[k] = static_cast<int>(f % dims_[k]);
            f /= dims_[k];
        }
    }

    /// In-place DFT along every axis: X_k = sum_i x_i exp(sign*2*pi*I*k*i/M).
    /// Unnormalized for either sign.
    void dft_all_axes(int sign);

    void fill(Complex c) { std::fill(v_.begin(), v_.end(), c); }

private:
    void dft_axis(int axis, int sign);

    std::vector<int> dims_;
    std::vector<Complex> v_;
};

}  // namespace anidec
