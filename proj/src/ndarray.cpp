#include "anidec/ndarray.hpp"

#include <unsupported/Eigen/FFT>

#include <numeric>
#include <stdexcept>

namespace anidec {

CArray::CArray(std::vector<int> dims) : dims_(std::move(dims)) {
    std::int64_t n = 1;
    for (int d : dims_) {
        if (d <= 0) throw std::invalid_argument("CArray: nonpositive dimension");
        n *= d;
    }
    v_.assign(n, Complex(0, 0));
}

void CArray::dft_axis(int axis, int sign) {
    const int M = dims_[axis];
    std::int64_t stride = 1;
    for (int k = axis + 1; k < rank(); ++k) stride *= dims_[k];
    const std::int64_t lines = size() / M;

    parallel_chunks(lines, [&](std::int64_t lb, std::int64_t le) {
        Eigen::FFT<Real> fft;
        std::vector<Complex> in(M), out(M);
        for (std::int64_t line = lb; line < le; ++line) {
            // Base offset of this line: split the line index around the axis.
            const std::int64_t outer = line / stride;
            const std::int64_t inner = line % stride;
            const std::int64_t base = outer * stride * M + inner;
            for (int i = 0; i < M; ++i) in[i] = v_[base + i * stride];
            if (sign < 0) {
                fft.fwd(out, in);
            } else {
                for (auto& c : in) c = std::conj(c);
                fft.fwd(out, in);
                for (auto& c : out) c = std::conj(c);
            }
            for (int i = 0; i < M; ++i) v_[base + i * stride] = out[i];
        }
    });
}

void CArray::dft_all_axes(int sign) {
    for (int k = 0; k < rank(); ++k) dft_axis(k, sign);
}

}  // namespace anidec
