#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace anidec {

using Real = double;
using Complex = std::complex<Real>;
using Vec = Eigen::VectorXd;
using VecI = Eigen::VectorXi;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

/// Number of worker threads used by parallel loops (default: hardware).
void set_num_threads(int n);
int num_threads();

/// Runs fn(begin, end) on disjoint chunks of [0, n).  Chunk boundaries
/// depend only on n and the configured thread count, so slot-writing
/// loops stay deterministic.
void parallel_chunks(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn);

/// Deterministic RNG wrapper.  One instance per logical sample stream;
/// each draw consumes a fixed number of engine words so prefixes of a
/// seeded stream are reproducible when the sample count grows.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    Real uniform() { return std::uniform_real_distribution<Real>(0.0, 1.0)(eng_); }
    Real uniform(Real a, Real b) { return a + (b - a) * uniform(); }
    Real normal() { return std::normal_distribution<Real>(0.0, 1.0)(eng_); }
    int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
    Vec normal_vec(int d) {
        Vec v(d);
        for (int i = 0; i < d; ++i) v[i] = normal();
        return v;
    }
    Complex unit_complex() {
        Real ph = uniform(0.0, 6.283185307179586);
        return {std::cos(ph), std::sin(ph)};
    }
    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

inline Real sqr(Real x) { return x * x; }

/// Kahan compensated accumulator for long quadrature sums.
struct Kahan {
    Real sum = 0, c = 0;
    void add(Real v) {
        Real y = v - c;
        Real t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

struct KahanC {
    Kahan re, im;
    void add(Complex v) {
        re.add(v.real());
        im.add(v.imag());
    }
    Complex value() const { return {re.sum, im.sum}; }
};

}  // namespace anidec
