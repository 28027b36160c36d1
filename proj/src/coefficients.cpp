#include "anidec/coefficients.hpp"

#include <cstring>
#include <sstream>
#include <stdexcept>

namespace anidec {

std::int64_t CoefficientField::offset(const VecI& n) const {
    std::int64_t off = 0;
    for (int i = 0; i < d_; ++i) {
        const int k = n[i] + n_lat_;
        if (k < 0 || k >= side()) throw std::out_of_range("coefficient index outside lattice truncation");
        off = off * side() + k;
    }
    return off;
}

VecI CoefficientField::offset_to_n(std::int64_t off) const {
    VecI n(d_);
    for (int i = d_ - 1; i >= 0; --i) {
        n[i] = static_cast<int>(off % side()) - n_lat_;
        off /= side();
    }
    return n;
}

Complex CoefficientField::get(int j, const VecI& n) const {
    auto it = blocks_.find(j);
    if (it == blocks_.end()) return {0, 0};
    return it->second[offset(n)];
}

void CoefficientField::set(int j, const VecI& n, Complex v) { block(j)[offset(n)] = v; }
void CoefficientField::add(int j, const VecI& n, Complex v) { block(j)[offset(n)] += v; }

CVec& CoefficientField::block(int j) {
    auto it = blocks_.find(j);
    if (it == blocks_.end()) it = blocks_.emplace(j, CVec::Zero(block_size())).first;
    return it->second;
}

std::vector<int> CoefficientField::js() const {
    std::vector<int> out;
    out.reserve(blocks_.size());
    for (const auto& kv : blocks_) out.push_back(kv.first);
    return out;
}

Real CoefficientField::l2_norm_sq() const {
    Kahan s;
    for (const auto& kv : blocks_) {
        for (Eigen::Index i = 0; i < kv.second.size(); ++i) s.add(std::norm(kv.second[i]));
    }
    return s.sum;
}

long CoefficientField::nonzeros() const {
    long c = 0;
    for (const auto& kv : blocks_) {
        for (Eigen::Index i = 0; i < kv.second.size(); ++i)
            if (kv.second[i] != Complex(0, 0)) ++c;
    }
    return c;
}

void CoefficientField::scale(Complex a) {
    for (auto& kv : blocks_) kv.second *= a;
}

void CoefficientField::axpy(Complex a, const CoefficientField& other) {
    if (other.d_ != d_ || other.n_lat_ != n_lat_)
        throw std::invalid_argument("coefficient field shape mismatch");
    for (const auto& kv : other.blocks_) block(kv.first) += a * kv.second;
}

Complex CoefficientField::dot(const CoefficientField& other) const {
    Complex s{0, 0};
    for (const auto& kv : blocks_) {
        auto it = other.blocks_.find(kv.first);
        if (it == other.blocks_.end()) continue;
        s += it->second.dot(kv.second);  // conjugates the argument
    }
    return s;
}

std::string CoefficientField::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "j";
    for (int i = 0; i < d_; ++i) os << ",n" << i;
    os << ",re,im\n";
    for (const auto& kv : blocks_) {
        for (std::int64_t off = 0; off < kv.second.size(); ++off) {
            Complex v = kv.second[off];
            if (v == Complex(0, 0)) continue;
            VecI n = offset_to_n(off);
            os << kv.first;
            for (int i = 0; i < d_; ++i) os << "," << n[i];
            os << "," << v.real() << "," << v.imag() << "\n";
        }
    }
    return os.str();
}

CoefficientField CoefficientField::from_csv(int dim, int n_lat, const std::string& text) {
    CoefficientField c(dim, n_lat);
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        std::getline(ls, tok, ',');
        int j = std::stoi(tok);
        VecI n(dim);
        for (int i = 0; i < dim; ++i) {
            std::getline(ls, tok, ',');
            n[i] = std::stoi(tok);
        }
        std::getline(ls, tok, ',');
        Real re = std::stod(tok);
        std::getline(ls, tok, ',');
        Real im = std::stod(tok);
        c.set(j, n, {re, im});
    }
    return c;
}

std::vector<char> CoefficientField::to_binary() const {
    // header: magic, dim, n_lat, block count; then per block: j, data
    std::vector<char> buf;
    auto push = [&](const void* p, std::size_t n) {
        const char* c = static_cast<const char*>(p);
        buf.insert(buf.end(), c, c + n);
    };
    const std::uint32_t magic = 0x616e6366;  // "ancf"
    const std::int32_t dim = d_, nl = n_lat_;
    const std::int64_t nb = static_cast<std::int64_t>(blocks_.size());
    push(&magic, 4);
    push(&dim, 4);
    push(&nl, 4);
    push(&nb, 8);
    for (const auto& kv : blocks_) {
        const std::int32_t j = kv.first;
        push(&j, 4);
        push(kv.second.data(), sizeof(Complex) * kv.second.size());
    }
    return buf;
}

CoefficientField CoefficientField::from_binary(const std::vector<char>& buf) {
    std::size_t pos = 0;
    auto pull = [&](void* p, std::size_t n) {
        if (pos + n > buf.size()) throw std::runtime_error("coefficient binary: truncated");
        std::memcpy(p, buf.data() + pos, n);
        pos += n;
    };
    std::uint32_t magic;
    std::int32_t dim, nl;
    std::int64_t nb;
    pull(&magic, 4);
    if (magic != 0x616e6366) throw std::runtime_error("coefficient binary: bad magic");
    pull(&dim, 4);
    pull(&nl, 4);
    pull(&nb, 8);
    CoefficientField c(dim, nl);
    for (std::int64_t b = 0; b < nb; ++b) {
        std::int32_t j;
        pull(&j, 4);
        CVec& blk = c.block(j);
        pull(blk.data(), sizeof(Complex) * blk.size());
    }
    return c;
}

}  // namespace anidec
