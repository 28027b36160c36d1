#include "anidec/core.hpp"

#include <algorithm>
#include <thread>

namespace anidec {

namespace {
int g_threads = 0;  // 0 = uninitialized
}

void set_num_threads(int n) { g_threads = std::max(1, n); }

int num_threads() {
    if (g_threads == 0) {
        unsigned hw = std::thread::hardware_concurrency();
        g_threads = hw == 0 ? 1 : static_cast<int>(hw);
    }
    return g_threads;
}

void parallel_chunks(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn) {
    if (n <= 0) return;
    const int nt = std::min<std::int64_t>(num_threads(), n);
    if (nt <= 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    const std::int64_t chunk = (n + nt - 1) / nt;
    for (int t = 0; t < nt; ++t) {
        std::int64_t b = t * chunk;
        std::int64_t e = std::min<std::int64_t>(b + chunk, n);
        if (b >= e) break;
        pool.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace anidec
