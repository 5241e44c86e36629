#include "tdb/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace tdb {

namespace {
std::atomic<int> g_threads{0};

int resolve_default() {
    if (const char* env = std::getenv("TDB_SPARSE_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return 1;
}
}  // namespace

int max_threads() {
    int n = g_threads.load(std::memory_order_relaxed);
    if (n <= 0) {
        n = resolve_default();
        g_threads.store(n, std::memory_order_relaxed);
    }
    return n;
}

void set_max_threads(int n) { g_threads.store(std::max(1, n), std::memory_order_relaxed); }

void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body) {
    const std::size_t nt = static_cast<std::size_t>(max_threads());
    if (nt <= 1 || count < 2 * nt) {
        body(0, count);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(nt);
    const std::size_t chunk = (count + nt - 1) / nt;
    for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t b = t * chunk;
        const std::size_t e = std::min(count, b + chunk);
        if (b >= e) break;
        workers.emplace_back([&body, b, e] { body(b, e); });
    }
    for (auto& w : workers) w.join();
}

}  // namespace tdb
