#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace fdep {

// Resolve a thread-count request: explicit value wins, then the
// FDEP_THREADS environment variable, then hardware concurrency.
inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("FDEP_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Run body(first, last) over [begin, end) split into chunks claimed from a
// shared counter. Chunks are fixed-size, so which thread runs a chunk never
// affects what the chunk computes; callers keep determinism by writing to
// disjoint output slots.
template <typename Body>
void parallel_chunks(int64_t begin, int64_t end, int threads, int64_t chunk, const Body& body) {
    const int64_t total = end - begin;
    if (total <= 0) return;
    if (chunk < 1) chunk = 1;
    const int64_t n_chunks = (total + chunk - 1) / chunk;
    int workers = threads;
    if (workers > n_chunks) workers = static_cast<int>(n_chunks);
    if (workers <= 1) {
        body(begin, end);
        return;
    }
    std::atomic<int64_t> next{0};
    auto run = [&]() {
        for (;;) {
            int64_t c = next.fetch_add(1, std::memory_order_relaxed);
            if (c >= n_chunks) return;
            int64_t lo = begin + c * chunk;
            int64_t hi = lo + chunk < end ? lo + chunk : end;
            body(lo, hi);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers) - 1);
    for (int t = 1; t < workers; ++t) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
}

}  // namespace fdep
