#pragma once

#include <cstdint>
#include <vector>

#include "fdep/core.hpp"
#include "fdep/errors.hpp"
#include "fdep/parallel.hpp"

namespace fdep {

// ---------------------------------------------------------------------------
// NNGraph — the 1-nearest-neighbor map i -> N(i), 0-based indices
// ---------------------------------------------------------------------------
struct NNGraph {
    size_t n = 0;
    std::vector<uint32_t> nn;  // nn[i] != i
    size_t tie_count = 0;      // rows whose minimum was attained by >= 2 candidates
};

// Exact row scan over the full distance matrix. Ties broken by smallest
// index; tie_count surfaces how often the minimum was not unique (under an
// atomless metric distribution this is zero almost surely, but file data
// can tie). A spatial index is deliberately not used: the input is
// functional/high-dimensional where tree indexes degenerate, and the
// downstream oracles require exact argmins.
inline NNGraph nearest_neighbor_graph(const DistanceMatrix& d, int threads = 0) {
    const size_t n = d.n;
    if (n < 2) throw SampleTooSmall("nearest-neighbor graph needs n >= 2");
    NNGraph g;
    g.n = n;
    g.nn.assign(n, 0);
    std::vector<uint8_t> tied(n, 0);
    const double* dd = d.d.data();
    const int workers = resolve_threads(threads);

    parallel_chunks(0, static_cast<int64_t>(n), workers, 64, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) {
            const double* row = dd + static_cast<size_t>(i) * n;
            size_t best = (i == 0) ? 1 : 0;
            double best_d = row[best];
            size_t hits = 1;
            for (size_t j = best + 1; j < n; ++j) {
                if (j == static_cast<size_t>(i)) continue;
                double v = row[j];
                if (v < best_d) {
                    best_d = v;
                    best = j;
                    hits = 1;
                } else if (v == best_d) {
                    ++hits;
                }
            }
            g.nn[static_cast<size_t>(i)] = static_cast<uint32_t>(best);
            tied[static_cast<size_t>(i)] = hits > 1;
        }
    });
    for (size_t i = 0; i < n; ++i) g.tie_count += tied[i];
    return g;
}

// ---------------------------------------------------------------------------
// DegreeStats — in-degrees L_{i,n}, their max and square sum, and the
// reciprocal-pair member count f_n = #{i : N(N(i)) = i}
// ---------------------------------------------------------------------------
struct DegreeStats {
    std::vector<uint32_t> in_degree;
    uint32_t l_max = 0;
    uint64_t sum_sq = 0;
    uint64_t f_n = 0;
};

inline DegreeStats degree_stats(const NNGraph& g) {
    DegreeStats s;
    s.in_degree.assign(g.n, 0);
    for (size_t i = 0; i < g.n; ++i) ++s.in_degree[g.nn[i]];
    for (size_t i = 0; i < g.n; ++i) {
        uint64_t deg = s.in_degree[i];
        s.sum_sq += deg * deg;
        if (s.in_degree[i] > s.l_max) s.l_max = s.in_degree[i];
        if (g.nn[g.nn[i]] == i) ++s.f_n;
    }
    return s;
}

}  // namespace fdep
