#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "fdep/core.hpp"
#include "fdep/errors.hpp"
#include "fdep/nn_graph.hpp"
#include "fdep/normal.hpp"

namespace fdep {

// ---------------------------------------------------------------------------
// Ranks r_i = n * F_n(Y_i) = #{j : Y_j <= Y_i}. This is the literal
// empirical distribution function, so ties get the maximal rank; tie_flag
// surfaces them instead of silently switching to midranks.
// ---------------------------------------------------------------------------
struct RankVector {
    std::vector<uint32_t> r;  // each in {1..n}
    bool tie_flag = false;
};

inline RankVector rank_vector(std::span<const double> y) {
    const size_t n = y.size();
    if (n < 1) throw SampleTooSmall("rank vector needs n >= 1");
    for (size_t i = 0; i < n; ++i)
        if (!std::isfinite(y[i])) throw NonFiniteValue(i, 0);
    std::vector<double> sorted(y.begin(), y.end());
    std::sort(sorted.begin(), sorted.end());
    RankVector rv;
    rv.r.resize(n);
    for (size_t i = 0; i + 1 < n; ++i)
        if (sorted[i] == sorted[i + 1]) {
            rv.tie_flag = true;
            break;
        }
    for (size_t i = 0; i < n; ++i) {
        auto it = std::upper_bound(sorted.begin(), sorted.end(), y[i]);
        rv.r[i] = static_cast<uint32_t>(it - sorted.begin());
    }
    return rv;
}

// ---------------------------------------------------------------------------
// The dependence coefficient: Q_hat = (1/n^2) sum_i min(r_i, r_N(i)),
// T_hat = 6 Q_hat - 2. Under independence E[Q_hat] = (n+1)/(3n) exactly,
// so E[T_hat] = 2/n.
// ---------------------------------------------------------------------------
inline double q_hat(const RankVector& rv, const NNGraph& g) {
    const size_t n = rv.r.size();
    if (n != g.n) throw DimensionMismatch("rank vector and graph sizes differ");
    if (n < 2) throw SampleTooSmall("coefficient needs n >= 2");
    uint64_t acc = 0;
    for (size_t i = 0; i < n; ++i) acc += std::min(rv.r[i], rv.r[g.nn[i]]);
    return static_cast<double>(acc) / (static_cast<double>(n) * static_cast<double>(n));
}

inline double t_hat(double q) { return 6.0 * q - 2.0; }

// Exact null mean of T_hat at sample size n.
inline double t_hat_null_mean(size_t n) { return 2.0 / static_cast<double>(n); }

// ---------------------------------------------------------------------------
// Exact conditional variances of sqrt(n) * Q given the NN graph, under
// independence. w_tilde is the population-rank version (uses
// W1 = n + sum L_i^2 - 2 f_n, W2 = n + f_n); w_n is the empirical-rank
// version with the three pair-class covariances v0, v1, v2.
// ---------------------------------------------------------------------------
inline double w_tilde(const DegreeStats& s, size_t n) {
    if (n < 2) throw SampleTooSmall("w_tilde needs n >= 2");
    const double w1 = static_cast<double>(n) + static_cast<double>(s.sum_sq) -
                      2.0 * static_cast<double>(s.f_n);
    const double w2 = static_cast<double>(n) + static_cast<double>(s.f_n);
    return (w1 / 45.0 + w2 / 18.0) / static_cast<double>(n);
}

inline double w_n(const DegreeStats& s, size_t n) {
    if (n < 4) throw SampleTooSmall("w_n needs n >= 4");
    const double nd = static_cast<double>(n);
    const double w1 = nd + static_cast<double>(s.sum_sq) - 2.0 * static_cast<double>(s.f_n);
    const double w2 = nd + static_cast<double>(s.f_n);
    const double v0 = -4.0 * (nd + 1.0) / (45.0 * nd * nd);
    const double v1 = (((4.0 * nd - 25.0) * nd + 30.0) * nd * nd + 25.0 * nd - 34.0) /
                      (180.0 * nd * nd * (nd - 1.0) * (nd - 2.0));
    const double v2 = (nd * nd - nd - 2.0) / (18.0 * nd * nd);
    const double w = (w1 * v1 + w2 * v2 + (nd * nd - w1 - w2) * v0) / nd;
    if (!(w > 0.0)) throw NonpositiveVariance("w_n must be positive; formula misuse");
    return w;
}

// Self-normalized statistic sqrt(n / (36 w)) * t.
inline double i_n(double t, double w, size_t n) {
    if (!(w > 0.0)) throw NonpositiveVariance("i_n needs w > 0");
    return std::sqrt(static_cast<double>(n) / (36.0 * w)) * t;
}

// ---------------------------------------------------------------------------
// TestReport — everything the independence test produces
// ---------------------------------------------------------------------------
struct TestReport {
    size_t n = 0;
    double t_hat = 0.0;    // 6 q_hat - 2 (uncentered coefficient)
    double q_hat = 0.0;
    double w_tilde = 0.0;
    double w_n = 0.0;
    double i_n = 0.0;      // normalized statistic, centered at the exact null mean 2/n
    double p_value = 1.0;  // one-sided upper tail
    uint32_t l_max = 0;
    uint64_t f_n = 0;
    size_t tie_count_x = 0;
    bool tie_flag_y = false;
};

// Test pipeline on a precomputed distance matrix. The reported coefficient
// t_hat is the raw 6 q_hat - 2; the normalized statistic subtracts the
// exact finite-sample null mean 2/n before self-normalizing, which keeps
// the same N(0,1) limit and makes the null calibration exact rather than
// O(n^{-1/2})-biased.
inline TestReport independence_test(const DistanceMatrix& dx, std::span<const double> y,
                                    int threads = 0) {
    if (dx.n != y.size()) throw DimensionMismatch("distance matrix and response sizes differ");
    if (dx.n < 4) throw SampleTooSmall("independence test needs n >= 4");
    const size_t n = dx.n;
    NNGraph g = nearest_neighbor_graph(dx, threads);
    DegreeStats s = degree_stats(g);
    RankVector rv = rank_vector(y);
    TestReport rep;
    rep.n = n;
    rep.q_hat = q_hat(rv, g);
    rep.t_hat = t_hat(rep.q_hat);
    rep.w_tilde = w_tilde(s, n);
    rep.w_n = w_n(s, n);
    rep.i_n = i_n(rep.t_hat - t_hat_null_mean(n), rep.w_n, n);
    rep.p_value = normal_sf(rep.i_n);
    rep.l_max = s.l_max;
    rep.f_n = s.f_n;
    rep.tie_count_x = g.tie_count;
    rep.tie_flag_y = rv.tie_flag;
    return rep;
}

inline TestReport independence_test(const FunctionalSample& x, std::span<const double> y,
                                    int threads = 0, DistanceOptions opt = {}) {
    if (x.n != y.size()) throw DimensionMismatch("sample and response sizes differ");
    if (x.n < 4) throw SampleTooSmall("independence test needs n >= 4");
    opt.threads = threads;
    DistanceMatrix dx = distance_matrix(x, opt);
    return independence_test(dx, y, threads);
}

}  // namespace fdep
