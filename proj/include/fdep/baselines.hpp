#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "fdep/core.hpp"
#include "fdep/dependence.hpp"
#include "fdep/errors.hpp"
#include "fdep/nn_graph.hpp"
#include "fdep/parallel.hpp"
#include "fdep/rng.hpp"

namespace fdep {

// ---------------------------------------------------------------------------
// Distance correlation (Szekely-type, V-statistic form): double-centered
// distance matrices A, B; R^2 = V2(X,Y) / sqrt(V2(X) V2(Y)). X enters via
// its distance matrix, Y via |y_i - y_j|. Returns 0 when either marginal
// distance variance is 0.
// ---------------------------------------------------------------------------
inline double distance_correlation(const DistanceMatrix& dx, std::span<const double> y) {
    const size_t n = dx.n;
    if (n != y.size()) throw DimensionMismatch("distance matrix and response sizes differ");
    if (n < 2) throw SampleTooSmall("distance correlation needs n >= 2");

    std::vector<double> arow(n, 0.0), brow(n, 0.0);
    double agrand = 0.0, bgrand = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double sa = 0.0, sb = 0.0;
        for (size_t j = 0; j < n; ++j) {
            sa += dx(i, j);
            sb += std::fabs(y[i] - y[j]);
        }
        arow[i] = sa / static_cast<double>(n);
        brow[i] = sb / static_cast<double>(n);
        agrand += sa;
        bgrand += sb;
    }
    agrand /= static_cast<double>(n) * static_cast<double>(n);
    bgrand /= static_cast<double>(n) * static_cast<double>(n);

    double vxy = 0.0, vx = 0.0, vy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            double a = dx(i, j) - arow[i] - arow[j] + agrand;
            double b = std::fabs(y[i] - y[j]) - brow[i] - brow[j] + bgrand;
            vxy += a * b;
            vx += a * a;
            vy += b * b;
        }
    }
    if (vx <= 0.0 || vy <= 0.0) return 0.0;
    double r2 = vxy / std::sqrt(vx * vy);
    if (r2 <= 0.0) return 0.0;
    return std::min(std::sqrt(r2), 1.0);
}

// ---------------------------------------------------------------------------
// Generic permutation test, permute-y scheme.
// p = (1 + #{b : stat(dx, y_b) >= stat(dx, y)}) / (B + 1), which is a valid
// p-value for any B >= 1. Each replicate permutes y with its own substream
// (seed, b), so the result is independent of worker count.
// ---------------------------------------------------------------------------
struct PermutationPlan {
    size_t B = 1000;
    uint64_t seed = 0;
    int threads = 0;
    std::string scheme = "permute-y";  // the only supported resampling scheme
};

using DistStat = std::function<double(const DistanceMatrix&, std::span<const double>)>;

inline double permutation_test(const DistStat& stat, const DistanceMatrix& dx,
                               std::span<const double> y, const PermutationPlan& plan) {
    if (plan.B < 1) throw DataError("permutation test needs B >= 1");
    if (plan.scheme != "permute-y")
        throw DataError("unsupported permutation scheme '" + plan.scheme + "'");
    const double observed = stat(dx, y);
    std::vector<uint8_t> exceeds(plan.B, 0);
    const int workers = resolve_threads(plan.threads);
    parallel_chunks(0, static_cast<int64_t>(plan.B), workers, 8, [&](int64_t lo, int64_t hi) {
        std::vector<double> yb(y.begin(), y.end());
        for (int64_t b = lo; b < hi; ++b) {
            std::copy(y.begin(), y.end(), yb.begin());
            auto rng = substream(plan.seed, static_cast<uint64_t>(b) + 1, 0x7065726dULL);
            shuffle_vector(yb, rng);
            exceeds[static_cast<size_t>(b)] = stat(dx, yb) >= observed;
        }
    });
    uint64_t count = 0;
    for (uint8_t e : exceeds) count += e;
    return static_cast<double>(1 + count) / static_cast<double>(plan.B + 1);
}

// ---------------------------------------------------------------------------
// Exhaustive permutation oracle. Enumerates all n! rank assignments on a
// fixed graph and returns the exact mean and variance of sqrt(n) * Q_hat.
// All moments are ratios of 64-bit integers for n <= 8 (the largest
// numerator is ~5e13), so the oracle is exact — no floating-point
// accumulation enters until the final division.
// ---------------------------------------------------------------------------
struct OracleMoments {
    double mean = 0.0;      // of sqrt(n) * Q_hat
    double variance = 0.0;  // of sqrt(n) * Q_hat
    size_t n = 0;
    // exact fractions (reduced): mean of Q_hat and variance of sqrt(n)*Q_hat
    int64_t q_mean_num = 0;
    int64_t q_mean_den = 1;
    int64_t var_num = 0;
    int64_t var_den = 1;
};

inline OracleMoments exhaustive_permutation_moments(const NNGraph& g) {
    const size_t n = g.n;
    if (n < 2) throw SampleTooSmall("oracle needs n >= 2");
    if (n > 8) throw TooLargeForOracle("exhaustive oracle supports n <= 8");

    std::vector<uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 1u);
    uint64_t m1 = 0, m2 = 0, n_perms = 0;
    do {
        uint64_t s = 0;
        for (size_t i = 0; i < n; ++i) s += std::min(perm[i], perm[g.nn[i]]);
        m1 += s;
        m2 += s * s;
        ++n_perms;
    } while (std::next_permutation(perm.begin(), perm.end()));

    // E[Q] = m1 / (n! n^2); Var(sqrt(n) Q) = (n! m2 - m1^2) / (n!^2 n^3)
    const int64_t nf = static_cast<int64_t>(n_perms);
    const int64_t n64 = static_cast<int64_t>(n);
    OracleMoments om;
    om.n = n;
    int64_t mean_num = static_cast<int64_t>(m1);
    int64_t mean_den = nf * n64 * n64;
    int64_t gm = std::gcd(mean_num, mean_den);
    om.q_mean_num = mean_num / gm;
    om.q_mean_den = mean_den / gm;
    int64_t var_num = nf * static_cast<int64_t>(m2) - static_cast<int64_t>(m1 * m1);
    int64_t var_den = nf * nf * n64 * n64 * n64;
    int64_t gv = std::gcd(var_num, var_den);
    if (gv > 0) {
        var_num /= gv;
        var_den /= gv;
    }
    om.var_num = var_num;
    om.var_den = var_den;
    om.mean = std::sqrt(static_cast<double>(n)) * static_cast<double>(om.q_mean_num) /
              static_cast<double>(om.q_mean_den);
    om.variance = static_cast<double>(var_num) / static_cast<double>(var_den);
    return om;
}

}  // namespace fdep
