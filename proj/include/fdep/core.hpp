#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fdep/errors.hpp"
#include "fdep/parallel.hpp"

namespace fdep {

// ---------------------------------------------------------------------------
// Grid — shared abscissae of the discretized curves
// ---------------------------------------------------------------------------
struct Grid {
    std::vector<double> points;  // strictly increasing, length >= 2
    bool uniform = false;        // max/min consecutive spacing differ < 1e-9 relative

    Grid() = default;
    explicit Grid(std::vector<double> pts) : points(std::move(pts)) { validate(); }

    static Grid equidistant(size_t p, double a = 0.0, double b = 1.0) {
        if (p < 2) throw DataError("grid needs at least 2 points");
        std::vector<double> pts(p);
        for (size_t j = 0; j < p; ++j)
            pts[j] = a + (b - a) * static_cast<double>(j) / static_cast<double>(p - 1);
        pts[p - 1] = b;
        return Grid(std::move(pts));
    }

    size_t size() const { return points.size(); }

    // Trapezoidal quadrature weights on this grid.
    std::vector<double> trapezoid_weights() const {
        const size_t p = points.size();
        std::vector<double> w(p, 0.0);
        for (size_t j = 0; j + 1 < p; ++j) {
            double h = 0.5 * (points[j + 1] - points[j]);
            w[j] += h;
            w[j + 1] += h;
        }
        return w;
    }

private:
    void validate() {
        const size_t p = points.size();
        if (p < 2) throw DataError("grid needs at least 2 points");
        double min_h = points[1] - points[0];
        double max_h = min_h;
        for (size_t j = 0; j + 1 < p; ++j) {
            if (!std::isfinite(points[j])) throw NonFiniteValue(0, j);
            double h = points[j + 1] - points[j];
            if (!(h > 0.0)) throw DataError("grid points must be strictly increasing");
            min_h = h < min_h ? h : min_h;
            max_h = h > max_h ? h : max_h;
        }
        if (!std::isfinite(points[p - 1])) throw NonFiniteValue(0, p - 1);
        uniform = (max_h - min_h) < 1e-9 * max_h;
    }
};

using Curve = std::vector<double>;

// ---------------------------------------------------------------------------
// FunctionalSample — n curves discretized on one shared grid
// ---------------------------------------------------------------------------
struct FunctionalSample {
    Grid grid;
    size_t n = 0;
    size_t p = 0;
    std::vector<double> data;  // row-major n x p

    std::span<const double> row(size_t i) const { return {data.data() + i * p, p}; }
    std::span<double> row(size_t i) { return {data.data() + i * p, p}; }
};

// Validate and assemble a sample. Reports the first non-finite entry by
// (row, col), 0-based.
inline FunctionalSample build_sample(std::vector<double> matrix, size_t n, size_t p, Grid grid) {
    if (n < 1) throw SampleTooSmall("sample needs at least 1 curve");
    if (p != grid.size())
        throw DimensionMismatch("matrix has " + std::to_string(p) + " columns but grid has " +
                                std::to_string(grid.size()) + " points");
    if (matrix.size() != n * p) throw DimensionMismatch("matrix size does not match n*p");
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < p; ++j)
            if (!std::isfinite(matrix[i * p + j])) throw NonFiniteValue(i, j);
    FunctionalSample s;
    s.grid = std::move(grid);
    s.n = n;
    s.p = p;
    s.data = std::move(matrix);
    return s;
}

inline FunctionalSample build_sample(const std::vector<std::vector<double>>& rows, Grid grid) {
    if (rows.empty()) throw SampleTooSmall("sample needs at least 1 curve");
    const size_t p = grid.size();
    std::vector<double> flat;
    flat.reserve(rows.size() * p);
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != p)
            throw DimensionMismatch("row " + std::to_string(i) + " has " +
                                    std::to_string(rows[i].size()) + " values, expected " +
                                    std::to_string(p));
        flat.insert(flat.end(), rows[i].begin(), rows[i].end());
    }
    return build_sample(std::move(flat), rows.size(), p, std::move(grid));
}

// ---------------------------------------------------------------------------
// L2 distance between two curves: sqrt( sum_j w_j (a_j - b_j)^2 ) with
// trapezoidal weights w from the grid. On a uniform grid this is a positive
// rescaling of the Euclidean vector distance; since every downstream
// quantity is a functional of the nearest-neighbor graph, which is invariant
// under strictly increasing transforms of the metric, the quadrature choice
// does not affect the coefficient or the test.
// ---------------------------------------------------------------------------
inline double l2_distance(std::span<const double> a, std::span<const double> b,
                          const Grid& grid) {
    if (a.size() != b.size() || a.size() != grid.size())
        throw DimensionMismatch("curve lengths and grid length must agree");
    const auto w = grid.trapezoid_weights();
    double s = 0.0;
    for (size_t j = 0; j < a.size(); ++j) {
        double d = a[j] - b[j];
        s += w[j] * d * d;
    }
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// DistanceMatrix — full symmetric pairwise distances, zero diagonal
// ---------------------------------------------------------------------------
struct DistanceMatrix {
    size_t n = 0;
    std::vector<double> d;  // row-major n x n

    DistanceMatrix() = default;
    explicit DistanceMatrix(size_t n_) : n(n_), d(n_ * n_, 0.0) {}

    double operator()(size_t i, size_t j) const { return d[i * n + j]; }
    double& operator()(size_t i, size_t j) { return d[i * n + j]; }
    std::span<const double> row(size_t i) const { return {d.data() + i * n, n}; }
};

struct DistanceOptions {
    size_t max_n = 50000;  // refuse to materialize beyond this (O(n^2) memory)
    int threads = 0;       // 0 = resolve from FDEP_THREADS / hardware
};

namespace detail {

// sum_k w_k (a_k - b_k)^2 over eight independent accumulator lanes folded
// in a fixed tree. The order is a function of p alone, so every matrix
// entry is reproducible for any thread count or chunking; the lanes break
// the additive dependence chain and let the loop vectorize.
inline double weighted_sq_dist(const double* a, const double* b, const double* w, size_t p) {
    double acc[8] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    size_t k = 0;
    for (; k + 8 <= p; k += 8)
        for (size_t l = 0; l < 8; ++l) {
            double diff = a[k + l] - b[k + l];
            acc[l] += w[k + l] * diff * diff;
        }
    double tail = 0.0;
    for (; k < p; ++k) {
        double diff = a[k] - b[k];
        tail += w[k] * diff * diff;
    }
    return ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) +
           tail;
}

}  // namespace detail

// Materialize all pairwise L2 distances. Each unordered pair is computed
// once by a fixed-order summation over grid points, then mirrored, so the
// result is bit-identical for any thread count or chunking.
inline DistanceMatrix distance_matrix(const FunctionalSample& s, DistanceOptions opt = {}) {
    if (s.n < 2) throw SampleTooSmall("distance matrix needs n >= 2");
    if (s.n > opt.max_n)
        throw SampleTooLarge("n=" + std::to_string(s.n) + " exceeds the distance-matrix cap " +
                             std::to_string(opt.max_n));
    const size_t n = s.n;
    const size_t p = s.p;
    const std::vector<double> w = s.grid.trapezoid_weights();
    DistanceMatrix m(n);
    const double* data = s.data.data();
    double* out = m.d.data();
    const int threads = resolve_threads(opt.threads);

    parallel_chunks(0, static_cast<int64_t>(n), threads, 8, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) {
            const double* xi = data + static_cast<size_t>(i) * p;
            for (size_t j = static_cast<size_t>(i) + 1; j < n; ++j) {
                const double* xj = data + j * p;
                double dist = std::sqrt(detail::weighted_sq_dist(xi, xj, w.data(), p));
                out[static_cast<size_t>(i) * n + j] = dist;
                out[j * n + static_cast<size_t>(i)] = dist;
            }
        }
    });
    return m;
}

}  // namespace fdep
