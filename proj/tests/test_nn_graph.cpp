#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fdep/core.hpp"
#include "fdep/nn_graph.hpp"
#include "fdep/rng.hpp"

using namespace fdep;

namespace {

DistanceMatrix from_points(const std::vector<double>& pts) {
    DistanceMatrix d(pts.size());
    for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = 0; j < pts.size(); ++j) d(i, j) = std::fabs(pts[i] - pts[j]);
    return d;
}

// Brute-force scan with the explicit tie rule, kept independent of the
// library implementation.
std::vector<uint32_t> reference_nn(const DistanceMatrix& d) {
    std::vector<uint32_t> nn(d.n);
    for (size_t i = 0; i < d.n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        size_t arg = 0;
        for (size_t j = 0; j < d.n; ++j) {
            if (j == i) continue;
            if (d(i, j) < best) {
                best = d(i, j);
                arg = j;
            }
        }
        nn[i] = static_cast<uint32_t>(arg);
    }
    return nn;
}

DistanceMatrix random_euclidean(size_t n, size_t dim, uint64_t seed) {
    auto rng = substream(seed, 0, 0);
    std::vector<double> pts(n * dim);
    for (auto& v : pts) v = normal01(rng);
    DistanceMatrix d(n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (size_t k = 0; k < dim; ++k) {
                double diff = pts[i * dim + k] - pts[j * dim + k];
                s += diff * diff;
            }
            d(i, j) = d(j, i) = std::sqrt(s);
        }
    return d;
}

}  // namespace

TEST_CASE("line geometry 0,1,3") {
    auto g = nearest_neighbor_graph(from_points({0, 1, 3}));
    CHECK(g.nn == std::vector<uint32_t>{1, 0, 1});
    CHECK(g.tie_count == 0);
    auto s = degree_stats(g);
    CHECK(s.in_degree == std::vector<uint32_t>{1, 2, 0});
    CHECK(s.l_max == 2);
    CHECK(s.sum_sq == 5);
    CHECK(s.f_n == 2);
}

TEST_CASE("line geometry 0,1,3,7") {
    auto g = nearest_neighbor_graph(from_points({0, 1, 3, 7}));
    CHECK(g.nn == std::vector<uint32_t>{1, 0, 1, 2});
    auto s = degree_stats(g);
    CHECK(s.in_degree == std::vector<uint32_t>{1, 2, 1, 0});
    CHECK(s.sum_sq == 6);
    CHECK(s.f_n == 2);
}

TEST_CASE("orthonormal star: one hub collects every edge") {
    // x1 = 0 plus orthonormal x2..xn: d(x1, xk) = 1, d(xk, xl) = sqrt(2)
    const size_t n = 40;
    DistanceMatrix d(n);
    for (size_t i = 1; i < n; ++i) {
        d(0, i) = d(i, 0) = 1.0;
        for (size_t j = i + 1; j < n; ++j) d(i, j) = d(j, i) = std::sqrt(2.0);
    }
    auto g = nearest_neighbor_graph(d);
    for (size_t i = 1; i < n; ++i) CHECK(g.nn[i] == 0);
    CHECK(g.nn[0] == 1);  // all candidates tie at 1, smallest index wins
    CHECK(g.tie_count >= 1);
    auto s = degree_stats(g);
    CHECK(s.l_max == n - 1);
    // only the hub and its own nearest neighbor are mutual
    CHECK(s.f_n == 2);
}

TEST_CASE("matches brute-force oracle on random 200-point samples") {
    for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        auto d = random_euclidean(200, 5, seed);
        auto g = nearest_neighbor_graph(d);
        CHECK(g.nn == reference_nn(d));
        CHECK(g.tie_count == 0);
    }
}

TEST_CASE("tie-break picks the smallest index and counts ties") {
    auto g = nearest_neighbor_graph(from_points({0.0, 1.0, 2.0}));
    // point 1 is equidistant from 0 and 2
    CHECK(g.nn[1] == 0);
    CHECK(g.tie_count == 1);
}

TEST_CASE("preconditions") {
    CHECK_THROWS_AS(nearest_neighbor_graph(DistanceMatrix(1)), SampleTooSmall);
}

TEST_CASE("degree sum and reciprocal-pair properties") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
        auto d = random_euclidean(60, 3, 100 + seed);
        auto g = nearest_neighbor_graph(d);
        auto s = degree_stats(g);
        uint64_t total = 0;
        for (auto v : s.in_degree) total += v;
        CHECK(total == g.n);
        CHECK(s.f_n % 2 == 0);
        CHECK(s.f_n >= 2);  // distances a.s. distinct: closest pair is mutual
        CHECK(s.sum_sq >= g.n);
    }
}

TEST_CASE("graph is invariant under strictly increasing distance transforms") {
    auto d = random_euclidean(80, 4, 5);
    auto g0 = nearest_neighbor_graph(d);

    DistanceMatrix sq(d.n), lg(d.n);
    for (size_t i = 0; i < d.n; ++i)
        for (size_t j = 0; j < d.n; ++j) {
            sq(i, j) = d(i, j) * d(i, j);
            lg(i, j) = std::log1p(d(i, j));
        }
    CHECK(nearest_neighbor_graph(sq).nn == g0.nn);
    CHECK(nearest_neighbor_graph(lg).nn == g0.nn);
}

TEST_CASE("permutation equivariance") {
    auto d = random_euclidean(30, 3, 9);
    auto g0 = nearest_neighbor_graph(d);
    // relabel points by the permutation perm (new index of old i is perm[i])
    std::vector<size_t> perm(d.n);
    std::iota(perm.begin(), perm.end(), size_t{0});
    auto rng = substream(13, 0, 0);
    shuffle_vector(perm, rng);
    DistanceMatrix dp(d.n);
    for (size_t i = 0; i < d.n; ++i)
        for (size_t j = 0; j < d.n; ++j) dp(perm[i], perm[j]) = d(i, j);
    auto gp = nearest_neighbor_graph(dp);
    for (size_t i = 0; i < d.n; ++i) CHECK(gp.nn[perm[i]] == perm[g0.nn[i]]);
}

TEST_CASE("nn graph is independent of thread count") {
    auto d = random_euclidean(150, 4, 21);
    auto g1 = nearest_neighbor_graph(d, 1);
    auto g4 = nearest_neighbor_graph(d, 4);
    CHECK(g1.nn == g4.nn);
    CHECK(g1.tie_count == g4.tie_count);
}
