#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fdep/baselines.hpp"
#include "fdep/core.hpp"
#include "fdep/dependence.hpp"
#include "fdep/nn_graph.hpp"
#include "fdep/rng.hpp"
#include "fdep/simulation.hpp"

using namespace fdep;

namespace {

NNGraph graph_from_points(const std::vector<double>& pts) {
    DistanceMatrix d(pts.size());
    for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = 0; j < pts.size(); ++j) d(i, j) = std::fabs(pts[i] - pts[j]);
    return nearest_neighbor_graph(d);
}

NNGraph random_graph(size_t n, uint64_t seed) {
    auto rng = substream(seed, 0, 0);
    std::vector<double> pts(n);
    for (auto& v : pts) v = normal01(rng);
    return graph_from_points(pts);
}

}  // namespace

TEST_CASE("rank vector basics") {
    auto rv = rank_vector(std::vector<double>{10.0, -1.0, 5.0});
    CHECK(rv.r == std::vector<uint32_t>{3, 1, 2});
    CHECK_FALSE(rv.tie_flag);

    auto tied = rank_vector(std::vector<double>{2.0, 2.0, 1.0});
    CHECK(tied.r == std::vector<uint32_t>{3, 3, 1});
    CHECK(tied.tie_flag);

    std::vector<double> sorted(20);
    for (size_t i = 0; i < sorted.size(); ++i) sorted[i] = 0.5 * static_cast<double>(i);
    auto rs = rank_vector(sorted);
    for (size_t i = 0; i < sorted.size(); ++i) CHECK(rs.r[i] == i + 1);

    CHECK_THROWS_AS(rank_vector(std::vector<double>{1.0, std::nan("")}), NonFiniteValue);
}

TEST_CASE("q_hat hand cases") {
    NNGraph g;
    g.n = 3;
    g.nn = {1, 0, 1};
    RankVector rv;
    rv.r = {1, 2, 3};
    CHECK(q_hat(rv, g) == Catch::Approx(4.0 / 9.0).margin(1e-16));

    // chain: ranks 1..n, nn[0]=1, nn[i]=i-1 otherwise
    for (size_t n : {5ul, 9ul, 16ul}) {
        NNGraph chain;
        chain.n = n;
        chain.nn.resize(n);
        chain.nn[0] = 1;
        for (size_t i = 1; i < n; ++i) chain.nn[i] = static_cast<uint32_t>(i - 1);
        RankVector ranks;
        ranks.r.resize(n);
        for (size_t i = 0; i < n; ++i) ranks.r[i] = static_cast<uint32_t>(i + 1);
        double expect = (1.0 + 0.5 * static_cast<double>(n) * static_cast<double>(n - 1)) /
                        (static_cast<double>(n) * static_cast<double>(n));
        CHECK(q_hat(ranks, chain) == Catch::Approx(expect).margin(1e-15));
    }

    RankVector bad;
    bad.r = {1, 2};
    CHECK_THROWS_AS(q_hat(bad, g), DimensionMismatch);
}

TEST_CASE("q_hat null expectation over all permutations is (n+1)/(3n)") {
    for (size_t n : {4ul, 5ul, 6ul}) {
        for (uint64_t seed = 0; seed < 4; ++seed) {
            auto g = random_graph(n, 100 * n + seed);
            auto om = exhaustive_permutation_moments(g);
            // exact rational identity: q_mean == (n+1)/(3n)
            CHECK(om.q_mean_num * static_cast<int64_t>(3 * n) ==
                  static_cast<int64_t>(n + 1) * om.q_mean_den);
        }
    }
}

TEST_CASE("t_hat is the affine map 6q - 2") {
    CHECK(t_hat(1.0 / 3.0) == Catch::Approx(0.0).margin(1e-15));
    CHECK(t_hat(4.0 / 9.0) == Catch::Approx(2.0 / 3.0).margin(1e-15));
    for (size_t n : {4ul, 10ul, 100ul}) {
        double q = static_cast<double>(n + 1) / (3.0 * static_cast<double>(n));
        CHECK(t_hat(q) == Catch::Approx(2.0 / static_cast<double>(n)).margin(1e-14));
        CHECK(t_hat_null_mean(n) == 2.0 / static_cast<double>(n));
    }
}

TEST_CASE("w_tilde plug-in cases and lower bound") {
    // perfect matching on n=6: three mutual pairs
    auto g = graph_from_points({0.0, 0.1, 10.0, 10.1, 20.0, 20.1});
    auto s = degree_stats(g);
    CHECK(s.f_n == 6);
    CHECK(s.sum_sq == 6);
    CHECK(w_tilde(s, 6) == Catch::Approx(1.0 / 9.0).margin(1e-15));

    auto line = degree_stats(graph_from_points({0, 1, 3, 7}));
    CHECK(w_tilde(line, 4) == Catch::Approx(7.0 / 60.0).margin(1e-15));

    size_t sharper_violations = 0;
    for (uint64_t seed = 0; seed < 200; ++seed) {
        size_t n = 4 + seed % 40;
        auto stats = degree_stats(random_graph(n, 999 + seed));
        double wt = w_tilde(stats, n);
        CHECK(wt > 4.0 / 45.0);
        if (wt < 0.1) ++sharper_violations;  // the proof actually gives >= 1/10
    }
    INFO("graphs below the sharper 1/10 bound: " << sharper_violations);
    CHECK(sharper_violations == 0);
}

TEST_CASE("w_n confirmed by the exhaustive permutation oracle") {
    // line 0,1,3,7: v0 = -1/36, v1 = -1/576, v2 = 5/144, W_n = 25/1152
    auto line_graph = graph_from_points({0, 1, 3, 7});
    auto line = degree_stats(line_graph);
    CHECK(w_n(line, 4) == Catch::Approx(25.0 / 1152.0).margin(1e-16));
    auto om = exhaustive_permutation_moments(line_graph);
    CHECK(om.var_num == 25);
    CHECK(om.var_den == 1152);

    // perfect matching on n=4: W_n = (8 v2 + 8 v0)/4 = 1/72
    auto match_graph = graph_from_points({0.0, 0.1, 10.0, 10.1});
    auto match = degree_stats(match_graph);
    CHECK(match.f_n == 4);
    CHECK(w_n(match, 4) == Catch::Approx(1.0 / 72.0).margin(1e-16));
    auto om2 = exhaustive_permutation_moments(match_graph);
    CHECK(om2.variance == Catch::Approx(1.0 / 72.0).margin(1e-15));

    // random graphs n in {4,5,6}: formula equals the n!-enumeration
    for (size_t n : {4ul, 5ul, 6ul}) {
        for (uint64_t seed = 0; seed < 6; ++seed) {
            auto g = random_graph(n, 7000 + 10 * n + seed);
            auto moments = exhaustive_permutation_moments(g);
            double formula = w_n(degree_stats(g), n);
            CHECK(moments.variance == Catch::Approx(formula).epsilon(1e-10));
        }
    }

    CHECK_THROWS_AS(w_n(line, 3), SampleTooSmall);
}

TEST_CASE("w_n approaches w_tilde - 4/45 for bounded degrees") {
    // perfect matching at growing n keeps L_i = 1
    for (size_t half : {500ul, 5000ul}) {
        size_t n = 2 * half;
        DegreeStats s;
        s.in_degree.assign(n, 1);
        s.l_max = 1;
        s.sum_sq = n;
        s.f_n = n;
        double ratio = w_n(s, n) / (w_tilde(s, n) - 4.0 / 45.0);
        CHECK(std::fabs(ratio - 1.0) < 10.0 / static_cast<double>(n));
    }
}

TEST_CASE("i_n arithmetic contract") {
    CHECK(i_n(0.0, 0.5, 50) == 0.0);
    for (double w : {0.02, 0.11, 1.7}) {
        CHECK(i_n(0.31, w, 100) == Catch::Approx(std::sqrt(100.0 / (36.0 * w)) * 0.31));
        double null_t = t_hat_null_mean(100);
        CHECK(i_n(null_t, w, 100) > 0.0);
        CHECK(i_n(null_t, w, 100) < 1.0);  // O(n^{-1/2}) magnitude
    }
    CHECK_THROWS_AS(i_n(0.1, 0.0, 10), NonpositiveVariance);
    CHECK_THROWS_AS(i_n(0.1, -2.0, 10), NonpositiveVariance);
}

TEST_CASE("independence test end-to-end on the n=4 line") {
    auto x = build_sample({0, 0, 1, 1, 3, 3, 7, 7}, 4, 2, Grid::equidistant(2));
    std::vector<double> y{10, 20, 30, 40};
    auto rep = independence_test(x, y);
    CHECK(rep.n == 4);
    CHECK(rep.q_hat == Catch::Approx(7.0 / 16.0).margin(1e-16));
    CHECK(rep.t_hat == Catch::Approx(0.625).margin(1e-15));
    CHECK(rep.w_tilde == Catch::Approx(7.0 / 60.0).margin(1e-15));
    CHECK(rep.w_n == Catch::Approx(25.0 / 1152.0).margin(1e-15));
    CHECK(rep.l_max == 2);
    CHECK(rep.f_n == 2);
    // centered statistic and its p-value
    CHECK(rep.i_n == Catch::Approx(i_n(rep.t_hat - 0.5, rep.w_n, 4)).margin(1e-15));
    CHECK(rep.p_value == Catch::Approx(normal_sf(rep.i_n)).margin(1e-15));
}

TEST_CASE("independence test preconditions") {
    auto x = build_sample({0, 0, 1, 1, 3, 3}, 3, 2, Grid::equidistant(2));
    std::vector<double> y{1, 2, 3};
    CHECK_THROWS_AS(independence_test(x, y), SampleTooSmall);
    std::vector<double> wrong{1, 2, 3, 4};
    CHECK_THROWS_AS(independence_test(x, wrong), DimensionMismatch);
}

TEST_CASE("a noiseless functional relation is detected decisively") {
    KLModel model;
    auto x = kl_sample(model, 1000, 4242);
    // response = leading principal score via quadrature projection
    auto w = x.grid.trapezoid_weights();
    std::vector<double> y(x.n, 0.0);
    for (size_t i = 0; i < x.n; ++i) {
        auto xi = x.row(i);
        double s = 0.0;
        for (size_t j = 0; j < x.p; ++j) s += w[j] * xi[j] * sine_basis(1, x.grid.points[j]);
        y[i] = s;
    }
    auto rep = independence_test(x, y);
    CHECK(rep.p_value < 1e-6);
    CHECK(rep.t_hat > 0.5);
}

TEST_CASE("t_hat stays inside (-2, 1 + 3/n]") {
    for (uint64_t seed = 0; seed < 50; ++seed) {
        size_t n = 4 + seed % 30;
        auto g = random_graph(n, 31000 + seed);
        auto rng = substream(seed, 1, 0);
        std::vector<double> y(n);
        for (auto& v : y) v = normal01(rng);
        double t = t_hat(q_hat(rank_vector(y), g));
        CHECK(t > -2.0);
        CHECK(t <= 1.0 + 3.0 / static_cast<double>(n) + 1e-12);
    }
}

TEST_CASE("coefficient is invariant under monotone transforms") {
    auto rng = substream(99, 0, 0);
    const size_t n = 60;
    std::vector<double> pts(n), y(n);
    for (auto& v : pts) v = normal01(rng);
    for (auto& v : y) v = normal01(rng);
    auto g = graph_from_points(pts);
    double t0 = t_hat(q_hat(rank_vector(y), g));

    // strictly increasing transforms of y preserve ranks, hence t_hat exactly
    std::vector<double> y_exp(n), y_cub(n);
    for (size_t i = 0; i < n; ++i) {
        y_exp[i] = std::exp(y[i]);
        y_cub[i] = y[i] * y[i] * y[i];
    }
    CHECK(t_hat(q_hat(rank_vector(y_exp), g)) == t0);
    CHECK(t_hat(q_hat(rank_vector(y_cub), g)) == t0);

    // strictly increasing transforms of the metric preserve the graph
    DistanceMatrix d(n), dsq(n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            d(i, j) = std::fabs(pts[i] - pts[j]);
            dsq(i, j) = d(i, j) * d(i, j);
        }
    auto rep1 = independence_test(d, y);
    auto rep2 = independence_test(dsq, y);
    CHECK(rep1.t_hat == rep2.t_hat);
    CHECK(rep1.i_n == rep2.i_n);
}
