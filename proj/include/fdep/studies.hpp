#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fdep/baselines.hpp"
#include "fdep/dependence.hpp"
#include "fdep/normal.hpp"
#include "fdep/simulation.hpp"
#include "fdep/stats.hpp"

namespace fdep {

// Simulation studies mirroring the degree-growth, null-distribution and
// power experiments. Replicate b always regenerates its data from the
// substreams (seed, b, tag), so reruns with the same StudyConfig are
// bit-identical and replicates can be evaluated in any order.

struct StudyConfig {
    size_t n = 100;
    size_t B = 500;
    uint64_t seed = 1;
    double alpha = 0.05;
    KLModel model{};
    int threads = 0;
};

// ---------------------------------------------------------------------------
// Null-distribution study: X from the KL model, Y ~ Uniform[0,1].
// ---------------------------------------------------------------------------
struct NullStudyResult {
    std::vector<double> t_hat;
    std::vector<double> i_n;
    std::vector<double> p_value;
    double ks_to_normal = 0.0;
    double mean_t = 0.0;
    double sd_t = 0.0;
    double mean_i = 0.0;
    double sd_i = 0.0;
    double reject_rate = 0.0;  // at the config's alpha
};

inline TestReport null_replicate(const StudyConfig& cfg, size_t b) {
    FunctionalSample x = kl_sample(cfg.model, cfg.n, cfg.seed, b);
    auto rng = substream(cfg.seed, b, 0x79ULL);
    std::vector<double> y(cfg.n);
    for (auto& v : y) v = uniform01(rng);
    return independence_test(x, y, 1);
}

inline NullStudyResult null_distribution_study(const StudyConfig& cfg) {
    NullStudyResult res;
    res.t_hat.resize(cfg.B);
    res.i_n.resize(cfg.B);
    res.p_value.resize(cfg.B);
    const double z_crit = normal_quantile(1.0 - cfg.alpha);
    parallel_chunks(0, static_cast<int64_t>(cfg.B), resolve_threads(cfg.threads), 1,
                    [&](int64_t lo, int64_t hi) {
                        for (int64_t b = lo; b < hi; ++b) {
                            TestReport rep = null_replicate(cfg, static_cast<size_t>(b));
                            res.t_hat[static_cast<size_t>(b)] = rep.t_hat;
                            res.i_n[static_cast<size_t>(b)] = rep.i_n;
                            res.p_value[static_cast<size_t>(b)] = rep.p_value;
                        }
                    });
    size_t rejections = 0;
    for (double v : res.i_n) rejections += v > z_crit;
    res.reject_rate = static_cast<double>(rejections) / static_cast<double>(cfg.B);
    res.ks_to_normal = ks_distance_to_normal(res.i_n);
    res.mean_t = mean_of(res.t_hat);
    res.sd_t = sd_of(res.t_hat);
    res.mean_i = mean_of(res.i_n);
    res.sd_i = sd_of(res.i_n);
    return res;
}

// ---------------------------------------------------------------------------
// Power study. For each response kind the noise scale is calibrated from
// the pooled n x B signals (one pass regenerating every replicate's X),
// then each (kind, r2) cell reuses the replicate's NN-graph statistics and
// only redraws ranks, so the B distance matrices are built once per kind.
// ---------------------------------------------------------------------------
struct PowerCell {
    ResponseKind kind = ResponseKind::ind;
    double r2 = 1.0;
    double reject_rate = 0.0;
    double mean_t = 0.0;
    double sd_t = 0.0;
    double dcor_reject_rate = -1.0;  // -1 when the permutation-dCor test is off
};

struct PowerStudyOptions {
    bool with_dcor = false;
    size_t dcor_B = 200;
};

struct PowerStudyResult {
    std::vector<PowerCell> cells;
};

namespace detail {

struct ReplicateGraph {
    DegreeStats stats;
    NNGraph graph;
    DistanceMatrix dist;  // kept only when dcor is requested
    std::vector<double> signals;
    std::vector<double> noise;  // standard normal draws, scaled per r2
};

}  // namespace detail

inline PowerStudyResult power_study(const StudyConfig& cfg, const std::vector<ResponseKind>& kinds,
                                    const std::vector<double>& r2_grid,
                                    PowerStudyOptions opt = {}) {
    PowerStudyResult out;
    const double z_crit = normal_quantile(1.0 - cfg.alpha);

    for (ResponseKind kind : kinds) {
        if (kind == ResponseKind::ind) {
            // size of the test; r2 plays no role
            NullStudyResult null_res = null_distribution_study(cfg);
            for (double r2 : r2_grid) {
                PowerCell cell;
                cell.kind = kind;
                cell.r2 = r2;
                cell.reject_rate = null_res.reject_rate;
                cell.mean_t = null_res.mean_t;
                cell.sd_t = null_res.sd_t;
                out.cells.push_back(cell);
            }
            continue;
        }

        // pass 1: pooled signals over all replicates
        std::vector<detail::ReplicateGraph> reps(cfg.B);
        std::vector<double> pooled;
        pooled.reserve(cfg.n * cfg.B);
        parallel_chunks(0, static_cast<int64_t>(cfg.B), resolve_threads(cfg.threads), 1,
                        [&](int64_t lo, int64_t hi) {
                            for (int64_t b = lo; b < hi; ++b) {
                                auto& rg = reps[static_cast<size_t>(b)];
                                FunctionalSample x =
                                    kl_sample(cfg.model, cfg.n, cfg.seed, static_cast<uint64_t>(b));
                                DistanceMatrix d = distance_matrix(x, {.threads = 1});
                                rg.graph = nearest_neighbor_graph(d, 1);
                                rg.stats = degree_stats(rg.graph);
                                rg.signals = signal_values(kind, x);
                                auto rng = substream(cfg.seed, static_cast<uint64_t>(b), 0x79ULL);
                                rg.noise.resize(cfg.n);
                                for (auto& v : rg.noise) v = normal01(rng);
                                if (opt.with_dcor) rg.dist = std::move(d);
                            }
                        });
        for (const auto& rg : reps)
            pooled.insert(pooled.end(), rg.signals.begin(), rg.signals.end());

        for (double r2 : r2_grid) {
            double sigma = calibrate_noise(pooled, r2);
            PowerCell cell;
            cell.kind = kind;
            cell.r2 = r2;
            std::vector<double> ts(cfg.B);
            size_t rejections = 0, dcor_rejections = 0;
            std::vector<double> y(cfg.n);
            for (size_t b = 0; b < cfg.B; ++b) {
                auto& rg = reps[b];
                for (size_t i = 0; i < cfg.n; ++i) y[i] = rg.signals[i] + sigma * rg.noise[i];
                RankVector rv = rank_vector(y);
                double q = q_hat(rv, rg.graph);
                double t = t_hat(q);
                double w = w_n(rg.stats, cfg.n);
                double stat = i_n(t - t_hat_null_mean(cfg.n), w, cfg.n);
                ts[b] = t;
                rejections += stat > z_crit;
                if (opt.with_dcor) {
                    PermutationPlan plan{opt.dcor_B, splitmix64(cfg.seed ^ (b + 1)), 1};
                    double p = permutation_test(
                        [](const DistanceMatrix& dm, std::span<const double> yy) {
                            return distance_correlation(dm, yy);
                        },
                        rg.dist, y, plan);
                    dcor_rejections += p <= cfg.alpha;
                }
            }
            cell.reject_rate = static_cast<double>(rejections) / static_cast<double>(cfg.B);
            cell.mean_t = mean_of(ts);
            cell.sd_t = sd_of(ts);
            if (opt.with_dcor)
                cell.dcor_reject_rate =
                    static_cast<double>(dcor_rejections) / static_cast<double>(cfg.B);
            out.cells.push_back(cell);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Degree-growth study on the spike model. One row per (n, seed replicate);
// the theorem bounds are hard assertions inside degree_bounds_check. The
// log-log slope of median L_n against n is reported but nothing beyond
// monotone growth should be asserted on it: the theoretical rates carry
// slowly varying factors.
// ---------------------------------------------------------------------------
struct DegreeStudyRow {
    size_t n = 0;
    uint64_t replicate = 0;
    uint64_t l_max = 0;
    uint64_t g_n = 0;
    std::vector<uint64_t> thresholds;
    std::vector<uint64_t> r_counts;
    std::vector<uint64_t> upper_bounds;
};

struct DegreeStudyResult {
    std::vector<DegreeStudyRow> rows;
    std::vector<size_t> sizes;
    std::vector<double> median_l;  // per size
    double loglog_slope = 0.0;
    bool medians_increasing = false;
};

inline std::vector<uint64_t> default_degree_thresholds(size_t n) {
    const double nd = static_cast<double>(n);
    return {static_cast<uint64_t>(std::ceil(std::cbrt(nd))),
            static_cast<uint64_t>(std::ceil(std::sqrt(nd))),
            static_cast<uint64_t>(std::ceil(std::pow(nd, 2.0 / 3.0)))};
}

inline DegreeStudyResult degree_growth_study(const std::vector<size_t>& sizes, size_t seeds,
                                             uint64_t seed, const LambdaSpec& lambda,
                                             int threads = 0) {
    DegreeStudyResult res;
    res.sizes = sizes;
    for (size_t n : sizes) {
        std::vector<double> ls;
        for (uint64_t rep = 0; rep < seeds; ++rep) {
            SpikeSample s = spike_sample(lambda, n, seed, (static_cast<uint64_t>(n) << 20) + rep);
            DegreeBoundsReport b = degree_bounds_check(s, default_degree_thresholds(n), threads);
            DegreeStudyRow row;
            row.n = n;
            row.replicate = rep;
            row.l_max = b.l_max;
            row.g_n = b.g_n;
            row.thresholds = b.thresholds;
            row.r_counts = b.r_counts;
            row.upper_bounds = b.upper_bounds;
            res.rows.push_back(std::move(row));
            ls.push_back(static_cast<double>(b.l_max));
        }
        res.median_l.push_back(median_of(ls));
    }
    res.medians_increasing = true;
    for (size_t i = 0; i + 1 < res.median_l.size(); ++i)
        if (!(res.median_l[i] < res.median_l[i + 1])) res.medians_increasing = false;
    if (sizes.size() >= 2) {
        std::vector<double> lx, ly;
        for (size_t i = 0; i < sizes.size(); ++i) {
            if (res.median_l[i] <= 0.0) continue;
            lx.push_back(std::log(static_cast<double>(sizes[i])));
            ly.push_back(std::log(res.median_l[i]));
        }
        if (lx.size() >= 2) res.loglog_slope = regression_slope(lx, ly);
    }
    return res;
}

}  // namespace fdep
