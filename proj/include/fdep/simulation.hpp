#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "fdep/core.hpp"
#include "fdep/errors.hpp"
#include "fdep/nn_graph.hpp"
#include "fdep/parallel.hpp"
#include "fdep/rng.hpp"

namespace fdep {

// ---------------------------------------------------------------------------
// KLModel — truncated Karhunen-Loeve expansion with the sine system
// e_k(u) = sqrt(2) sin((k - 1/2) pi u) and Var(Z_k) = decay^k on a uniform
// grid of p points over [0,1].
// ---------------------------------------------------------------------------
struct KLModel {
    size_t K = 20;
    double decay = 0.3;
    size_t p = 200;
};

inline double sine_basis(size_t k, double u) {
    // k is 1-based
    return std::numbers::sqrt2 * std::sin((static_cast<double>(k) - 0.5) * std::numbers::pi * u);
}

inline FunctionalSample kl_sample(const KLModel& m, size_t n, uint64_t seed,
                                  uint64_t replicate = 0) {
    if (m.K < 1) throw DataError("KL model needs K >= 1");
    if (!(m.decay >= 0.0)) throw DataError("KL decay must be nonnegative");
    Grid grid = Grid::equidistant(m.p);
    std::vector<double> sd(m.K);
    for (size_t k = 0; k < m.K; ++k)
        sd[k] = std::sqrt(std::pow(m.decay, static_cast<double>(k + 1)));
    // basis matrix, K x p
    std::vector<double> basis(m.K * m.p);
    for (size_t k = 0; k < m.K; ++k)
        for (size_t j = 0; j < m.p; ++j) basis[k * m.p + j] = sine_basis(k + 1, grid.points[j]);

    auto rng = substream(seed, replicate, 0x6b6cULL);
    std::vector<double> data(n * m.p, 0.0);
    std::vector<double> z(m.K);
    for (size_t i = 0; i < n; ++i) {
        for (size_t k = 0; k < m.K; ++k) z[k] = sd[k] * normal01(rng);
        double* xi = data.data() + i * m.p;
        for (size_t k = 0; k < m.K; ++k) {
            const double zk = z[k];
            if (zk == 0.0) continue;
            const double* ek = basis.data() + k * m.p;
            for (size_t j = 0; j < m.p; ++j) xi[j] += zk * ek[j];
        }
    }
    return build_sample(std::move(data), n, m.p, std::move(grid));
}

// ---------------------------------------------------------------------------
// Spike model X = A * e_K: continuous amplitude A ~ N(0, sigma^2) with
// sigma^2 = sum_k lambda_k, and independent basis index K with
// P(K = k) = lambda_k / sigma^2. Pairwise distances have the closed form
// ||X_i - X_j||^2 = A_i^2 + A_j^2 - 2 A_i A_j 1{K_i = K_j}, so curves are
// never materialized.
// ---------------------------------------------------------------------------
struct LambdaSpec {
    // Either an explicit finite eigenvalue vector, or the power law
    // lambda_k = k^(-a) (a > 1) truncated where the tail mass drops below
    // tail_tol of the total, then renormalized.
    std::vector<double> weights;  // used when non-empty
    double a = 2.0;
    double tail_tol = 1e-12;
};

namespace detail {

// Tail T(k) = sum_{j > k} j^(-a) by Euler-Maclaurin; relative error below
// 1e-14 for k >= 16 and a in (1, 8].
inline double power_tail(double k, double a) {
    double k1 = k + 1.0;  // sum_{j>=k1} j^-a = k1^{1-a}/(a-1) + k1^{-a}/2 + a k1^{-a-1}/12 - ...
    double t = std::pow(k1, 1.0 - a) / (a - 1.0);
    t += 0.5 * std::pow(k1, -a);
    t += (a / 12.0) * std::pow(k1, -a - 1.0);
    t -= (a * (a + 1.0) * (a + 2.0) / 720.0) * std::pow(k1, -a - 3.0);
    return t;
}

struct PowerLawTable {
    double a = 2.0;
    double total = 0.0;      // zeta(a)
    double k_trunc = 0.0;    // smallest k with tail(k) < tail_tol * total
    std::vector<double> prefix_cdf;  // prefix sums of k^-a, k = 1..window

    explicit PowerLawTable(double a_, double tail_tol) : a(a_) {
        if (!(a > 1.0)) throw DataError("power-law decay needs a > 1");
        const size_t window = 4096;
        prefix_cdf.resize(window);
        double acc = 0.0;
        for (size_t k = 1; k <= window; ++k) {
            acc += std::pow(static_cast<double>(k), -a);
            prefix_cdf[k - 1] = acc;
        }
        total = acc + power_tail(static_cast<double>(window), a);
        // solve tail(k) = tail_tol * total for the truncation point
        k_trunc = std::pow(tail_tol * total * (a - 1.0), 1.0 / (1.0 - a));
        if (k_trunc < static_cast<double>(window)) k_trunc = static_cast<double>(window);
    }

    // inverse CDF of the truncated-renormalized law
    uint64_t sample_index(double u01) const {
        const double s_trunc = total - power_tail(k_trunc, a);
        const double target = u01 * s_trunc;
        if (target <= prefix_cdf.back()) {
            auto it = std::lower_bound(prefix_cdf.begin(), prefix_cdf.end(), target);
            return static_cast<uint64_t>(it - prefix_cdf.begin()) + 1;
        }
        // bisect for the smallest k with total - tail(k) >= target; the
        // predicate is false at lo and true at hi throughout
        uint64_t lo = prefix_cdf.size();
        uint64_t hi = static_cast<uint64_t>(k_trunc);
        while (hi - lo > 1) {
            uint64_t mid = lo + (hi - lo) / 2;
            if (total - power_tail(static_cast<double>(mid), a) >= target)
                hi = mid;
            else
                lo = mid;
        }
        return hi;
    }
};

}  // namespace detail

struct SpikeSample {
    std::vector<double> a;    // amplitudes A_i
    std::vector<uint64_t> k;  // basis indices K_i (1-based)
    double sigma_sq = 0.0;    // sum of eigenvalues
};

inline SpikeSample spike_sample(const LambdaSpec& spec, size_t n, uint64_t seed,
                                uint64_t replicate = 0) {
    SpikeSample s;
    s.a.resize(n);
    s.k.resize(n);
    auto rng = substream(seed, replicate, 0x73706bULL);

    if (!spec.weights.empty()) {
        double total = 0.0;
        for (double w : spec.weights) {
            if (!(w >= 0.0)) throw DataError("eigenvalues must be nonnegative");
            total += w;
        }
        if (!(total > 0.0)) throw DataError("eigenvalues must not all be zero");
        s.sigma_sq = total;
        std::vector<double> cdf(spec.weights.size());
        double acc = 0.0;
        for (size_t j = 0; j < spec.weights.size(); ++j) {
            acc += spec.weights[j];
            cdf[j] = acc;
        }
        const double sigma = std::sqrt(total);
        for (size_t i = 0; i < n; ++i) {
            s.a[i] = sigma * normal01(rng);
            double target = uniform01(rng) * total;
            auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
            s.k[i] = static_cast<uint64_t>(it - cdf.begin()) + 1;
        }
        return s;
    }

    detail::PowerLawTable table(spec.a, spec.tail_tol);
    s.sigma_sq = table.total;
    const double sigma = std::sqrt(table.total);
    for (size_t i = 0; i < n; ++i) {
        s.a[i] = sigma * normal01(rng);
        s.k[i] = table.sample_index(uniform01(rng));
    }
    return s;
}

// Closed-form pairwise distances of a spike sample.
inline DistanceMatrix spike_distance_matrix(const SpikeSample& s, int threads = 0,
                                            size_t max_n = 50000) {
    const size_t n = s.a.size();
    if (n < 2) throw SampleTooSmall("distance matrix needs n >= 2");
    if (n > max_n)
        throw SampleTooLarge("n=" + std::to_string(n) + " exceeds the distance-matrix cap " +
                             std::to_string(max_n));
    DistanceMatrix m(n);
    double* out = m.d.data();
    const double* amp = s.a.data();
    const uint64_t* idx = s.k.data();
    const int workers = resolve_threads(threads);
    parallel_chunks(0, static_cast<int64_t>(n), workers, 16, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) {
            const double ai = amp[i];
            const uint64_t ki = idx[i];
            for (size_t j = static_cast<size_t>(i) + 1; j < n; ++j) {
                double dist = (ki == idx[j]) ? std::fabs(ai - amp[j])
                                             : std::sqrt(ai * ai + amp[j] * amp[j]);
                out[static_cast<size_t>(i) * n + j] = dist;
                out[j * n + static_cast<size_t>(i)] = dist;
            }
        }
    });
    return m;
}

// ---------------------------------------------------------------------------
// Degree-growth bound check. G_n = #{k : exactly one i has K_i = k} gives
// the lower bound L_n >= G_n - 1; for each threshold x, with
// |R_x| = #{i : K_i >= x}, the upper bound L_n <= 2 + 2x + |R_x| holds.
// Both are theorems for the spike construction, so a violation signals an
// implementation bug, not bad data.
// ---------------------------------------------------------------------------
struct DegreeBoundsReport {
    size_t n = 0;
    uint64_t l_max = 0;
    uint64_t g_n = 0;
    std::vector<uint64_t> thresholds;
    std::vector<uint64_t> r_counts;     // |R_x| per threshold
    std::vector<uint64_t> upper_bounds; // 2 + 2x + |R_x|
};

inline DegreeBoundsReport degree_bounds_check(const SpikeSample& s,
                                              const std::vector<uint64_t>& thresholds,
                                              int threads = 0, size_t max_n = 50000) {
    DegreeBoundsReport rep;
    rep.n = s.a.size();
    DistanceMatrix d = spike_distance_matrix(s, threads, max_n);
    NNGraph g = nearest_neighbor_graph(d, threads);
    DegreeStats stats = degree_stats(g);
    rep.l_max = stats.l_max;

    std::vector<uint64_t> sorted_k(s.k);
    std::sort(sorted_k.begin(), sorted_k.end());
    for (size_t i = 0; i < sorted_k.size();) {
        size_t j = i;
        while (j < sorted_k.size() && sorted_k[j] == sorted_k[i]) ++j;
        if (j - i == 1) ++rep.g_n;
        i = j;
    }
    if (rep.g_n >= 1 && rep.l_max + 1 < rep.g_n)
        throw BoundViolation("L_n >= G_n - 1 violated: L_n=" + std::to_string(rep.l_max) +
                             " G_n=" + std::to_string(rep.g_n));

    rep.thresholds = thresholds;
    for (uint64_t x : thresholds) {
        uint64_t r = 0;
        for (uint64_t ki : s.k) r += ki >= x;
        rep.r_counts.push_back(r);
        uint64_t bound = 2 + 2 * x + r;
        rep.upper_bounds.push_back(bound);
        if (rep.l_max > bound)
            throw BoundViolation("L_n <= 2 + 2x + |R_x| violated at x=" + std::to_string(x) +
                                 ": L_n=" + std::to_string(rep.l_max) +
                                 " bound=" + std::to_string(bound));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Response models y = f(X) + eps. "ind" draws y ~ Uniform[0,1] independent
// of X. Integrals use trapezoidal quadrature on the sample's grid; max and
// range are taken over grid values; eval uses the grid point nearest to
// u = 0.5, breaking the equidistant tie toward the right neighbor.
// ---------------------------------------------------------------------------
enum class ResponseKind { ind, integral, sqnorm, weight, sine, max, range, eval };

inline ResponseKind response_kind_from_string(const std::string& s) {
    if (s == "ind") return ResponseKind::ind;
    if (s == "int") return ResponseKind::integral;
    if (s == "sqnorm") return ResponseKind::sqnorm;
    if (s == "weight") return ResponseKind::weight;
    if (s == "sin") return ResponseKind::sine;
    if (s == "max") return ResponseKind::max;
    if (s == "range") return ResponseKind::range;
    if (s == "eval") return ResponseKind::eval;
    throw UnknownKind("unknown response kind '" + s + "'");
}

inline std::string to_string(ResponseKind k) {
    switch (k) {
        case ResponseKind::ind: return "ind";
        case ResponseKind::integral: return "int";
        case ResponseKind::sqnorm: return "sqnorm";
        case ResponseKind::weight: return "weight";
        case ResponseKind::sine: return "sin";
        case ResponseKind::max: return "max";
        case ResponseKind::range: return "range";
        case ResponseKind::eval: return "eval";
    }
    throw UnknownKind("invalid response kind");
}

inline size_t eval_grid_index(const Grid& grid, double u = 0.5) {
    size_t best = 0;
    double best_d = std::fabs(grid.points[0] - u);
    for (size_t j = 1; j < grid.size(); ++j) {
        double d = std::fabs(grid.points[j] - u);
        if (d <= best_d) {  // ties go to the right neighbor
            best_d = d;
            best = j;
        }
    }
    return best;
}

// Noiseless signals f(X_i). Not defined for kind=ind.
inline std::vector<double> signal_values(ResponseKind kind, const FunctionalSample& x) {
    if (kind == ResponseKind::ind)
        throw UnknownKind("kind=ind has no signal; responses are uniform draws");
    const size_t n = x.n, p = x.p;
    const std::vector<double> w = x.grid.trapezoid_weights();
    std::vector<double> f(n, 0.0);
    switch (kind) {
        case ResponseKind::integral:
            for (size_t i = 0; i < n; ++i) {
                double s = 0.0;
                auto xi = x.row(i);
                for (size_t j = 0; j < p; ++j) s += w[j] * xi[j];
                f[i] = s;
            }
            break;
        case ResponseKind::sqnorm:
            for (size_t i = 0; i < n; ++i) {
                double s = 0.0;
                auto xi = x.row(i);
                for (size_t j = 0; j < p; ++j) s += w[j] * xi[j] * xi[j];
                f[i] = s;
            }
            break;
        case ResponseKind::weight:
            for (size_t i = 0; i < n; ++i) {
                double s = 0.0;
                auto xi = x.row(i);
                for (size_t j = 0; j < p; ++j)
                    s += w[j] * x.grid.points[j] * x.grid.points[j] * xi[j];
                f[i] = s;
            }
            break;
        case ResponseKind::sine:
            for (size_t i = 0; i < n; ++i) {
                double s = 0.0;
                auto xi = x.row(i);
                for (size_t j = 0; j < p; ++j) s += w[j] * xi[j];
                f[i] = std::sin(2.0 * std::numbers::pi * s);
            }
            break;
        case ResponseKind::max:
            for (size_t i = 0; i < n; ++i) {
                auto xi = x.row(i);
                f[i] = *std::max_element(xi.begin(), xi.end());
            }
            break;
        case ResponseKind::range:
            for (size_t i = 0; i < n; ++i) {
                auto xi = x.row(i);
                auto [lo, hi] = std::minmax_element(xi.begin(), xi.end());
                f[i] = *hi - *lo;
            }
            break;
        case ResponseKind::eval: {
            size_t j = eval_grid_index(x.grid);
            for (size_t i = 0; i < n; ++i) f[i] = x.row(i)[j];
            break;
        }
        case ResponseKind::ind:
            break;
    }
    return f;
}

// Noise scale such that Var(f(X)) / Var(Y) = r2 in expectation:
// sigma = sqrt(v * (1 - r2) / r2) with v the pooled empirical variance
// (mean squared deviation) of the provided signals.
inline double calibrate_noise(std::span<const double> signals, double r2) {
    if (!(r2 > 0.0) || r2 > 1.0) throw DataError("r2 must be in (0,1]");
    if (r2 == 1.0) return 0.0;
    if (signals.size() < 2) throw DegenerateSignal("need at least 2 signals to calibrate");
    double mean = 0.0;
    for (double v : signals) mean += v;
    mean /= static_cast<double>(signals.size());
    double var = 0.0;
    for (double v : signals) var += (v - mean) * (v - mean);
    var /= static_cast<double>(signals.size());
    if (!(var > 0.0)) throw DegenerateSignal("signals have zero variance; only r2=1 is valid");
    return std::sqrt(var * (1.0 - r2) / r2);
}

struct ResponseModel {
    ResponseKind kind = ResponseKind::ind;
    double r2 = 1.0;
};

// Single-sample response draw: y = f(X) + N(0, sigma^2) with sigma
// calibrated from this sample's own signals (study engines calibrate from
// the pooled n x B signals instead). kind=ind ignores X and r2.
inline std::vector<double> response(const ResponseModel& model, const FunctionalSample& x,
                                    uint64_t seed, uint64_t replicate = 0) {
    auto rng = substream(seed, replicate, 0x726573ULL);
    if (model.kind == ResponseKind::ind) {
        std::vector<double> y(x.n);
        for (auto& v : y) v = uniform01(rng);
        return y;
    }
    std::vector<double> y = signal_values(model.kind, x);
    double sigma = calibrate_noise(y, model.r2);
    if (sigma > 0.0)
        for (auto& v : y) v += sigma * normal01(rng);
    return y;
}

}  // namespace fdep
