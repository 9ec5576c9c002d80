#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "fdep/normal.hpp"

namespace fdep {

inline double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Standard deviation with the n-1 divisor.
inline double sd_of(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

inline double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Kolmogorov-Smirnov distance of a sample to the standard normal.
inline double ks_distance_to_normal(std::vector<double> sample) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (size_t i = 0; i < sample.size(); ++i) {
        double f = normal_cdf(sample[i]);
        double hi = (static_cast<double>(i) + 1.0) / n - f;
        double lo = f - static_cast<double>(i) / n;
        if (hi > d) d = hi;
        if (lo > d) d = lo;
    }
    return d;
}

// Least-squares slope of y against x.
inline double regression_slope(std::span<const double> x, std::span<const double> y) {
    double mx = mean_of(x), my = mean_of(y);
    double sxy = 0.0, sxx = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace fdep
