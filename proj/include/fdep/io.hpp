#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fdep/core.hpp"
#include "fdep/dependence.hpp"
#include "fdep/errors.hpp"
#include "fdep/studies.hpp"

namespace fdep {

// ---------------------------------------------------------------------------
// number formatting
// ---------------------------------------------------------------------------

// Shortest decimal string that round-trips the double exactly.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Round to `digits` significant digits (for human-facing report fields).
inline double round_significant(double v, int digits = 6) {
    if (v == 0.0 || !std::isfinite(v)) return v;
    std::ostringstream os;
    os.precision(digits);
    os << std::scientific << v;
    return std::stod(os.str());
}

// ---------------------------------------------------------------------------
// low-level CSV helpers
// ---------------------------------------------------------------------------
namespace detail {

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    size_t start = 0;
    for (size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

inline double parse_number(std::string_view tok, size_t line_no) {
    tok = trim(tok);
    double v;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw ParseError("not a number: '" + std::string(tok) + "'", line_no);
    return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// curves CSV: one observation per row, p numeric columns. An optional first
// header row "u=<value>,u=<value>,..." carries the grid; otherwise the grid
// defaults to p equidistant points on [0,1].
// ---------------------------------------------------------------------------
inline FunctionalSample parse_curves_csv(const std::string& path) {
    auto lines = detail::read_lines(path);
    // drop trailing blank lines
    while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw ParseError("empty input: " + path);

    size_t first_data = 0;
    Grid grid;
    bool have_grid = false;
    auto head = detail::split_csv(lines[0]);
    if (!head.empty() && detail::trim(head[0]).substr(0, 2) == "u=") {
        std::vector<double> pts;
        pts.reserve(head.size());
        for (auto tok : head) {
            tok = detail::trim(tok);
            if (tok.substr(0, 2) != "u=") throw ParseError("malformed grid header", 1);
            pts.push_back(detail::parse_number(tok.substr(2), 1));
        }
        grid = Grid(std::move(pts));
        have_grid = true;
        first_data = 1;
    }
    if (first_data >= lines.size()) throw ParseError("no data rows: " + path);

    const size_t p = detail::split_csv(lines[first_data]).size();
    if (p < 2) throw ParseError("curves need at least 2 columns", first_data + 1);
    if (!have_grid) grid = Grid::equidistant(p);
    if (grid.size() != p)
        throw DimensionMismatch("grid header has " + std::to_string(grid.size()) +
                                " points but rows have " + std::to_string(p) + " columns");

    std::vector<double> data;
    data.reserve((lines.size() - first_data) * p);
    for (size_t li = first_data; li < lines.size(); ++li) {
        auto toks = detail::split_csv(lines[li]);
        if (toks.size() != p)
            throw ParseError("expected " + std::to_string(p) + " columns, got " +
                                 std::to_string(toks.size()),
                             li + 1);
        for (auto tok : toks) data.push_back(detail::parse_number(tok, li + 1));
    }
    const size_t n = lines.size() - first_data;
    return build_sample(std::move(data), n, p, std::move(grid));
}

// response CSV: one numeric value per line
inline std::vector<double> parse_response_csv(const std::string& path) {
    auto lines = detail::read_lines(path);
    while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw ParseError("empty input: " + path);
    std::vector<double> y;
    y.reserve(lines.size());
    for (size_t li = 0; li < lines.size(); ++li) {
        double v = detail::parse_number(lines[li], li + 1);
        if (!std::isfinite(v)) throw NonFiniteValue(li, 0);
        y.push_back(v);
    }
    return y;
}

// precomputed symmetric distance matrix CSV (general-metric escape hatch)
inline DistanceMatrix parse_distance_matrix_csv(const std::string& path) {
    auto lines = detail::read_lines(path);
    while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw ParseError("empty input: " + path);
    const size_t n = lines.size();
    DistanceMatrix m(n);
    for (size_t i = 0; i < n; ++i) {
        auto toks = detail::split_csv(lines[i]);
        if (toks.size() != n)
            throw ParseError("distance matrix must be square: row has " +
                                 std::to_string(toks.size()) + " of " + std::to_string(n) +
                                 " columns",
                             i + 1);
        for (size_t j = 0; j < n; ++j) {
            double v = detail::parse_number(toks[j], i + 1);
            if (!std::isfinite(v) || v < 0.0)
                throw ParseError("distances must be finite and nonnegative", i + 1);
            m(i, j) = v;
        }
    }
    for (size_t i = 0; i < n; ++i) {
        if (m(i, i) != 0.0) throw ParseError("distance matrix diagonal must be zero", i + 1);
        for (size_t j = i + 1; j < n; ++j)
            if (m(i, j) != m(j, i))
                throw ParseError("distance matrix must be exactly symmetric (entry " +
                                     std::to_string(i) + "," + std::to_string(j) + ")",
                                 i + 1);
    }
    return m;
}

inline void write_sample_csv(const FunctionalSample& s, const std::string& path,
                             bool grid_header = true) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    if (grid_header) {
        for (size_t j = 0; j < s.p; ++j) {
            if (j) out << ',';
            out << "u=" << format_double(s.grid.points[j]);
        }
        out << '\n';
    }
    for (size_t i = 0; i < s.n; ++i) {
        auto r = s.row(i);
        for (size_t j = 0; j < s.p; ++j) {
            if (j) out << ',';
            out << format_double(r[j]);
        }
        out << '\n';
    }
}

inline void write_response_csv(std::span<const double> y, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    for (double v : y) out << format_double(v) << '\n';
}

// ---------------------------------------------------------------------------
// study config: flat key=value text file.
// keys: study, n, B, seed, kind, r2, alpha, lambda_decay_a, basis_K, grid_p
// ---------------------------------------------------------------------------
inline std::map<std::string, std::string> parse_config_file(const std::string& path) {
    static const char* known[] = {"study", "n",     "B",              "seed",    "kind",
                                  "r2",    "alpha", "lambda_decay_a", "basis_K", "grid_p"};
    auto lines = detail::read_lines(path);
    std::map<std::string, std::string> kv;
    for (size_t li = 0; li < lines.size(); ++li) {
        std::string_view line = detail::trim(lines[li]);
        if (line.empty() || line.front() == '#') continue;
        size_t eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected key=value", li + 1);
        std::string key{detail::trim(line.substr(0, eq))};
        std::string val{detail::trim(line.substr(eq + 1))};
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ParseError("unknown config key '" + key + "'", li + 1);
        kv[key] = val;
    }
    return kv;
}

// ---------------------------------------------------------------------------
// JSON reports. TestReport serializes to a flat object with the fixed keys
// n, t_hat, q_hat, w_tilde, w_n, i_n, p_value, l_max, f_n, tie_count_x,
// tie_flag_y. Human-facing numbers carry 6 significant digits unless
// full_precision is set.
// ---------------------------------------------------------------------------
inline nlohmann::ordered_json to_json(const TestReport& r, bool full_precision = false) {
    auto num = [&](double v) { return full_precision ? v : round_significant(v); };
    nlohmann::ordered_json j;
    j["n"] = r.n;
    j["t_hat"] = num(r.t_hat);
    j["q_hat"] = num(r.q_hat);
    j["w_tilde"] = num(r.w_tilde);
    j["w_n"] = num(r.w_n);
    j["i_n"] = num(r.i_n);
    j["p_value"] = num(r.p_value);
    j["l_max"] = r.l_max;
    j["f_n"] = r.f_n;
    j["tie_count_x"] = r.tie_count_x;
    j["tie_flag_y"] = r.tie_flag_y;
    return j;
}

inline void write_null_study_csv(const NullStudyResult& res, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out << "b,t_hat,i_n,p_value\n";
    for (size_t b = 0; b < res.t_hat.size(); ++b)
        out << b << ',' << format_double(res.t_hat[b]) << ',' << format_double(res.i_n[b]) << ','
            << format_double(res.p_value[b]) << '\n';
}

inline void write_power_study_csv(const PowerStudyResult& res, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    bool with_dcor = false;
    for (const auto& c : res.cells) with_dcor = with_dcor || c.dcor_reject_rate >= 0.0;
    out << "kind,r2,reject_rate,mean_t,sd_t";
    if (with_dcor) out << ",dcor_reject_rate";
    out << '\n';
    for (const auto& c : res.cells) {
        out << to_string(c.kind) << ',' << format_double(c.r2) << ','
            << format_double(c.reject_rate) << ',' << format_double(c.mean_t) << ','
            << format_double(c.sd_t);
        if (with_dcor) out << ',' << format_double(c.dcor_reject_rate);
        out << '\n';
    }
}

inline void write_degree_study_csv(const DegreeStudyResult& res, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    size_t n_thr = res.rows.empty() ? 0 : res.rows.front().thresholds.size();
    out << "n,replicate,l_max,g_n";
    for (size_t t = 0; t < n_thr; ++t)
        out << ",x" << t + 1 << ",r" << t + 1 << ",bound" << t + 1;
    out << '\n';
    for (const auto& row : res.rows) {
        out << row.n << ',' << row.replicate << ',' << row.l_max << ',' << row.g_n;
        for (size_t t = 0; t < row.thresholds.size(); ++t)
            out << ',' << row.thresholds[t] << ',' << row.r_counts[t] << ','
                << row.upper_bounds[t];
        out << '\n';
    }
}

}  // namespace fdep
