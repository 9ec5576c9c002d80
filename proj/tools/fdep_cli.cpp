// fdep command-line interface.
//
// Subcommands: coef | test | dcor | simulate | null-study | power |
// degree-study. All stochastic subcommands are seed-deterministic; reports
// go to stdout as JSON, study tables to CSV files. Exit codes: 0 success,
// 2 usage error, 3 data error, 4 internal assertion failure.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fdep/fdep.hpp"

namespace {

using nlohmann::ordered_json;

struct CommonOpts {
    int threads = 0;
    bool full_precision = false;
    uint64_t seed = 1;
    double alpha = 0.05;
};

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        auto d = std::chrono::steady_clock::now() - start_;
        return std::chrono::duration<double, std::milli>(d).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

double maybe_round(double v, bool full_precision) {
    return full_precision ? v : fdep::round_significant(v);
}

void emit(const ordered_json& j) { std::cout << j.dump(2) << std::endl; }

fdep::DistanceMatrix load_distances(const std::string& curves, const std::string& dist,
                                    int threads) {
    if (!dist.empty()) return fdep::parse_distance_matrix_csv(dist);
    fdep::FunctionalSample x = fdep::parse_curves_csv(curves);
    return fdep::distance_matrix(x, {.threads = threads});
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    size_t start = 0;
    while (start <= csv.size()) {
        size_t comma = csv.find(',', start);
        if (comma == std::string::npos) comma = csv.size();
        out.push_back(std::stod(csv.substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

std::vector<size_t> parse_size_list(const std::string& csv) {
    std::vector<size_t> out;
    for (double v : parse_double_list(csv)) out.push_back(static_cast<size_t>(v));
    return out;
}

// Apply a parsed config file under the CLI flags: a flag given on the
// command line wins over the file.
void apply_config(const std::string& path, CLI::App* sub, CommonOpts& common, size_t& n,
                  size_t& B, std::string& kind, double& r2, double& decay_a, size_t& basis_K,
                  size_t& grid_p) {
    if (path.empty()) return;
    auto kv = fdep::parse_config_file(path);
    auto fresh = [&](const std::string& flag) {
        auto* opt = sub->get_option_no_throw(flag);
        return opt == nullptr || opt->count() == 0;
    };
    if (kv.count("n") && fresh("--n")) n = std::stoull(kv["n"]);
    if (kv.count("B") && fresh("--B")) B = std::stoull(kv["B"]);
    if (kv.count("seed") && fresh("--seed")) common.seed = std::stoull(kv["seed"]);
    if (kv.count("alpha") && fresh("--alpha")) common.alpha = std::stod(kv["alpha"]);
    if (kv.count("kind") && fresh("--kind")) kind = kv["kind"];
    if (kv.count("r2") && fresh("--r2")) r2 = std::stod(kv["r2"]);
    if (kv.count("lambda_decay_a") && fresh("--decay-a")) decay_a = std::stod(kv["lambda_decay_a"]);
    if (kv.count("basis_K") && fresh("--K")) basis_K = std::stoull(kv["basis_K"]);
    if (kv.count("grid_p") && fresh("--p")) grid_p = std::stoull(kv["grid_p"]);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fdep — dependence coefficient and independence test for functional data"};
    app.require_subcommand(1);
    app.fallthrough();

    CommonOpts common;
    app.add_option("--threads", common.threads,
                   "max worker threads for distance/permutation kernels (0 = FDEP_THREADS or all)");
    app.add_flag("--full-precision", common.full_precision,
                 "print numbers with full round-trip precision instead of 6 significant digits");
    app.add_option("--seed", common.seed, "seed for all stochastic subcommands");
    app.add_option("--alpha", common.alpha, "significance level (affects the reject field only)");

    std::string curves_path, response_path, dist_path, config_path;
    std::string out_base, out_curves = "fdep_curves.csv", out_response = "fdep_response.csv";
    std::string kind_str = "ind", kinds_str = "int,sqnorm,weight,sin,max,range,eval";
    std::string r2_grid_str = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
    std::string sizes_str = "250,1000,4000,16000";
    size_t n = 100, B = 500, basis_K = 20, grid_p = 200, dcor_B = 200, perm_B = 0;
    double r2 = 1.0, decay_a = 2.0;
    bool with_dcor = false;

    auto* c_coef = app.add_subcommand("coef", "compute the dependence coefficient T_n");
    auto* c_test = app.add_subcommand("test", "run the asymptotic independence test");
    for (auto* sub : {c_coef, c_test}) {
        sub->add_option("--curves", curves_path, "curves CSV (rows = observations)");
        sub->add_option("--response", response_path, "response CSV (one value per line)")
            ->required();
        sub->add_option("--dist-matrix", dist_path,
                        "precomputed symmetric distance matrix CSV (bypasses --curves)");
    }

    auto* c_dcor = app.add_subcommand("dcor", "distance-correlation baseline");
    c_dcor->add_option("--curves", curves_path, "curves CSV");
    c_dcor->add_option("--response", response_path, "response CSV")->required();
    c_dcor->add_option("--dist-matrix", dist_path, "precomputed distance matrix CSV");
    c_dcor->add_option("--B", perm_B, "permutation replications (0 = coefficient only)");

    auto* c_sim = app.add_subcommand("simulate", "generate a synthetic sample to CSV files");
    c_sim->add_option("--n", n, "sample size");
    c_sim->add_option("--kind", kind_str, "response kind (ind int sqnorm weight sin max range eval)");
    c_sim->add_option("--r2", r2, "target signal fraction in (0,1]");
    c_sim->add_option("--K", basis_K, "KL basis size");
    c_sim->add_option("--p", grid_p, "grid size");
    c_sim->add_option("--out-curves", out_curves, "output curves CSV path");
    c_sim->add_option("--out-response", out_response, "output response CSV path");

    auto* c_null = app.add_subcommand("null-study", "null distribution of I_n under independence");
    auto* c_power = app.add_subcommand("power", "rejection-rate study across response models");
    auto* c_degree = app.add_subcommand("degree-study", "spike-model degree growth study");
    for (auto* sub : {c_null, c_power, c_degree}) {
        sub->add_option("--config", config_path, "flat key=value config file");
        sub->add_option("--B", B, "replications (seeds per size for degree-study)");
        sub->add_option("--out", out_base, "output base path (writes <base>.csv and <base>.json)");
    }
    c_null->add_option("--n", n, "sample size");
    c_null->add_option("--K", basis_K, "KL basis size");
    c_null->add_option("--p", grid_p, "grid size");
    c_power->add_option("--n", n, "sample size");
    c_power->add_option("--K", basis_K, "KL basis size");
    c_power->add_option("--p", grid_p, "grid size");
    c_power->add_option("--kinds", kinds_str, "comma-separated response kinds");
    c_power->add_option("--r2-grid", r2_grid_str, "comma-separated r2 values");
    c_power->add_flag("--with-dcor", with_dcor, "also run the permutation-dCor test per cell");
    c_power->add_option("--dcor-B", dcor_B, "permutation replications for the dCor test");
    c_degree->add_option("--n-list", sizes_str, "comma-separated sample sizes");
    c_degree->add_option("--decay-a", decay_a, "eigenvalue decay exponent (lambda_k = k^-a)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        const int threads = common.threads;

        if (c_coef->parsed() || c_test->parsed()) {
            if (curves_path.empty() && dist_path.empty())
                throw fdep::DataError("need --curves or --dist-matrix");
            Stopwatch sw;
            fdep::DistanceMatrix dx = load_distances(curves_path, dist_path, threads);
            std::vector<double> y = fdep::parse_response_csv(response_path);
            if (y.size() != dx.n)
                throw fdep::DimensionMismatch("response has " + std::to_string(y.size()) +
                                              " values but sample has " + std::to_string(dx.n));
            if (c_coef->parsed()) {
                fdep::NNGraph g = fdep::nearest_neighbor_graph(dx, threads);
                fdep::DegreeStats s = fdep::degree_stats(g);
                fdep::RankVector rv = fdep::rank_vector(y);
                double q = fdep::q_hat(rv, g);
                ordered_json j;
                j["n"] = dx.n;
                j["t_hat"] = maybe_round(fdep::t_hat(q), common.full_precision);
                j["q_hat"] = maybe_round(q, common.full_precision);
                j["l_max"] = s.l_max;
                j["f_n"] = s.f_n;
                j["tie_count_x"] = g.tie_count;
                j["tie_flag_y"] = rv.tie_flag;
                j["elapsed_ms"] = fdep::round_significant(sw.ms(), 6);
                emit(j);
            } else {
                fdep::TestReport rep = fdep::independence_test(dx, y, threads);
                ordered_json j = fdep::to_json(rep, common.full_precision);
                j["alpha"] = common.alpha;
                j["reject"] = rep.i_n > fdep::normal_quantile(1.0 - common.alpha);
                j["elapsed_ms"] = fdep::round_significant(sw.ms(), 6);
                emit(j);
            }
            return 0;
        }

        if (c_dcor->parsed()) {
            if (curves_path.empty() && dist_path.empty())
                throw fdep::DataError("need --curves or --dist-matrix");
            Stopwatch sw;
            fdep::DistanceMatrix dx = load_distances(curves_path, dist_path, threads);
            std::vector<double> y = fdep::parse_response_csv(response_path);
            if (y.size() != dx.n)
                throw fdep::DimensionMismatch("response has " + std::to_string(y.size()) +
                                              " values but sample has " + std::to_string(dx.n));
            double r = fdep::distance_correlation(dx, y);
            ordered_json j;
            j["n"] = dx.n;
            j["r_n"] = maybe_round(r, common.full_precision);
            if (perm_B > 0) {
                fdep::PermutationPlan plan{perm_B, common.seed, threads};
                double p = fdep::permutation_test(
                    [](const fdep::DistanceMatrix& dm, std::span<const double> yy) {
                        return fdep::distance_correlation(dm, yy);
                    },
                    dx, y, plan);
                j["B"] = perm_B;
                j["seed"] = common.seed;
                j["p_value"] = maybe_round(p, common.full_precision);
                j["reject"] = p <= common.alpha;
                j["alpha"] = common.alpha;
            }
            j["elapsed_ms"] = fdep::round_significant(sw.ms(), 6);
            emit(j);
            return 0;
        }

        if (c_sim->parsed()) {
            Stopwatch sw;
            fdep::KLModel model{basis_K, 0.3, grid_p};
            fdep::FunctionalSample x = fdep::kl_sample(model, n, common.seed);
            fdep::ResponseModel rm{fdep::response_kind_from_string(kind_str), r2};
            std::vector<double> y = fdep::response(rm, x, common.seed);
            fdep::write_sample_csv(x, out_curves);
            fdep::write_response_csv(y, out_response);
            ordered_json j;
            j["n"] = n;
            j["p"] = grid_p;
            j["K"] = basis_K;
            j["kind"] = kind_str;
            j["r2"] = r2;
            j["seed"] = common.seed;
            j["out_curves"] = out_curves;
            j["out_response"] = out_response;
            j["elapsed_ms"] = fdep::round_significant(sw.ms(), 6);
            emit(j);
            return 0;
        }

        if (c_null->parsed()) {
            apply_config(config_path, c_null, common, n, B, kind_str, r2, decay_a, basis_K, grid_p);
            Stopwatch sw;
            fdep::StudyConfig cfg{n, B, common.seed, common.alpha,
                                  fdep::KLModel{basis_K, 0.3, grid_p}, threads};
            fdep::NullStudyResult res = fdep::null_distribution_study(cfg);
            std::string base = out_base.empty() ? "fdep_null_study" : out_base;
            fdep::write_null_study_csv(res, base + ".csv");
            ordered_json j;
            j["study"] = "null";
            j["n"] = n;
            j["B"] = B;
            j["seed"] = common.seed;
            j["alpha"] = common.alpha;
            j["mean_t"] = maybe_round(res.mean_t, common.full_precision);
            j["sd_t"] = maybe_round(res.sd_t, common.full_precision);
            j["mean_i"] = maybe_round(res.mean_i, common.full_precision);
            j["sd_i"] = maybe_round(res.sd_i, common.full_precision);
            j["ks_to_normal"] = maybe_round(res.ks_to_normal, common.full_precision);
            j["reject_rate"] = maybe_round(res.reject_rate, common.full_precision);
            j["csv"] = base + ".csv";
            j["elapsed_ms"] = fdep::round_significant(sw.ms(), 6);
            std::ofstream(base + ".json") << j.dump(2) << '\n';
            emit(j);
            return 0;
        }

        if (c_power->parsed()) {
            apply_config(config_path, c_power, common, n, B, kind_str, r2, decay_a, basis_K,
                         grid_p);
            Stopwatch sw;
            fdep::StudyConfig cfg{n, B, common.seed, common.alpha,
                                  fdep::KLModel{basis_K, 0.3, grid_p}, threads};
            std::vector<fdep::ResponseKind> kinds;
            if (c_power->get_option("--kinds")->count() == 0 && !config_path.empty()) {
                // config file carries a single `kind`
                auto kv = fdep::parse_config_file(config_path);
                if (kv.count("kind")) kinds_str = kv["kind"];
            }
            {
                size_t start = 0;
                while (start <= kinds_str.size()) {
                    size_t comma = kinds_str.find(',', start);
                    if (comma == std::string::npos) comma = kinds_str.size();
                    kinds.push_back(fdep::response_kind_from_string(
                        kinds_str.substr(start, comma - start)));
                    start = comma + 1;
                }
            }
            std::vector<double> r2_grid = parse_double_list(r2_grid_str);
            fdep::PowerStudyOptions popt{with_dcor, dcor_B};
            fdep::PowerStudyResult res = fdep::power_study(cfg, kinds, r2_grid, popt);
            std::string base = out_base.empty() ? "fdep_power_study" : out_base;
            fdep::write_power_study_csv(res, base + ".csv");
            ordered_json j;
            j["study"] = "power";
            j["n"] = n;
            j["B"] = B;
            j["seed"] = common.seed;
            j["alpha"] = common.alpha;
            auto cells = ordered_json::array();
            for (const auto& c : res.cells) {
                ordered_json cj;
                cj["kind"] = fdep::to_string(c.kind);
                cj["r2"] = c.r2;
                cj["reject_rate"] = maybe_round(c.reject_rate, common.full_precision);
                cj["mean_t"] = maybe_round(c.mean_t, common.full_precision);
                cj["sd_t"] = maybe_round(c.sd_t, common.full_precision);
                if (c.dcor_reject_rate >= 0.0)
                    cj["dcor_reject_rate"] =
                        maybe_round(c.dcor_reject_rate, common.full_precision);
                cells.push_back(cj);
            }
            j["cells"] = cells;
            j["csv"] = base + ".csv";
            j["elapsed_ms"] = fdep::round_significant(sw.ms(), 6);
            std::ofstream(base + ".json") << j.dump(2) << '\n';
            emit(j);
            return 0;
        }

        if (c_degree->parsed()) {
            apply_config(config_path, c_degree, common, n, B, kind_str, r2, decay_a, basis_K,
                         grid_p);
            if (c_degree->get_option("--n-list")->count() == 0 &&
                !config_path.empty()) {
                auto kv = fdep::parse_config_file(config_path);
                if (kv.count("n")) sizes_str = kv["n"];
            }
            Stopwatch sw;
            std::vector<size_t> sizes = parse_size_list(sizes_str);
            fdep::LambdaSpec lambda;
            lambda.a = decay_a;
            fdep::DegreeStudyResult res =
                fdep::degree_growth_study(sizes, B, common.seed, lambda, threads);
            std::string base = out_base.empty() ? "fdep_degree_study" : out_base;
            fdep::write_degree_study_csv(res, base + ".csv");
            ordered_json j;
            j["study"] = "degree";
            j["sizes"] = res.sizes;
            j["B"] = B;
            j["seed"] = common.seed;
            j["decay_a"] = decay_a;
            auto med = ordered_json::array();
            for (double m : res.median_l) med.push_back(m);
            j["median_l"] = med;
            j["medians_increasing"] = res.medians_increasing;
            j["loglog_slope"] = maybe_round(res.loglog_slope, common.full_precision);
            j["bounds_hold"] = true;  // degree_bounds_check throws otherwise
            j["csv"] = base + ".csv";
            j["elapsed_ms"] = fdep::round_significant(sw.ms(), 6);
            std::ofstream(base + ".json") << j.dump(2) << '\n';
            emit(j);
            return 0;
        }

        std::cerr << "no subcommand given\n";
        return 2;
    } catch (const fdep::InternalError& e) {
        std::cerr << "internal assertion: " << e.what() << "\n";
        return 4;
    } catch (const fdep::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
