#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "fdep/io.hpp"
#include "fdep/rng.hpp"

using namespace fdep;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& content = "") {
        path = (std::filesystem::temp_directory_path() / name).string();
        if (!content.empty()) std::ofstream(path, std::ios::binary) << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("curves csv without header uses the default grid") {
    TempFile f("fdep_t1.csv", "0,0\n1,1\n3,3\n");
    auto s = parse_curves_csv(f.path);
    CHECK(s.n == 3);
    CHECK(s.p == 2);
    CHECK(s.grid.points == std::vector<double>{0.0, 1.0});
    CHECK(s.row(2)[0] == 3.0);
}

TEST_CASE("curves csv with grid header") {
    TempFile f("fdep_t2.csv", "u=0.0,u=0.5,u=1.0\n1,2,3\n4,5,6\n");
    auto s = parse_curves_csv(f.path);
    CHECK(s.n == 2);
    CHECK(s.grid.points == std::vector<double>{0.0, 0.5, 1.0});
}

TEST_CASE("curves csv error paths") {
    TempFile ragged("fdep_t3.csv", "0,0\n1\n");
    try {
        parse_curves_csv(ragged.path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }

    TempFile empty("fdep_t4.csv", "");
    CHECK_THROWS_AS(parse_curves_csv(empty.path), ParseError);

    TempFile junk("fdep_t5.csv", "0,0\n1,foo\n");
    CHECK_THROWS_AS(parse_curves_csv(junk.path), ParseError);

    TempFile nan_curve("fdep_t6.csv", "0,0\n1,nan\n");
    CHECK_THROWS_AS(parse_curves_csv(nan_curve.path), NonFiniteValue);

    CHECK_THROWS_AS(parse_curves_csv("/nonexistent/file.csv"), ParseError);
}

TEST_CASE("response csv") {
    TempFile f("fdep_t7.csv", "1\n2\n3\n");
    CHECK(parse_response_csv(f.path) == std::vector<double>{1.0, 2.0, 3.0});

    TempFile bad("fdep_t8.csv", "1\nfoo\n");
    try {
        parse_response_csv(bad.path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }

    TempFile empty("fdep_t9.csv", "");
    CHECK_THROWS_AS(parse_response_csv(empty.path), ParseError);
}

TEST_CASE("distance matrix csv validation") {
    TempFile ok("fdep_t10.csv", "0,1,3\n1,0,2\n3,2,0\n");
    auto d = parse_distance_matrix_csv(ok.path);
    CHECK(d.n == 3);
    CHECK(d(0, 2) == 3.0);

    TempFile asym("fdep_t11.csv", "0,1\n2,0\n");
    CHECK_THROWS_AS(parse_distance_matrix_csv(asym.path), ParseError);

    TempFile diag("fdep_t12.csv", "1,1\n1,0\n");
    CHECK_THROWS_AS(parse_distance_matrix_csv(diag.path), ParseError);

    TempFile notsquare("fdep_t13.csv", "0,1,2\n1,0,2\n");
    CHECK_THROWS_AS(parse_distance_matrix_csv(notsquare.path), ParseError);
}

TEST_CASE("sample write/parse round-trip is exact") {
    auto rng = substream(4, 0, 0);
    std::vector<double> data(12 * 9);
    for (auto& v : data) v = normal01(rng) * 1e3;
    auto s = build_sample(std::move(data), 12, 9, Grid::equidistant(9, 0.0, 2.0));

    TempFile f("fdep_t14.csv");
    write_sample_csv(s, f.path);
    auto back = parse_curves_csv(f.path);
    CHECK(back.n == s.n);
    CHECK(back.grid.points == s.grid.points);
    CHECK(back.data == s.data);  // shortest round-trip formatting is lossless
}

TEST_CASE("config file parsing") {
    TempFile f("fdep_t15.cfg",
               "# comment\nstudy=null\nn=100\nB = 500\nseed=7\nkind=eval\nr2=0.5\n"
               "alpha=0.05\nlambda_decay_a=2\nbasis_K=20\ngrid_p=200\n");
    auto kv = parse_config_file(f.path);
    CHECK(kv.at("study") == "null");
    CHECK(kv.at("B") == "500");
    CHECK(kv.at("r2") == "0.5");

    TempFile bad("fdep_t16.cfg", "bogus_key=1\n");
    CHECK_THROWS_AS(parse_config_file(bad.path), ParseError);

    TempFile noeq("fdep_t17.cfg", "studynull\n");
    CHECK_THROWS_AS(parse_config_file(noeq.path), ParseError);
}

TEST_CASE("test report json has the fixed key set") {
    TestReport r;
    r.n = 4;
    r.t_hat = 0.625;
    r.q_hat = 0.4375;
    r.w_tilde = 7.0 / 60.0;
    r.w_n = 25.0 / 1152.0;
    r.i_n = 0.2828;
    r.p_value = 0.3886;
    r.l_max = 2;
    r.f_n = 2;
    auto j = to_json(r);
    const char* keys[] = {"n",   "t_hat",   "q_hat", "w_tilde",     "w_n",       "i_n",
                          "p_value", "l_max", "f_n", "tie_count_x", "tie_flag_y"};
    for (const char* k : keys) CHECK(j.contains(k));
    // 6 significant digits by default
    CHECK(j["w_tilde"].get<double>() == Catch::Approx(0.116667).margin(1e-9));
    auto jf = to_json(r, true);
    CHECK(jf["w_tilde"].get<double>() == 7.0 / 60.0);
}

TEST_CASE("round_significant") {
    CHECK(round_significant(0.12345678, 6) == Catch::Approx(0.123457).margin(1e-12));
    CHECK(round_significant(123456.789, 6) == Catch::Approx(123457.0).margin(1e-6));
    CHECK(round_significant(0.0) == 0.0);
    CHECK(round_significant(-1.23456789e-7, 6) == Catch::Approx(-1.23457e-7).margin(1e-18));
}
