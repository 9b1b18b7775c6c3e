#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nlts/io.hpp"
#include "nlts/testkit.hpp"

using namespace nlts;
namespace fs = std::filesystem;

namespace {

fs::path write_tmp(const std::string& name, const std::string& content) {
    const fs::path p = fs::temp_directory_path() / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// The frozen synthetic fit behind report_golden.json. Regenerate the golden
// with tools from this exact recipe whenever the estimator changes.
SeriesReport golden_report() {
    ModelSpec spec;
    spec.trend_degree = 1;
    spec.n_harmonics = 2;
    spec.amplitude_degree = 1;
    spec.period = 12;
    spec.with_shift = true;
    Theta truth = Theta::zeros(spec);
    truth.trend = {120.0, 2.5};
    truth.harmonics[0] = {35.0, -20.0};
    truth.harmonics[1] = {12.0, 8.0};
    truth.amplitude = {0.02};
    truth.shift_height = 180.0;
    truth.shift_time = 20;
    auto y = testkit::simulate_series(spec, truth, 48, 12.0, 99);
    y.values[7] += 700.0;
    y.values[30] -= 650.0;
    LtsOptions opts;
    opts.seed = 1234;
    auto rep = detect_shifts(y, spec, opts, 2);
    rep.series_id = "golden-48";
    return rep;
}

}  // namespace

TEST_CASE("single column csv uses implicit time") {
    const auto p = write_tmp("nlts_io_1.csv", "1\n2\n3\n");
    const auto ts = read_series_csv(p);
    CHECK(ts.values == std::vector<double>{1, 2, 3});
    CHECK(ts.labels.empty());
}

TEST_CASE("two column csv keeps labels and skips one header") {
    const auto p = write_tmp("nlts_io_2.csv",
                             "month,value\n2019-01,5.0\n2019-02,6.0\n");
    const auto ts = read_series_csv(p);
    CHECK(ts.values == std::vector<double>{5.0, 6.0});
    REQUIRE(ts.labels.size() == 2);
    CHECK(ts.labels[0] == "2019-01");
    CHECK(ts.labels[1] == "2019-02");
}

TEST_CASE("semicolon delimiter is sniffed") {
    const auto p = write_tmp("nlts_io_3.csv", "jan;1.5\nfeb;2.5\n");
    const auto ts = read_series_csv(p);
    CHECK(ts.values == std::vector<double>{1.5, 2.5});
    CHECK(ts.labels[1] == "feb");
}

TEST_CASE("blank lines and CRLF endings are tolerated") {
    const auto p = write_tmp("nlts_io_4.csv", "\n1\r\n\n2\r\n3\n\n");
    const auto ts = read_series_csv(p);
    CHECK(ts.values == std::vector<double>{1, 2, 3});
}

TEST_CASE("parse errors name the offending row") {
    const auto p = write_tmp("nlts_io_5.csv",
                             "month,value\n2019-01,5.0\n2019-03,abc\n");
    CHECK_THROWS_WITH_AS(read_series_csv(p),
                         "row 3: cannot parse value 'abc'", CsvError);
}

TEST_CASE("non-finite values are rejected") {
    const auto p = write_tmp("nlts_io_6.csv", "1\nnan\n3\n");
    CHECK_THROWS_WITH_AS(read_series_csv(p),
                         "row 2: cannot parse value 'nan'", CsvError);
    const auto q = write_tmp("nlts_io_7.csv", "1\ninf\n");
    CHECK_THROWS_AS(read_series_csv(q), CsvError);
}

TEST_CASE("column count may not change midway") {
    const auto p = write_tmp("nlts_io_8.csv", "1\n2,3\n");
    CHECK_THROWS_WITH_AS(read_series_csv(p), "row 2: expected 1 column, got 2",
                         CsvError);
    const auto q = write_tmp("nlts_io_9.csv", "a,1\n2\n");
    CHECK_THROWS_WITH_AS(read_series_csv(q), "row 2: expected 2 columns, got 1",
                         CsvError);
    const auto r = write_tmp("nlts_io_10.csv", "1,2,3\n");
    CHECK_THROWS_AS(read_series_csv(r), CsvError);
}

TEST_CASE("empty and missing inputs raise errors") {
    const auto p = write_tmp("nlts_io_11.csv", "");
    CHECK_THROWS_AS(read_series_csv(p), CsvError);
    const auto q = write_tmp("nlts_io_12.csv", "value\n");
    CHECK_THROWS_AS(read_series_csv(q), CsvError);
    CHECK_THROWS_AS(read_series_csv("/nonexistent/nlts.csv"), CsvError);
}

TEST_CASE("report keys appear in the documented order") {
    SeriesReport rep;
    rep.series_id = "s1";
    rep.shifts.push_back({40, 13000.0, 14.7, 1e-12, 1});
    rep.outliers = {3, 9};
    rep.coefficients.push_back({"alpha0", 1.0, 0.1, 10.0, 1e-8});
    rep.sigma = 2.5;
    rep.warnings = {"w"};
    const auto j = report_to_json(rep);
    std::vector<std::string> keys;
    for (const auto& item : j.items()) keys.push_back(item.key());
    CHECK(keys == std::vector<std::string>{"series_id", "model", "h", "seed",
                                           "shifts", "outliers", "coefficients",
                                           "sigma", "warnings"});
    const auto& js = j["shifts"][0];
    std::vector<std::string> skeys;
    for (const auto& item : js.items()) skeys.push_back(item.key());
    CHECK(skeys == std::vector<std::string>{"position", "height", "t_stat",
                                            "p_value", "pass"});
}

TEST_CASE("coefficient names follow the fixed report order") {
    ModelSpec s;
    s.trend_degree = 1;
    s.n_harmonics = 2;
    s.amplitude_degree = 1;
    s.with_shift = true;
    CHECK(coefficient_names(s) ==
          std::vector<std::string>{"alpha0", "alpha1", "beta11", "beta12",
                                   "beta21", "beta22", "gamma1", "delta1"});
}

TEST_CASE("numbers round trip at ten significant digits") {
    SeriesReport rep;
    rep.series_id = "rt";
    rep.sigma = 954.6683217431895;
    rep.coefficients.push_back(
        {"alpha0", -112.6201234567891, 0.123456789012345, -3.14159265358979,
         0.00123456789654321});
    const auto p = fs::temp_directory_path() / "nlts_io_report.json";
    write_report_json(rep, p);
    const auto parsed = nlohmann::json::parse(slurp(p));
    // A second serialization of the parsed values is identical: nothing
    // beyond 10 significant digits survives the first write.
    auto reread = rep;
    reread.sigma = parsed["sigma"].get<double>();
    reread.coefficients[0].value = parsed["coefficients"][0]["value"];
    reread.coefficients[0].se = parsed["coefficients"][0]["se"];
    reread.coefficients[0].t = parsed["coefficients"][0]["t"];
    reread.coefficients[0].p = parsed["coefficients"][0]["p"];
    const auto q = fs::temp_directory_path() / "nlts_io_report2.json";
    write_report_json(reread, q);
    CHECK(slurp(p) == slurp(q));
    CHECK(parsed["sigma"].get<double>() == doctest::Approx(rep.sigma).epsilon(1e-9));
}

TEST_CASE("empty report round trips") {
    SeriesReport rep;
    rep.series_id = "empty";
    const auto j = report_to_json(rep);
    const auto parsed = nlohmann::json::parse(j.dump(2));
    CHECK(parsed["series_id"] == "empty");
    CHECK(parsed["shifts"].empty());
    CHECK(parsed["outliers"].empty());
    CHECK(parsed["warnings"].empty());
}

TEST_CASE("batch summary layout") {
    BatchResult batch;
    batch.summary = {2, 1, 3, 0};
    SeriesReport a;
    a.series_id = "a";
    a.shifts.push_back({10, 5.0, 4.0, 1e-4, 1});
    a.outliers = {1, 2, 3};
    SeriesReport b;
    b.series_id = "b";
    batch.reports = {a, b};
    const auto j = batch_summary_to_json(batch);
    CHECK(j["n_series"] == 2);
    CHECK(j["n_with_shifts"] == 1);
    CHECK(j["n_outliers_total"] == 3);
    CHECK(j["n_failures"] == 0);
    REQUIRE(j["series"].size() == 2);
    CHECK(j["series"][0]["id"] == "a");
    CHECK(j["series"][0]["shifts"] == 1);
    CHECK(j["series"][1]["outliers"] == 0);
}

TEST_CASE("frozen synthetic fit matches the golden report") {
    const auto rep = golden_report();
    const auto p = fs::temp_directory_path() / "nlts_io_golden.json";
    write_report_json(rep, p);
    CHECK(slurp(p) == slurp(fs::path(NLTS_GOLDEN_DIR) / "report_golden.json"));
}
