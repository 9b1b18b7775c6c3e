#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlts/model.hpp"
#include "nlts/testkit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Runs the CLI through the shell and returns its exit code.
int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + NLTS_CLI_PATH + "\" " + args;
    const int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Fresh scratch directory per test case, under the test binary's cwd.
fs::path scratch(const std::string& name) {
    const fs::path dir = fs::path("cli_scratch") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

nlts::TimeSeries sample_series(int T, std::uint64_t seed) {
    nlts::ModelSpec spec;
    spec.trend_degree = 1;
    spec.n_harmonics = 2;
    spec.amplitude_degree = 1;
    spec.period = 12;
    spec.with_shift = true;
    nlts::Theta truth = nlts::Theta::zeros(spec);
    truth.trend = {250.0, 4.0};
    truth.harmonics[0] = {35.0, -20.0};
    truth.harmonics[1] = {12.0, 8.0};
    truth.amplitude = {0.02};
    return nlts::testkit::simulate_series(spec, truth, T, 25.0, seed);
}

void write_csv(const fs::path& p, const nlts::TimeSeries& y, bool labels) {
    std::ofstream out(p);
    if (labels) out << "month,value\n";
    char buf[64];
    for (int t = 1; t <= y.size(); ++t) {
        std::snprintf(buf, sizeof buf, "%.10g", y.values[t - 1]);
        if (labels)
            out << "m" << t << "," << buf << "\n";
        else
            out << buf << "\n";
    }
}

const std::string kFastOpts = " --nsamp 40 --nbest 4 --seed 3";

}  // namespace

TEST_CASE("fit writes a parseable report to stdout") {
    const auto dir = scratch("stdout");
    write_csv(dir / "demo.csv", sample_series(36, 1), true);
    const fs::path out = dir / "stdout.txt";
    const int rc = run_cli("fit --input " + (dir / "demo.csv").string() +
                           " --A 1 --B 2 --G 1" + kFastOpts + " > " +
                           out.string() + " 2> " + (dir / "err.txt").string());
    REQUIRE(rc == 0);
    const json rep = json::parse(slurp(out));
    CHECK(rep.at("series_id") == "demo");
    CHECK(rep.at("model").at("A") == 1);
    CHECK(rep.at("model").at("B") == 2);
    CHECK(rep.at("model").at("G") == 1);
    CHECK(rep.at("model").at("period") == 12);
    CHECK(rep.at("h") == 27);  // floor(0.75 * 36)
    CHECK(rep.at("seed") == 3);
    CHECK(rep.at("sigma").get<double>() > 0.0);
    CHECK(rep.at("coefficients").size() == 8);
    CHECK(rep.contains("shifts"));
    CHECK(rep.contains("outliers"));
    CHECK(rep.contains("warnings"));
}

TEST_CASE("fit without an input file is a usage error") {
    const auto dir = scratch("noinput");
    CHECK(run_cli("fit 2> " + (dir / "err.txt").string()) == 2);
}

TEST_CASE("fit on a missing file exits with the input-error code") {
    const auto dir = scratch("missing");
    CHECK(run_cli("fit --input " + (dir / "nope.csv").string() + " 2> " +
                  (dir / "err.txt").string()) == 2);
}

TEST_CASE("an unknown flag exits with the input-error code") {
    const auto dir = scratch("badflag");
    write_csv(dir / "demo.csv", sample_series(36, 1), false);
    CHECK(run_cli("fit --input " + (dir / "demo.csv").string() +
                  " --frobnicate 2> " + (dir / "err.txt").string()) == 2);
}

TEST_CASE("fit on an unparseable csv exits with the input-error code") {
    const auto dir = scratch("badcsv");
    std::ofstream(dir / "bad.csv") << "month,value\nm1,abc\n";
    CHECK(run_cli("fit --input " + (dir / "bad.csv").string() + " 2> " +
                  (dir / "err.txt").string()) == 2);
}

TEST_CASE("identical invocations are byte-identical and emit plot files") {
    const auto dir = scratch("repro");
    write_csv(dir / "demo.csv", sample_series(36, 4), false);
    const std::string common = "fit --input " + (dir / "demo.csv").string() +
                               " --A 1 --B 2 --G 1" + kFastOpts;
    const int rc1 = run_cli(common + " --out " + (dir / "r1.json").string() +
                            " --wedge " + (dir / "w1.svg").string() +
                            " --wedge-tsv " + (dir / "w1.tsv").string() +
                            " --profiles " + (dir / "p1.json").string());
    const int rc2 = run_cli(common + " --out " + (dir / "r2.json").string() +
                            " --wedge " + (dir / "w2.svg").string() +
                            " --wedge-tsv " + (dir / "w2.tsv").string() +
                            " --profiles " + (dir / "p2.json").string());
    REQUIRE(rc1 == 0);
    REQUIRE(rc2 == 0);
    const std::string r1 = slurp(dir / "r1.json");
    REQUIRE_FALSE(r1.empty());
    CHECK(r1 == slurp(dir / "r2.json"));
    const std::string svg = slurp(dir / "w1.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg == slurp(dir / "w2.svg"));
    const std::string tsv = slurp(dir / "w1.tsv");
    CHECK(tsv.find('\t') != std::string::npos);
    CHECK(tsv == slurp(dir / "w2.tsv"));
    const json profiles = json::parse(slurp(dir / "p1.json"));
    CHECK(profiles.contains("objective"));
    CHECK(profiles.contains("refinement"));
}

TEST_CASE("batch writes per-series reports and a matching summary") {
    const auto dir = scratch("batch");
    const fs::path in = dir / "in";
    const fs::path out = dir / "out";
    fs::create_directories(in);
    write_csv(in / "a.csv", sample_series(36, 10), false);
    write_csv(in / "b.csv", sample_series(36, 11), true);
    std::ofstream(in / "broken.csv") << "month,value\nm1,abc\n";
    const int rc = run_cli("batch --input-dir " + in.string() + " --out-dir " +
                           out.string() + " --A 1 --B 2 --G 1" + kFastOpts +
                           " 2> " + (dir / "err.txt").string());
    REQUIRE(rc == 0);

    const json summary = json::parse(slurp(out / "summary.json"));
    CHECK(summary.at("n_series") == 3);
    CHECK(summary.at("n_failures") == 1);

    int with_shifts = 0, outliers = 0, failures = 0;
    std::vector<std::string> ids;
    for (const auto& e : fs::directory_iterator(out)) {
        if (e.path().filename() == "summary.json") continue;
        const json rep = json::parse(slurp(e.path()));
        ids.push_back(rep.at("series_id"));
        if (rep.value("failed", false)) {
            ++failures;
            CHECK_FALSE(rep.at("warnings").empty());
        } else if (!rep.at("shifts").empty()) {
            ++with_shifts;
        }
        outliers += static_cast<int>(rep.at("outliers").size());
    }
    CHECK(ids.size() == 3);
    CHECK(failures == 1);
    CHECK(summary.at("n_with_shifts") == with_shifts);
    CHECK(summary.at("n_outliers_total") == outliers);
}

TEST_CASE("an empty input directory yields a zero-count summary") {
    const auto dir = scratch("empty");
    const fs::path in = dir / "in";
    const fs::path out = dir / "out";
    fs::create_directories(in);
    const int rc = run_cli("batch --input-dir " + in.string() + " --out-dir " +
                           out.string() + " 2> " + (dir / "err.txt").string());
    REQUIRE(rc == 0);
    const json summary = json::parse(slurp(out / "summary.json"));
    CHECK(summary.at("n_series") == 0);
    CHECK(summary.at("n_failures") == 0);
}

TEST_CASE("a missing input directory exits with the input-error code") {
    const auto dir = scratch("nodir");
    CHECK(run_cli("batch --input-dir " + (dir / "absent").string() +
                  " --out-dir " + (dir / "out").string() + " 2> " +
                  (dir / "err.txt").string()) == 2);
}
