#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nlts/wedge.hpp"

using namespace nlts;

namespace {

// Fixed 5x10 matrix exercising blank, ramp and saturated cells.
WedgeMatrix golden_matrix() {
    std::vector<int> positions{4, 5, 6, 7, 8};
    std::vector<std::vector<double>> rows;
    for (int r = 0; r < 5; ++r) {
        std::vector<double> row;
        for (int c = 0; c < 10; ++c)
            row.push_back(((r * 13 + c * 7) % 61) * ((r + c) % 2 ? 1.0 : -1.0));
        rows.push_back(std::move(row));
    }
    return build_wedge(positions, rows);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("wedge stores absolute values row by row") {
    const auto w = build_wedge({68}, {{-3.0, 0.0, 3.0}});
    REQUIRE(w.values.size() == 1);
    CHECK(w.positions == std::vector<int>{68});
    CHECK(w.values[0] == std::vector<double>{3.0, 0.0, 3.0});
    CHECK(w.clip_low == 2.5);
    CHECK(w.clip_high == 50.0);
}

TEST_CASE("wedge rejects ragged input") {
    CHECK_THROWS_AS(build_wedge({1, 2}, {{1.0, 2.0}, {1.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_wedge({1}, {{1.0}, {2.0}}), std::invalid_argument);
}

TEST_CASE("a zero matrix clips to all blanks") {
    const auto w = build_wedge({1, 2}, {{0.0, 0.0}, {0.0, 0.0}});
    for (const auto& row : w.values)
        for (double v : row)
            CHECK(clip_for_display(v, w.clip_low, w.clip_high) == 0.0);
}

TEST_CASE("display clipping") {
    CHECK(clip_for_display(60.0, 2.5, 50.0) == 50.0);
    CHECK(clip_for_display(1.0, 2.5, 50.0) == 0.0);
    CHECK(clip_for_display(10.0, 2.5, 50.0) == 10.0);
    CHECK(clip_for_display(2.5, 2.5, 50.0) == 2.5);  // boundary passes through
    CHECK(clip_for_display(50.0, 2.5, 50.0) == 50.0);
}

TEST_CASE("clipping is idempotent and monotone") {
    const double lo = 2.5, hi = 50.0;
    double prev = -1.0;
    for (double v = 0.0; v <= 80.0; v += 0.25) {
        const double c = clip_for_display(v, lo, hi);
        CHECK(clip_for_display(c, lo, hi) == c);
        if (v >= lo) {
            CHECK(c >= prev);
            prev = c;
        }
    }
}

TEST_CASE("five number summary on known samples") {
    const auto b = five_number_summary({5, 1, 3, 2, 4});
    CHECK(b.min == 1);
    CHECK(b.q1 == 2);
    CHECK(b.median == 3);
    CHECK(b.q3 == 4);
    CHECK(b.max == 5);

    const auto c = five_number_summary({0, 1, 2, 3});
    CHECK(c.q1 == doctest::Approx(0.75));
    CHECK(c.median == doctest::Approx(1.5));
    CHECK(c.q3 == doctest::Approx(2.25));

    CHECK_THROWS_AS(five_number_summary({}), std::invalid_argument);
}

TEST_CASE("objective profile boxes and minimum curve") {
    const auto prof = objective_profile_data(
        {10, 11, 12},
        {{7.0, 7.0, 7.0}, {3.0, 9.0, 5.0}, {4.0}});
    REQUIRE(prof.boxes.size() == 3);
    CHECK(prof.boxes[0].min == prof.boxes[0].max);  // degenerate box
    CHECK(prof.min_curve == std::vector<double>{7.0, 3.0, 4.0});
    CHECK(prof.boxes[2].min == prof.boxes[2].max);  // single sample

    CHECK_THROWS_AS(objective_profile_data({1}, {}), std::invalid_argument);
}

TEST_CASE("svg single cells render white or black") {
    // Below the clip threshold nothing is drawn over the white background,
    // so a zero cell and a sub-threshold cell produce identical output.
    WedgeMatrix zero = build_wedge({5}, {{0.0}});
    WedgeMatrix faint = build_wedge({5}, {{1.0}});
    CHECK(wedge_svg_string(zero) == wedge_svg_string(faint));

    WedgeMatrix sat = build_wedge({5}, {{50.0}});
    const auto s1 = wedge_svg_string(sat);
    // The single saturated cell sits at the plot origin in pure black.
    CHECK(s1.find("<rect x=\"56\" y=\"16\" width=\"6\" height=\"4\" "
                  "fill=\"#000000\"/>") != std::string::npos);
}

TEST_CASE("svg output is deterministic") {
    const auto w = golden_matrix();
    CHECK(wedge_svg_string(w) == wedge_svg_string(w));
    CHECK(wedge_tsv_string(w) == wedge_tsv_string(w));
}

TEST_CASE("svg golden file") {
    const auto w = golden_matrix();
    CHECK(wedge_svg_string(w) == slurp(std::string(NLTS_GOLDEN_DIR) +
                                       "/wedge_golden.svg"));
}

TEST_CASE("tsv golden file and layout") {
    const auto w = golden_matrix();
    const auto tsv = wedge_tsv_string(w);
    CHECK(tsv == slurp(std::string(NLTS_GOLDEN_DIR) + "/wedge_golden.tsv"));

    // Header row carries the time indices; each data row starts with its
    // position and holds clipped display values.
    std::istringstream in(tsv);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line.rfind("position\t1\t2\t", 0) == 0);
    int rows = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tok;
        std::getline(ls, tok, '\t');
        CHECK(std::stoi(tok) == w.positions[rows]);
        int cols = 0;
        while (std::getline(ls, tok, '\t')) {
            const double v = std::stod(tok);
            CHECK((v == 0.0 || (v >= w.clip_low && v <= w.clip_high)));
            ++cols;
        }
        CHECK(cols == 10);
        ++rows;
    }
    CHECK(rows == 5);
}
