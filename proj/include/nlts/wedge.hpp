#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nlts/lts.hpp"

namespace nlts {

/// Heat-map matrix of |standardized residual| by candidate shift position
/// (rows, ascending) and time (columns).
struct WedgeMatrix {
    std::vector<int> positions;               // one per row
    std::vector<std::vector<double>> values;  // absolute values, row-major
    double clip_low = 2.5;                    // values below render as blank
    double clip_high = 50.0;                  // values above saturate
};

/// Assembles the matrix from per-position standardized residual rows
/// (signed on input; stored absolute). Throws on ragged input or when
/// row count differs from the position count.
WedgeMatrix build_wedge(const std::vector<int>& positions,
                        const std::vector<std::vector<double>>& scaled_res);

/// Display value: 0 below clip_low, clip_high above, identity between.
double clip_for_display(double v, double clip_low, double clip_high);

/// Deterministic standalone SVG heat map (byte-stable across runs).
void render_wedge_svg(const WedgeMatrix& w, const std::filesystem::path& path);
std::string wedge_svg_string(const WedgeMatrix& w);

/// Tab-separated dump: header row "position" + time indices, then one row
/// of clipped display values per candidate position.
void write_wedge_tsv(const WedgeMatrix& w, const std::filesystem::path& path);
std::string wedge_tsv_string(const WedgeMatrix& w);

struct BoxSummary {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

/// Five-number summaries of the pooled candidate objectives per position,
/// plus the lower envelope (minimum per position).
struct ObjectiveProfile {
    std::vector<int> positions;
    std::vector<BoxSummary> boxes;
    std::vector<double> min_curve;
};

ObjectiveProfile objective_profile_data(
    const std::vector<int>& positions,
    const std::vector<std::vector<double>>& pooled_objectives);

/// Quartiles by linear interpolation at rank q * (n - 1).
BoxSummary five_number_summary(std::vector<double> values);

}  // namespace nlts
