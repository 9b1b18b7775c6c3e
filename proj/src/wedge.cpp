#include "nlts/wedge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nlts {

WedgeMatrix build_wedge(const std::vector<int>& positions,
                        const std::vector<std::vector<double>>& scaled_res) {
    if (positions.size() != scaled_res.size())
        throw std::invalid_argument("one residual row per position required");
    WedgeMatrix w;
    w.positions = positions;
    w.values.reserve(scaled_res.size());
    std::size_t ncol = scaled_res.empty() ? 0 : scaled_res.front().size();
    for (const auto& row : scaled_res) {
        if (row.size() != ncol)
            throw std::invalid_argument("ragged residual rows");
        std::vector<double> abs_row(row.size());
        for (std::size_t i = 0; i < row.size(); ++i) abs_row[i] = std::abs(row[i]);
        w.values.push_back(std::move(abs_row));
    }
    return w;
}

double clip_for_display(double v, double clip_low, double clip_high) {
    if (v < clip_low) return 0.0;
    if (v > clip_high) return clip_high;
    return v;
}

namespace {

struct Color {
    int r, g, b;
};

int lerp_channel(int a, int b, double t) {
    return static_cast<int>(std::lround(a + (b - a) * t));
}

// Ramp stops: clip_low pale yellow, half of clip_high red, clip_high black.
// Values below clip_low are clipped to zero beforehand and render as the
// white background.
Color heat_color(double clipped, double clip_low, double clip_high) {
    const Color lo{255, 224, 130}, mid{211, 47, 47}, hi{0, 0, 0};
    const double midpoint = 0.5 * clip_high;
    if (clipped <= midpoint && midpoint > clip_low) {
        const double t =
            std::clamp((clipped - clip_low) / (midpoint - clip_low), 0.0, 1.0);
        return {lerp_channel(lo.r, mid.r, t), lerp_channel(lo.g, mid.g, t),
                lerp_channel(lo.b, mid.b, t)};
    }
    const double t = midpoint < clip_high
        ? std::clamp((clipped - midpoint) / (clip_high - midpoint), 0.0, 1.0)
        : 1.0;
    return {lerp_channel(mid.r, hi.r, t), lerp_channel(mid.g, hi.g, t),
            lerp_channel(mid.b, hi.b, t)};
}

void append_hex(std::string& s, const Color& c) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
    s += buf;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

std::string wedge_svg_string(const WedgeMatrix& w) {
    const int nrows = static_cast<int>(w.positions.size());
    const int ncols = w.values.empty() ? 0 : static_cast<int>(w.values[0].size());
    const int cw = 6, ch = 4;
    const int left = 56, top = 16, right = 88, bottom = 36;
    const int plot_w = std::max(1, ncols * cw);
    const int plot_h = std::max(1, nrows * ch);
    const int width = left + plot_w + right;
    const int height = top + plot_h + bottom;

    std::string s;
    s.reserve(1 << 16);
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" fill=\"#ffffff\"/>\n";

    // Cells, run-length encoded per row; blank (below clip_low) runs skipped.
    // First position sits at the bottom of the plot.
    for (int r = 0; r < nrows; ++r) {
        const int y = top + (nrows - 1 - r) * ch;
        int c = 0;
        while (c < ncols) {
            const double v0 =
                clip_for_display(w.values[r][c], w.clip_low, w.clip_high);
            if (v0 == 0.0) {
                ++c;
                continue;
            }
            const Color col0 = heat_color(v0, w.clip_low, w.clip_high);
            int run = 1;
            while (c + run < ncols) {
                const double v1 = clip_for_display(w.values[r][c + run],
                                                   w.clip_low, w.clip_high);
                if (v1 == 0.0) break;
                const Color col1 = heat_color(v1, w.clip_low, w.clip_high);
                if (col1.r != col0.r || col1.g != col0.g || col1.b != col0.b)
                    break;
                ++run;
            }
            s += "<rect x=\"" + std::to_string(left + c * cw) + "\" y=\"" +
                 std::to_string(y) + "\" width=\"" + std::to_string(run * cw) +
                 "\" height=\"" + std::to_string(ch) + "\" fill=\"";
            append_hex(s, col0);
            s += "\"/>\n";
            c += run;
        }
    }

    s += "<rect x=\"" + std::to_string(left) + "\" y=\"" + std::to_string(top) +
         "\" width=\"" + std::to_string(plot_w) + "\" height=\"" +
         std::to_string(plot_h) +
         "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

    // Time axis: tick at t = 1 and every multiple of 10.
    for (int t = 1; t <= ncols; ++t) {
        if (t != 1 && t % 10 != 0) continue;
        const int x = left + t * cw - cw / 2;
        s += "<line x1=\"" + std::to_string(x) + "\" y1=\"" +
             std::to_string(top + plot_h) + "\" x2=\"" + std::to_string(x) +
             "\" y2=\"" + std::to_string(top + plot_h + 4) +
             "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        s += "<text x=\"" + std::to_string(x) + "\" y=\"" +
             std::to_string(top + plot_h + 15) +
             "\" font-family=\"sans-serif\" font-size=\"10\" "
             "text-anchor=\"middle\">" +
             std::to_string(t) + "</text>\n";
    }
    s += "<text x=\"" + std::to_string(left + plot_w / 2) + "\" y=\"" +
         std::to_string(top + plot_h + 30) +
         "\" font-family=\"sans-serif\" font-size=\"11\" "
         "text-anchor=\"middle\">time</text>\n";

    // Position axis: tick at the first row and every multiple of 10.
    for (int r = 0; r < nrows; ++r) {
        const int pos = w.positions[r];
        if (r != 0 && pos % 10 != 0) continue;
        const int yc = top + (nrows - 1 - r) * ch + ch / 2;
        s += "<line x1=\"" + std::to_string(left - 4) + "\" y1=\"" +
             std::to_string(yc) + "\" x2=\"" + std::to_string(left) +
             "\" y2=\"" + std::to_string(yc) +
             "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        s += "<text x=\"" + std::to_string(left - 7) + "\" y=\"" +
             std::to_string(yc + 3) +
             "\" font-family=\"sans-serif\" font-size=\"10\" "
             "text-anchor=\"end\">" +
             std::to_string(pos) + "</text>\n";
    }
    s += "<text x=\"12\" y=\"" + std::to_string(top + plot_h / 2) +
         "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 12 " + std::to_string(top + plot_h / 2) +
         ")\">shift position</text>\n";

    // Color scale from clip_low (bottom) to clip_high (top).
    const int bar_x = left + plot_w + 24, bar_w = 14;
    const int nseg = 40;
    for (int i = 0; i < nseg; ++i) {
        const double frac_lo = static_cast<double>(i) / nseg;
        const double frac_hi = static_cast<double>(i + 1) / nseg;
        const double mid_v =
            w.clip_low + (w.clip_high - w.clip_low) * (frac_lo + frac_hi) / 2.0;
        const int y0 = top + plot_h -
                       static_cast<int>(std::lround(frac_hi * plot_h));
        const int y1 = top + plot_h -
                       static_cast<int>(std::lround(frac_lo * plot_h));
        s += "<rect x=\"" + std::to_string(bar_x) + "\" y=\"" +
             std::to_string(y0) + "\" width=\"" + std::to_string(bar_w) +
             "\" height=\"" + std::to_string(y1 - y0) + "\" fill=\"";
        append_hex(s, heat_color(mid_v, w.clip_low, w.clip_high));
        s += "\"/>\n";
    }
    s += "<rect x=\"" + std::to_string(bar_x) + "\" y=\"" + std::to_string(top) +
         "\" width=\"" + std::to_string(bar_w) + "\" height=\"" +
         std::to_string(plot_h) +
         "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    for (double tick = 10.0 * std::ceil(w.clip_low / 10.0); tick <= w.clip_high;
         tick += 10.0) {
        const double frac = (tick - w.clip_low) / (w.clip_high - w.clip_low);
        const int yc =
            top + plot_h - static_cast<int>(std::lround(frac * plot_h));
        s += "<text x=\"" + std::to_string(bar_x + bar_w + 4) + "\" y=\"" +
             std::to_string(yc + 3) +
             "\" font-family=\"sans-serif\" font-size=\"10\">" + num(tick) +
             "</text>\n";
    }
    s += "<text x=\"" + std::to_string(bar_x + bar_w + 4) + "\" y=\"" +
         std::to_string(top + plot_h + 3) +
         "\" font-family=\"sans-serif\" font-size=\"10\">&lt;" +
         num(w.clip_low) + "</text>\n";

    s += "</svg>\n";
    return s;
}

void render_wedge_svg(const WedgeMatrix& w, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << wedge_svg_string(w);
}

std::string wedge_tsv_string(const WedgeMatrix& w) {
    std::string s = "position";
    const std::size_t ncols = w.values.empty() ? 0 : w.values[0].size();
    for (std::size_t t = 1; t <= ncols; ++t) s += "\t" + std::to_string(t);
    s += "\n";
    for (std::size_t r = 0; r < w.positions.size(); ++r) {
        s += std::to_string(w.positions[r]);
        for (double v : w.values[r])
            s += "\t" + num(clip_for_display(v, w.clip_low, w.clip_high));
        s += "\n";
    }
    return s;
}

void write_wedge_tsv(const WedgeMatrix& w, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << wedge_tsv_string(w);
}

BoxSummary five_number_summary(std::vector<double> values) {
    if (values.empty())
        throw std::invalid_argument("summary of an empty sample");
    std::sort(values.begin(), values.end());
    const auto quant = [&](double q) {
        const double pos = q * (values.size() - 1);
        const std::size_t i = static_cast<std::size_t>(pos);
        if (i + 1 >= values.size()) return values.back();
        const double frac = pos - i;
        return values[i] * (1.0 - frac) + values[i + 1] * frac;
    };
    return {values.front(), quant(0.25), quant(0.5), quant(0.75), values.back()};
}

ObjectiveProfile objective_profile_data(
    const std::vector<int>& positions,
    const std::vector<std::vector<double>>& pooled_objectives) {
    if (positions.size() != pooled_objectives.size())
        throw std::invalid_argument("one objective pool per position required");
    ObjectiveProfile prof;
    prof.positions = positions;
    prof.boxes.reserve(positions.size());
    prof.min_curve.reserve(positions.size());
    for (const auto& pool : pooled_objectives) {
        prof.boxes.push_back(five_number_summary(pool));
        prof.min_curve.push_back(prof.boxes.back().min);
    }
    return prof;
}

}  // namespace nlts
