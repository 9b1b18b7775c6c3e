#include "nlts/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nlts/wedge.hpp"

namespace nlts {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

bool parse_value(std::string_view field, double& out) {
    field = trim(field);
    if (field.empty()) return false;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    // from_chars accepts "nan" and "inf" spellings; the series must be finite.
    return ec == std::errc{} && ptr == last && std::isfinite(out);
}

// Round to 10 significant digits so serialized output stays compact and
// byte-stable across platforms.
double round10(double v) {
    if (!std::isfinite(v)) return v;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::strtod(buf, nullptr);
}

}  // namespace

TimeSeries read_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError("cannot open " + path.string());
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());

    // Delimiter sniffing on the first non-blank line.
    char delim = ',';
    {
        std::istringstream ss(content);
        std::string line;
        while (std::getline(ss, line)) {
            if (trim(line).empty()) continue;
            if (line.find(';') != std::string::npos) delim = ';';
            break;
        }
    }

    TimeSeries ts;
    std::istringstream ss(content);
    std::string line;
    int line_no = 0;
    bool saw_columns2 = false, saw_any = false, header_skipped = false;
    while (std::getline(ss, line)) {
        ++line_no;
        const std::string_view sv = trim(line);
        if (sv.empty()) continue;

        std::vector<std::string_view> fields;
        std::size_t start = 0;
        const std::string_view raw(line);
        while (true) {
            const std::size_t pos = raw.find(delim, start);
            if (pos == std::string::npos) {
                fields.push_back(raw.substr(start));
                break;
            }
            fields.push_back(raw.substr(start, pos - start));
            start = pos + 1;
        }
        if (fields.size() > 2)
            throw CsvError("row " + std::to_string(line_no) +
                           ": expected 1 or 2 columns, got " +
                           std::to_string(fields.size()));

        const std::string_view value_field = fields.back();
        double v = 0.0;
        if (!parse_value(value_field, v)) {
            if (!saw_any && !header_skipped) {
                header_skipped = true;  // single header line
                continue;
            }
            throw CsvError("row " + std::to_string(line_no) +
                           ": cannot parse value '" +
                           std::string(trim(value_field)) + "'");
        }
        if (fields.size() == 2) {
            if (saw_any && !saw_columns2)
                throw CsvError("row " + std::to_string(line_no) +
                               ": expected 1 column, got 2");
            saw_columns2 = true;
            ts.labels.emplace_back(trim(fields[0]));
        } else if (saw_columns2) {
            throw CsvError("row " + std::to_string(line_no) +
                           ": expected 2 columns, got 1");
        }
        saw_any = true;
        ts.values.push_back(v);
    }
    if (ts.values.empty()) throw CsvError("no data rows in " + path.string());
    if (!ts.labels.empty() && ts.labels.size() != ts.values.size())
        throw CsvError("mixed 1- and 2-column rows in " + path.string());
    return ts;
}

nlohmann::ordered_json report_to_json(const SeriesReport& rep) {
    nlohmann::ordered_json j;
    j["series_id"] = rep.series_id;
    j["model"] = {{"A", rep.model.trend_degree},
                  {"B", rep.model.n_harmonics},
                  {"G", rep.model.amplitude_degree},
                  {"period", rep.model.period}};
    j["h"] = rep.h;
    j["seed"] = rep.seed;
    j["shifts"] = nlohmann::ordered_json::array();
    for (const auto& s : rep.shifts) {
        nlohmann::ordered_json js;
        js["position"] = s.position;
        js["height"] = round10(s.height);
        js["t_stat"] = round10(s.t_stat);
        js["p_value"] = round10(s.p_value);
        js["pass"] = s.pass;
        j["shifts"].push_back(std::move(js));
    }
    j["outliers"] = rep.outliers;
    j["coefficients"] = nlohmann::ordered_json::array();
    for (const auto& c : rep.coefficients) {
        nlohmann::ordered_json jc;
        jc["name"] = c.name;
        jc["value"] = round10(c.value);
        jc["se"] = round10(c.se);
        jc["t"] = round10(c.t);
        jc["p"] = round10(c.p);
        j["coefficients"].push_back(std::move(jc));
    }
    j["sigma"] = round10(rep.sigma);
    j["warnings"] = rep.warnings;
    if (rep.failed) j["failed"] = true;
    return j;
}

void write_report_json(const SeriesReport& rep,
                       const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << report_to_json(rep).dump(2) << "\n";
}

nlohmann::ordered_json profiles_to_json(const FitResult& fr) {
    const auto prof = objective_profile_data(fr.positions, fr.objective_profile);
    nlohmann::ordered_json j;
    j["positions"] = prof.positions;
    nlohmann::ordered_json obj;
    auto series = [&](auto pick) {
        std::vector<double> v;
        v.reserve(prof.boxes.size());
        for (const auto& b : prof.boxes) v.push_back(round10(pick(b)));
        return v;
    };
    obj["min"] = series([](const BoxSummary& b) { return b.min; });
    obj["q1"] = series([](const BoxSummary& b) { return b.q1; });
    obj["median"] = series([](const BoxSummary& b) { return b.median; });
    obj["q3"] = series([](const BoxSummary& b) { return b.q3; });
    obj["max"] = series([](const BoxSummary& b) { return b.max; });
    j["objective"] = std::move(obj);
    nlohmann::ordered_json ref;
    std::vector<int> rp;
    std::vector<double> rv;
    for (const auto& pt : fr.refinement_profile) {
        rp.push_back(pt.position);
        rv.push_back(round10(pt.value));
    }
    ref["positions"] = rp;
    ref["values"] = rv;
    ref["refined_position"] = fr.theta.shift_time;
    j["refinement"] = std::move(ref);
    return j;
}

void write_profiles_json(const FitResult& fr,
                         const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << profiles_to_json(fr).dump(2) << "\n";
}

nlohmann::ordered_json batch_summary_to_json(const BatchResult& batch) {
    nlohmann::ordered_json j;
    j["n_series"] = batch.summary.n_series;
    j["n_with_shifts"] = batch.summary.n_with_shifts;
    j["n_outliers_total"] = batch.summary.n_outliers_total;
    j["n_failures"] = batch.summary.n_failures;
    j["series"] = nlohmann::ordered_json::array();
    for (const auto& rep : batch.reports) {
        nlohmann::ordered_json js;
        js["id"] = rep.series_id;
        js["shifts"] = static_cast<int>(rep.shifts.size());
        js["outliers"] = static_cast<int>(rep.outliers.size());
        js["failed"] = rep.failed;
        j["series"].push_back(std::move(js));
    }
    return j;
}

}  // namespace nlts
