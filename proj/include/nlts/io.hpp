#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "nlts/lts.hpp"
#include "nlts/monitor.hpp"

namespace nlts {

struct CsvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Reads a series from CSV: either one value column or label,value columns.
/// The delimiter (comma or semicolon) is auto-detected and a single header
/// line is skipped when its value field is not numeric. Parse errors report
/// 1-based physical line numbers. Throws CsvError.
TimeSeries read_series_csv(const std::filesystem::path& path);

/// Fit report with stable key order; numbers carry 10 significant digits.
nlohmann::ordered_json report_to_json(const SeriesReport& rep);
void write_report_json(const SeriesReport& rep,
                       const std::filesystem::path& path);

/// Candidate-objective boxplot data and the shift refinement trace of a fit.
nlohmann::ordered_json profiles_to_json(const FitResult& fr);
void write_profiles_json(const FitResult& fr,
                         const std::filesystem::path& path);

nlohmann::ordered_json batch_summary_to_json(const BatchResult& batch);

}  // namespace nlts
