#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlts/lts.hpp"

namespace nlts {

struct ShiftReport {
    int position = 0;
    double height = 0.0;
    double t_stat = 0.0;
    double p_value = 0.0;
    int pass = 0;  // 1-based detection pass
};

struct CoefReport {
    std::string name;
    double value = 0.0, se = 0.0, t = 0.0, p = 0.0;
};

struct SeriesReport {
    std::string series_id;
    ModelSpec model;
    int h = 0;
    std::uint64_t seed = 0;
    std::vector<ShiftReport> shifts;
    std::vector<int> outliers;  // 1-based time indices of flagged points
    std::vector<CoefReport> coefficients;  // from the last completed pass
    double sigma = 0.0;
    std::vector<std::string> warnings;
    Theta final_theta;
    bool failed = false;
};

/// Repeated shift detection: fit, and while the shift is significant at
/// opts.conf_level, subtract its step from the series and fit again, up to
/// max_shifts passes. Outliers and coefficients come from the last pass.
/// Each pass draws from an independent seed stream. When first_pass is
/// non-null it receives the full diagnostics of pass one.
SeriesReport detect_shifts(const TimeSeries& y, const ModelSpec& spec,
                           const LtsOptions& opts, int max_shifts,
                           FitResult* first_pass = nullptr);

struct BatchInput {
    std::string id;
    TimeSeries series;
};

struct BatchSummary {
    int n_series = 0;
    int n_with_shifts = 0;
    int n_outliers_total = 0;
    int n_failures = 0;
};

struct BatchResult {
    std::vector<SeriesReport> reports;  // input order
    BatchSummary summary;
};

/// Runs detect_shifts over a collection. Per-series seeds derive from
/// opts.seed and the series id, so results do not depend on ordering or on
/// the worker count. A failing series yields a report with failed = true.
BatchResult batch_run(const std::vector<BatchInput>& inputs,
                      const ModelSpec& spec, const LtsOptions& opts,
                      int max_shifts, int jobs);

}  // namespace nlts
