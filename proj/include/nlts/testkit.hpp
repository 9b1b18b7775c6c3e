#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nlts/model.hpp"

namespace nlts::testkit {

/// Monthly international airline passenger counts, 1949-1960 (T = 144),
/// with year-month labels.
TimeSeries airline_passengers();

/// Closed additive edit: offset applied to times from..to (1-based, inclusive).
struct Edit {
    int from = 0, to = 0;
    double offset = 0.0;
};

/// Applies edits cumulatively; validates 1 <= from <= to <= T.
TimeSeries with_offsets(const TimeSeries& y, std::span<const Edit> edits);

/// Three short bursts of isolated outliers (no level change).
std::vector<Edit> scattered_outlier_edits();

/// A persistent upward step at t = 68 plus a few isolated spikes around it.
std::vector<Edit> step_change_edits();

/// Two persistent steps (up at t = 31 and t = 100) for multi-pass detection.
std::vector<Edit> two_step_edits();

/// Synthetic benchmark: linear trend, three harmonics, strongly growing
/// amplitude and a large level shift at t = 40 (T = 150 by convention).
ModelSpec growth_shift_spec();
Theta growth_shift_theta();

/// Model values plus Gaussian noise with sd = sd(signal) / snr.
/// An infinite snr yields the exact model values.
TimeSeries simulate_series(const ModelSpec& spec, const Theta& theta, int T,
                           double snr, std::uint64_t seed);

/// Exact least-trimmed-squares location objective: the minimum over all
/// h-subsets of the centered sum of squares, found by scanning contiguous
/// windows of the sorted sample. Reference for scale calibration.
double lts_location_objective(std::span<const double> values, int h);

}  // namespace nlts::testkit
