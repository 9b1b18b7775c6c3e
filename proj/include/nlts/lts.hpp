#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nlts/als.hpp"
#include "nlts/model.hpp"
#include "nlts/rng.hpp"

namespace nlts {
class Rng;

struct LtsOptions {
    /// Coverage count h with T/2 <= h < T; 0 selects floor(0.75 * T).
    int h = 0;
    int n_trials = 250;      // elemental starts per candidate shift position
    int n_best = 10;         // candidates kept per position
    /// Shift positions scanned are margin+1 .. T-margin; 0 selects max(3, T/20).
    int margin = 0;
    double huber_b = 2.0;    // clipping constant of the refinement loss
    int window_width = 15;   // odd width of the shift refinement window
    double conf_level = 0.99;
    std::uint64_t seed = 0;
    AlsOptions als;
    int max_cstep_iter = 100;
    int jobs = 1;            // worker threads for the position scan

    int resolved_h(int T, int p) const;
    int resolved_margin(int T) const;
};

/// One trimmed-fit candidate: coefficients, the active subset, and the
/// trimmed objective (sum of the h smallest squared residuals, full series).
struct CandidateFit {
    Theta theta;
    std::vector<int> subset;        // sorted 1-based time indices, size h
    double objective = 0.0;
    std::vector<double> residuals;  // raw residuals over the full series
};

struct RefinementPoint {
    int position = 0;
    double value = 0.0;
};

struct ScaleEstimate {
    double sigma = 0.0;
    bool perfect_fit = false;
};

struct FitResult {
    Theta theta;
    double objective = 0.0;
    int h = 0;
    ScaleEstimate scale;
    std::vector<double> scaled_res;  // residuals / sigma at the optimum
    std::vector<char> outlier_flags; // 1 where |scaled_res| exceeds the cutoff

    std::vector<std::string> coef_names;
    std::vector<double> coef;
    std::vector<double> coef_se;
    std::vector<double> t_stats;
    std::vector<double> p_values;
    bool shift_significant = false;

    /// Diagnostics from the position scan, aligned with `positions`:
    /// per-position standardized residual rows and pooled objectives.
    std::vector<int> positions;
    std::vector<std::vector<double>> position_scaled_res;
    std::vector<std::vector<double>> objective_profile;
    std::vector<RefinementPoint> refinement_profile;

    std::vector<std::string> warnings;
};

/// Sum of the h smallest squared residuals over the full series.
double trimmed_objective(const Theta& theta, const ModelSpec& spec,
                         const TimeSeries& y, int h);

/// Builds a candidate from coefficients: residuals on the full series, the
/// h-smallest subset (ties broken by smaller time index), and the objective.
CandidateFit make_candidate(const Theta& theta, const ModelSpec& spec,
                            const TimeSeries& y, int h);

/// Concentration step: select the h best-fitting points of `cand`, then
/// refit by warm-started alternating LS on that subset. The refit objective
/// never exceeds cand.objective; when the refit fails to descend the incoming
/// candidate is returned unchanged (it is a fixed point of the map).
CandidateFit cstep(const TimeSeries& y, const ModelSpec& spec,
                   const ModelBasis& basis, const CandidateFit& cand,
                   const LtsOptions& opts);

/// Iterates cstep until the active subset repeats (or max_cstep_iter).
CandidateFit cstep_converge(const TimeSeries& y, const ModelSpec& spec,
                            const ModelBasis& basis, const CandidateFit& cand,
                            const LtsOptions& opts);

/// Random elemental index set of size max(p-1, columns of the linearized
/// init design), containing shift_pos and at least one earlier index;
/// remaining draws are uniform with duplicates redrawn. Sorted ascending.
/// Pass shift_pos = 0 for the no-shift variant (no anchoring).
std::vector<int> sample_elemental(int T, const ModelSpec& spec, int shift_pos,
                                  Rng& rng);

struct PositionFits {
    std::vector<CandidateFit> best;         // ascending objective, <= n_best
    std::vector<double> pooled_objectives;  // all converged candidates' objectives
};

/// Candidate pool for one shift position: n_trials elemental starts, two
/// concentration steps each, n_best survivors concentrated to convergence,
/// then merged with the concentrated warm starts.
PositionFits fits_for_shift(const TimeSeries& y, const ModelSpec& spec,
                            int shift_pos,
                            std::span<const CandidateFit> warm_starts,
                            const LtsOptions& opts);

/// Residuals standardized by the raw trimmed scale sqrt(objective / h);
/// a zero objective falls back to scale 1 so exact-fit points stay zero.
std::vector<double> scaled_residuals(const Theta& theta, const ModelSpec& spec,
                                     const TimeSeries& y, int h);

/// Variance inflation of the truncated-normal trimmed sum; equals 1 at h = T.
double consistency_factor(int h, int T);

/// Finite-sample correction from the bundled simulation table, interpolated
/// bilinearly in (log T, h/T); 1 beyond the table and at h = T.
double small_sample_factor(int h, int T);

/// sigma = small_sample * sqrt(objective / (h * consistency)); a zero
/// objective yields the sentinel 1e-12 * series_scale and perfect_fit = true.
ScaleEstimate estimate_scale(double objective, int h, int T,
                             double series_scale = 1.0);

/// Huber rho: x^2/2 inside [-b, b], b|x| - b^2/2 outside.
double huber_rho(double x, double b);

struct ShiftRefinement {
    int position = 0;
    std::vector<RefinementPoint> profile;
};

/// Local scan of the shift time over a window centered at theta.shift_time:
/// minimizes the clipped-loss sum of standardized residuals within the
/// window. Ties keep the incoming position, then the smaller candidate.
ShiftRefinement refine_shift(const TimeSeries& y, const ModelSpec& spec,
                             const Theta& theta, double sigma,
                             const LtsOptions& opts);

/// Flags entries with |scaled residual| above the two-sided normal cutoff
/// at conf_level (e.g. 2.576 at 0.99).
std::vector<char> flag_outliers(std::span<const double> scaled_res,
                                double conf_level);

/// Full robust fit: scans candidate shift positions with elemental restarts
/// and warm-start carryover, refines the shift time, reweights, and reports
/// coefficients with standard errors. The scan diagnostics feed the wedge
/// and objective-profile plots.
FitResult nlts_fit(const TimeSeries& y, const ModelSpec& spec,
                   const LtsOptions& opts = {});

}  // namespace nlts
