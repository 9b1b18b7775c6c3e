#pragma once

#include <span>
#include <stdexcept>

#include "nlts/model.hpp"

namespace nlts {

/// Raised when a least-squares design is rank deficient beyond repair.
struct SingularFit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AlsOptions {
    double tol = 1e-6;  // relative coefficient change at which to stop
    int max_iter = 50;
};

struct AlsResult {
    Theta theta;
    int iterations = 0;
    bool converged = false;
    double subset_ssr = 0.0;  // sum of squared residuals over the fit subset
};

struct LsSolution {
    Eigen::VectorXd coeffs;
    bool rank_ok = false;
};

/// Least squares via column-pivoted Householder QR. rank_ok is false when the
/// smallest |R_ii| falls below 1e-10 times the largest (or the design is
/// empty/underdetermined); coeffs are still returned for inspection.
LsSolution ls_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& rhs);

/// Alternating least squares on the fit subset (1-based time indices).
/// Starts from the linearized fit with the amplitude polynomial at zero,
/// then alternates the trend/amplitude/shift step with the harmonics step
/// until the relative coefficient change drops below tol. shift_time stays
/// fixed throughout. Throws SingularFit when a step is rank deficient, and
/// std::invalid_argument when |subset| is smaller than the widest design.
AlsResult als_fit(const TimeSeries& y, const ModelSpec& spec,
                  std::span<const int> subset, int shift_time,
                  const AlsOptions& opts = {});

/// Warm-started variant: skips the linearized init and begins alternating
/// directly from `start` (start.shift_time is used as the fixed shift time).
AlsResult als_fit(const TimeSeries& y, const ModelSpec& spec,
                  std::span<const int> subset, const Theta& start,
                  const AlsOptions& opts = {});

namespace detail {

/// Shared-basis entry points used by the trimmed-fit engine; behave exactly
/// like the public overloads.
AlsResult als_fit_basis(const TimeSeries& y, const ModelSpec& spec,
                        const ModelBasis& basis, std::span<const int> subset,
                        int shift_time, const AlsOptions& opts);
AlsResult als_fit_basis_warm(const TimeSeries& y, const ModelSpec& spec,
                             const ModelBasis& basis, std::span<const int> subset,
                             const Theta& start, const AlsOptions& opts);

}  // namespace detail

}  // namespace nlts
