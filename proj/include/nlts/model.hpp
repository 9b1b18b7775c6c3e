#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nlts {

/// Shape of the fitted model: polynomial trend of degree A, B seasonal
/// harmonics whose joint amplitude follows 1 + polynomial of degree G,
/// and an optional level shift.
struct ModelSpec {
    int trend_degree = 1;      // A
    int n_harmonics = 2;       // B
    int amplitude_degree = 1;  // G
    int period = 12;
    bool with_shift = true;

    /// Number of free coefficients: (A+1) + 2B + G (+2 for the shift pair).
    int param_count() const;

    /// Throws std::invalid_argument on out-of-range settings
    /// (A in [0,3], B in [0,6], G in [0,2], period >= 2, G>0 requires B>0).
    void validate() const;

    bool operator==(const ModelSpec&) const = default;
};

/// Coefficient bundle. Time is 1-based throughout; shift_time is the first
/// index at which the level shift applies (0 when no shift term is in play).
struct Theta {
    std::vector<double> trend;                      // alpha_0 .. alpha_A
    std::vector<std::array<double, 2>> harmonics;   // (cos, sin) pairs per harmonic
    std::vector<double> amplitude;                  // gamma_1 .. gamma_G
    double shift_height = 0.0;                      // delta_1
    int shift_time = 0;                             // delta_2

    static Theta zeros(const ModelSpec& spec);

    /// All real coefficients in canonical order alpha, beta, gamma, delta_1.
    /// shift_time is excluded: it is an integer location, not a magnitude.
    std::vector<double> flatten(const ModelSpec& spec) const;
    static Theta unflatten(const ModelSpec& spec, std::span<const double> coeffs,
                           int shift_time);
};

struct TimeSeries {
    std::vector<double> values;
    std::vector<std::string> labels;  // optional; empty or one label per value

    int size() const { return static_cast<int>(values.size()); }
};

/// Relative change ||cur - prev|| / ||prev|| over flattened coefficients.
/// Returns +inf when prev has zero norm and cur does not, 0 when both do.
double relative_change(const Theta& current, const Theta& previous,
                       const ModelSpec& spec);

/// Seasonal block S_t = sum_b beta_b1 cos(2 pi b t / period) + beta_b2 sin(...).
/// Throws std::invalid_argument when spec.n_harmonics == 0.
double seasonal_value(const Theta& theta, const ModelSpec& spec, int t);

/// Full model value at time t (1-based):
/// trend + S_t * (1 + amplitude poly) + shift_height * [t >= shift_time].
double predict(const Theta& theta, const ModelSpec& spec, int t);

/// Raw residuals y_t - predict(t) for t = 1..T.
std::vector<double> residuals(const Theta& theta, const ModelSpec& spec,
                              const TimeSeries& y);

/// Regressor columns evaluated for t = 1..T, shared across fits on one series.
struct ModelBasis {
    Eigen::MatrixXd trend_pow;  // T x (A+1); column a holds t^a
    Eigen::MatrixXd harmonics;  // T x 2B; pairs (cos_b, sin_b)
    Eigen::MatrixXd amp_pow;    // T x G; column g-1 holds t^g

    static ModelBasis build(const ModelSpec& spec, int T);
};

/// Model values for all t via the precomputed basis; matches predict()
/// to floating-point roundoff.
Eigen::VectorXd predict_all(const Theta& theta, const ModelSpec& spec,
                            const ModelBasis& basis);

struct LinearSystem {
    Eigen::MatrixXd X;
    Eigen::VectorXd rhs;
};

/// Design for the initial linearized fit (amplitude poly frozen at zero):
/// columns [t^a | cos/sin pairs | shift indicator], response y.
/// subset holds 1-based time indices; must be non-empty.
LinearSystem design_init(const ModelSpec& spec, const ModelBasis& basis,
                         const TimeSeries& y, int shift_time,
                         std::span<const int> subset);

/// Design for the trend/amplitude/shift half-step: response y - S_prev,
/// columns [t^a | S_prev * t^g | shift indicator].
/// seasonal_prev holds S_t for t = 1..T under the previous harmonics.
LinearSystem design_step_a(const ModelSpec& spec, const ModelBasis& basis,
                           const TimeSeries& y,
                           std::span<const double> seasonal_prev, int shift_time,
                           std::span<const int> subset);

/// Design for the harmonics half-step: response y - trend - shift,
/// columns [cos_b * m_t | sin_b * m_t] with m_t = 1 + amplitude poly at t.
LinearSystem design_step_b(const ModelSpec& spec, const ModelBasis& basis,
                           const TimeSeries& y, const Theta& fixed,
                           std::span<const int> subset);

/// Canonical coefficient names in report order:
/// alpha0..alphaA, beta11,beta12,..., gamma1..., delta1.
std::vector<std::string> coefficient_names(const ModelSpec& spec);

}  // namespace nlts
