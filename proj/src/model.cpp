#include "nlts/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nlts {

int ModelSpec::param_count() const {
    return (trend_degree + 1) + 2 * n_harmonics + amplitude_degree +
           (with_shift ? 2 : 0);
}

void ModelSpec::validate() const {
    if (trend_degree < 0 || trend_degree > 3)
        throw std::invalid_argument("trend degree must be in [0, 3]");
    if (n_harmonics < 0 || n_harmonics > 6)
        throw std::invalid_argument("number of harmonics must be in [0, 6]");
    if (amplitude_degree < 0 || amplitude_degree > 2)
        throw std::invalid_argument("amplitude degree must be in [0, 2]");
    if (period < 2)
        throw std::invalid_argument("period must be at least 2");
    if (amplitude_degree > 0 && n_harmonics == 0)
        throw std::invalid_argument(
            "time-varying amplitude requires at least one harmonic");
}

Theta Theta::zeros(const ModelSpec& spec) {
    Theta th;
    th.trend.assign(spec.trend_degree + 1, 0.0);
    th.harmonics.assign(spec.n_harmonics, {0.0, 0.0});
    th.amplitude.assign(spec.amplitude_degree, 0.0);
    th.shift_height = 0.0;
    th.shift_time = 0;
    return th;
}

std::vector<double> Theta::flatten(const ModelSpec& spec) const {
    std::vector<double> out;
    out.reserve(spec.param_count());
    out.insert(out.end(), trend.begin(), trend.end());
    for (const auto& h : harmonics) {
        out.push_back(h[0]);
        out.push_back(h[1]);
    }
    out.insert(out.end(), amplitude.begin(), amplitude.end());
    if (spec.with_shift) out.push_back(shift_height);
    return out;
}

Theta Theta::unflatten(const ModelSpec& spec, std::span<const double> coeffs,
                       int shift_time) {
    const std::size_t expect =
        static_cast<std::size_t>(spec.trend_degree + 1 + 2 * spec.n_harmonics +
                                 spec.amplitude_degree + (spec.with_shift ? 1 : 0));
    if (coeffs.size() != expect)
        throw std::invalid_argument("coefficient vector has wrong length");
    Theta th = Theta::zeros(spec);
    std::size_t k = 0;
    for (auto& a : th.trend) a = coeffs[k++];
    for (auto& h : th.harmonics) {
        h[0] = coeffs[k++];
        h[1] = coeffs[k++];
    }
    for (auto& g : th.amplitude) g = coeffs[k++];
    if (spec.with_shift) {
        th.shift_height = coeffs[k++];
        th.shift_time = shift_time;
    }
    return th;
}

double relative_change(const Theta& current, const Theta& previous,
                       const ModelSpec& spec) {
    const auto cur = current.flatten(spec);
    const auto prev = previous.flatten(spec);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
        const double d = cur[i] - prev[i];
        num += d * d;
        den += prev[i] * prev[i];
    }
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::sqrt(num / den);
}

double seasonal_value(const Theta& theta, const ModelSpec& spec, int t) {
    if (spec.n_harmonics == 0)
        throw std::invalid_argument("seasonal_value requires n_harmonics > 0");
    double s = 0.0;
    for (int b = 1; b <= spec.n_harmonics; ++b) {
        const double ang = 2.0 * M_PI * b * t / spec.period;
        s += theta.harmonics[b - 1][0] * std::cos(ang) +
             theta.harmonics[b - 1][1] * std::sin(ang);
    }
    return s;
}

double predict(const Theta& theta, const ModelSpec& spec, int t) {
    double trend = 0.0, tp = 1.0;
    for (int a = 0; a <= spec.trend_degree; ++a) {
        trend += theta.trend[a] * tp;
        tp *= t;
    }
    double value = trend;
    if (spec.n_harmonics > 0) {
        double m = 1.0;
        tp = t;
        for (int g = 1; g <= spec.amplitude_degree; ++g) {
            m += theta.amplitude[g - 1] * tp;
            tp *= t;
        }
        value += seasonal_value(theta, spec, t) * m;
    }
    if (spec.with_shift && t >= theta.shift_time && theta.shift_time > 0)
        value += theta.shift_height;
    return value;
}

std::vector<double> residuals(const Theta& theta, const ModelSpec& spec,
                              const TimeSeries& y) {
    std::vector<double> r(y.values.size());
    for (int t = 1; t <= y.size(); ++t)
        r[t - 1] = y.values[t - 1] - predict(theta, spec, t);
    return r;
}

ModelBasis ModelBasis::build(const ModelSpec& spec, int T) {
    ModelBasis b;
    b.trend_pow.resize(T, spec.trend_degree + 1);
    b.harmonics.resize(T, 2 * spec.n_harmonics);
    b.amp_pow.resize(T, spec.amplitude_degree);
    for (int t = 1; t <= T; ++t) {
        double tp = 1.0;
        for (int a = 0; a <= spec.trend_degree; ++a) {
            b.trend_pow(t - 1, a) = tp;
            tp *= t;
        }
        for (int h = 1; h <= spec.n_harmonics; ++h) {
            const double ang = 2.0 * M_PI * h * t / spec.period;
            b.harmonics(t - 1, 2 * (h - 1)) = std::cos(ang);
            b.harmonics(t - 1, 2 * (h - 1) + 1) = std::sin(ang);
        }
        tp = t;
        for (int g = 1; g <= spec.amplitude_degree; ++g) {
            b.amp_pow(t - 1, g - 1) = tp;
            tp *= t;
        }
    }
    return b;
}

namespace {

// m_t = 1 + sum_g gamma_g t^g for one 0-based row of the basis.
double amp_multiplier(const Theta& theta, const ModelSpec& spec,
                      const ModelBasis& basis, int row) {
    double m = 1.0;
    for (int g = 0; g < spec.amplitude_degree; ++g)
        m += theta.amplitude[g] * basis.amp_pow(row, g);
    return m;
}

double seasonal_from_basis(const Theta& theta, const ModelSpec& spec,
                           const ModelBasis& basis, int row) {
    double s = 0.0;
    for (int b = 0; b < spec.n_harmonics; ++b)
        s += theta.harmonics[b][0] * basis.harmonics(row, 2 * b) +
             theta.harmonics[b][1] * basis.harmonics(row, 2 * b + 1);
    return s;
}

}  // namespace

Eigen::VectorXd predict_all(const Theta& theta, const ModelSpec& spec,
                            const ModelBasis& basis) {
    const int T = static_cast<int>(basis.trend_pow.rows());
    Eigen::VectorXd out(T);
    for (int i = 0; i < T; ++i) {
        double v = 0.0;
        for (int a = 0; a <= spec.trend_degree; ++a)
            v += theta.trend[a] * basis.trend_pow(i, a);
        if (spec.n_harmonics > 0)
            v += seasonal_from_basis(theta, spec, basis, i) *
                 amp_multiplier(theta, spec, basis, i);
        if (spec.with_shift && (i + 1) >= theta.shift_time && theta.shift_time > 0)
            v += theta.shift_height;
        out[i] = v;
    }
    return out;
}

LinearSystem design_init(const ModelSpec& spec, const ModelBasis& basis,
                         const TimeSeries& y, int shift_time,
                         std::span<const int> subset) {
    if (subset.empty()) throw std::invalid_argument("design subset is empty");
    const int n = static_cast<int>(subset.size());
    const int ntrend = spec.trend_degree + 1;
    const int ncols = ntrend + 2 * spec.n_harmonics + (spec.with_shift ? 1 : 0);
    LinearSystem sys;
    sys.X.resize(n, ncols);
    sys.rhs.resize(n);
    for (int i = 0; i < n; ++i) {
        const int row = subset[i] - 1;
        sys.X.block(i, 0, 1, ntrend) = basis.trend_pow.row(row);
        sys.X.block(i, ntrend, 1, 2 * spec.n_harmonics) = basis.harmonics.row(row);
        if (spec.with_shift)
            sys.X(i, ncols - 1) = subset[i] >= shift_time ? 1.0 : 0.0;
        sys.rhs[i] = y.values[row];
    }
    return sys;
}

LinearSystem design_step_a(const ModelSpec& spec, const ModelBasis& basis,
                           const TimeSeries& y,
                           std::span<const double> seasonal_prev, int shift_time,
                           std::span<const int> subset) {
    if (subset.empty()) throw std::invalid_argument("design subset is empty");
    if (seasonal_prev.size() != static_cast<std::size_t>(y.size()))
        throw std::invalid_argument("seasonal_prev has wrong length");
    const int n = static_cast<int>(subset.size());
    const int ntrend = spec.trend_degree + 1;
    const int ncols = ntrend + spec.amplitude_degree + (spec.with_shift ? 1 : 0);
    LinearSystem sys;
    sys.X.resize(n, ncols);
    sys.rhs.resize(n);
    for (int i = 0; i < n; ++i) {
        const int row = subset[i] - 1;
        sys.X.block(i, 0, 1, ntrend) = basis.trend_pow.row(row);
        for (int g = 0; g < spec.amplitude_degree; ++g)
            sys.X(i, ntrend + g) = seasonal_prev[row] * basis.amp_pow(row, g);
        if (spec.with_shift)
            sys.X(i, ncols - 1) = subset[i] >= shift_time ? 1.0 : 0.0;
        sys.rhs[i] = y.values[row] - seasonal_prev[row];
    }
    return sys;
}

LinearSystem design_step_b(const ModelSpec& spec, const ModelBasis& basis,
                           const TimeSeries& y, const Theta& fixed,
                           std::span<const int> subset) {
    if (subset.empty()) throw std::invalid_argument("design subset is empty");
    if (spec.n_harmonics == 0)
        throw std::invalid_argument("harmonics step requires n_harmonics > 0");
    const int n = static_cast<int>(subset.size());
    LinearSystem sys;
    sys.X.resize(n, 2 * spec.n_harmonics);
    sys.rhs.resize(n);
    for (int i = 0; i < n; ++i) {
        const int row = subset[i] - 1;
        const double m = amp_multiplier(fixed, spec, basis, row);
        for (int c = 0; c < 2 * spec.n_harmonics; ++c)
            sys.X(i, c) = basis.harmonics(row, c) * m;
        double fitted = 0.0;
        for (int a = 0; a <= spec.trend_degree; ++a)
            fitted += fixed.trend[a] * basis.trend_pow(row, a);
        if (spec.with_shift && subset[i] >= fixed.shift_time && fixed.shift_time > 0)
            fitted += fixed.shift_height;
        sys.rhs[i] = y.values[row] - fitted;
    }
    return sys;
}

std::vector<std::string> coefficient_names(const ModelSpec& spec) {
    std::vector<std::string> names;
    for (int a = 0; a <= spec.trend_degree; ++a)
        names.push_back("alpha" + std::to_string(a));
    for (int b = 1; b <= spec.n_harmonics; ++b) {
        names.push_back("beta" + std::to_string(b) + "1");
        names.push_back("beta" + std::to_string(b) + "2");
    }
    for (int g = 1; g <= spec.amplitude_degree; ++g)
        names.push_back("gamma" + std::to_string(g));
    if (spec.with_shift) names.push_back("delta1");
    return names;
}

}  // namespace nlts
