#include "nlts/testkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "nlts/rng.hpp"

namespace nlts::testkit {

TimeSeries airline_passengers() {
    static const int counts[144] = {
        112, 118, 132, 129, 121, 135, 148, 148, 136, 119, 104, 118,
        115, 126, 141, 135, 125, 149, 170, 170, 158, 133, 114, 140,
        145, 150, 178, 163, 172, 178, 199, 199, 184, 162, 146, 166,
        171, 180, 193, 181, 183, 218, 230, 242, 209, 191, 172, 194,
        196, 196, 236, 235, 229, 243, 264, 272, 237, 211, 180, 201,
        204, 188, 235, 227, 234, 264, 302, 293, 259, 229, 203, 229,
        242, 233, 267, 269, 270, 315, 364, 347, 312, 274, 237, 278,
        284, 277, 317, 313, 318, 374, 413, 405, 355, 306, 271, 306,
        315, 301, 356, 348, 355, 422, 465, 467, 404, 347, 305, 336,
        340, 318, 362, 348, 363, 435, 491, 505, 404, 359, 310, 337,
        360, 342, 406, 396, 420, 472, 548, 559, 463, 407, 362, 405,
        417, 391, 419, 461, 472, 535, 622, 606, 508, 461, 390, 432};
    TimeSeries ts;
    ts.values.reserve(144);
    ts.labels.reserve(144);
    for (int i = 0; i < 144; ++i) {
        ts.values.push_back(counts[i]);
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02d", 1949 + i / 12, 1 + i % 12);
        ts.labels.emplace_back(buf);
    }
    return ts;
}

TimeSeries with_offsets(const TimeSeries& y, std::span<const Edit> edits) {
    TimeSeries out = y;
    for (const auto& e : edits) {
        if (e.from < 1 || e.to < e.from || e.to > out.size())
            throw std::invalid_argument("edit range out of bounds");
        for (int t = e.from; t <= e.to; ++t) out.values[t - 1] += e.offset;
    }
    return out;
}

std::vector<Edit> scattered_outlier_edits() {
    return {{50, 55, -300.0}, {122, 127, 300.0}, {130, 134, -400.0}};
}

std::vector<Edit> step_change_edits() {
    return {{68, 144, 1300.0}, {45, 45, -800.0}, {67, 67, -600.0},
            {68, 69, 800.0}};
}

std::vector<Edit> two_step_edits() {
    return {{1, 30, -100.0}, {100, 144, 200.0}};
}

ModelSpec growth_shift_spec() {
    ModelSpec spec;
    spec.trend_degree = 1;
    spec.n_harmonics = 3;
    spec.amplitude_degree = 1;
    spec.period = 12;
    spec.with_shift = true;
    return spec;
}

Theta growth_shift_theta() {
    const ModelSpec spec = growth_shift_spec();
    Theta th = Theta::zeros(spec);
    th.trend = {1.0, 1.0};
    th.harmonics = {{20.0, -20.0}, {12.0, -12.0}, {4.0, -4.0}};
    th.amplitude = {8.88};
    th.shift_height = 13000.0;
    th.shift_time = 40;
    return th;
}

TimeSeries simulate_series(const ModelSpec& spec, const Theta& theta, int T,
                           double snr, std::uint64_t seed) {
    if (T < 1) throw std::invalid_argument("series length must be positive");
    if (!(snr > 0.0)) throw std::invalid_argument("snr must be positive");
    TimeSeries ts;
    ts.values.resize(T);
    for (int t = 1; t <= T; ++t) ts.values[t - 1] = predict(theta, spec, t);
    if (std::isinf(snr)) return ts;
    const double mean =
        std::accumulate(ts.values.begin(), ts.values.end(), 0.0) / T;
    double ss = 0.0;
    for (double v : ts.values) ss += (v - mean) * (v - mean);
    const double signal_sd = T > 1 ? std::sqrt(ss / (T - 1)) : 0.0;
    const double noise_sd = signal_sd / snr;
    Rng rng(seed);
    for (auto& v : ts.values) v += noise_sd * rng.normal();
    return ts;
}

double lts_location_objective(std::span<const double> values, int h) {
    const int n = static_cast<int>(values.size());
    if (h < 1 || h > n)
        throw std::invalid_argument("coverage h out of range");
    std::vector<double> x(values.begin(), values.end());
    std::sort(x.begin(), x.end());
    // Prefix sums; the optimal h-subset is a contiguous window in sort order.
    std::vector<double> ps(n + 1, 0.0), ps2(n + 1, 0.0);
    for (int i = 0; i < n; ++i) {
        ps[i + 1] = ps[i] + x[i];
        ps2[i + 1] = ps2[i] + x[i] * x[i];
    }
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i + h <= n; ++i) {
        const double s = ps[i + h] - ps[i];
        const double s2 = ps2[i + h] - ps2[i];
        best = std::min(best, s2 - s * s / h);
    }
    return std::max(0.0, best);
}

}  // namespace nlts::testkit
