#include "nlts/monitor.hpp"

#include <atomic>
#include <mutex>
#include <thread>

#include "nlts/rng.hpp"

namespace nlts {

namespace {

void fill_from_fit(SeriesReport& rep, const FitResult& fr) {
    rep.h = fr.h;
    rep.sigma = fr.scale.sigma;
    rep.final_theta = fr.theta;
    rep.outliers.clear();
    for (std::size_t i = 0; i < fr.outlier_flags.size(); ++i)
        if (fr.outlier_flags[i]) rep.outliers.push_back(static_cast<int>(i) + 1);
    rep.coefficients.clear();
    for (std::size_t j = 0; j < fr.coef.size(); ++j)
        rep.coefficients.push_back({fr.coef_names[j], fr.coef[j], fr.coef_se[j],
                                    fr.t_stats[j], fr.p_values[j]});
    for (const auto& w : fr.warnings) rep.warnings.push_back(w);
}

}  // namespace

SeriesReport detect_shifts(const TimeSeries& y, const ModelSpec& spec,
                           const LtsOptions& opts, int max_shifts,
                           FitResult* first_pass) {
    if (max_shifts < 1)
        throw std::invalid_argument("max_shifts must be at least 1");
    SeriesReport rep;
    rep.model = spec;
    rep.seed = opts.seed;

    TimeSeries working = y;
    for (int pass = 1; pass <= max_shifts; ++pass) {
        LtsOptions po = opts;
        po.seed = Rng::mix(opts.seed, static_cast<std::uint64_t>(pass) << 32);
        FitResult fr;
        try {
            fr = nlts_fit(working, spec, po);
        } catch (const std::exception& e) {
            if (pass == 1) throw;
            rep.warnings.push_back("pass " + std::to_string(pass) +
                                   " failed: " + e.what());
            break;
        }
        if (pass == 1 && first_pass) *first_pass = fr;
        rep.warnings.clear();  // keep only the last pass's fit warnings
        fill_from_fit(rep, fr);
        if (!spec.with_shift || !fr.shift_significant) break;
        const std::size_t dpos = fr.coef.size() - 1;  // delta1 is last
        rep.shifts.push_back({fr.theta.shift_time, fr.theta.shift_height,
                              fr.t_stats[dpos], fr.p_values[dpos], pass});
        for (int t = fr.theta.shift_time; t <= working.size(); ++t)
            working.values[t - 1] -= fr.theta.shift_height;
    }
    return rep;
}

BatchResult batch_run(const std::vector<BatchInput>& inputs,
                      const ModelSpec& spec, const LtsOptions& opts,
                      int max_shifts, int jobs) {
    BatchResult out;
    out.reports.resize(inputs.size());
    const int n = static_cast<int>(inputs.size());
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            LtsOptions po = opts;
            po.seed = Rng::mix(opts.seed, Rng::hash_str(inputs[i].id));
            SeriesReport rep;
            try {
                rep = detect_shifts(inputs[i].series, spec, po, max_shifts);
            } catch (const std::exception& e) {
                rep = SeriesReport{};
                rep.model = spec;
                rep.seed = po.seed;
                rep.failed = true;
                rep.warnings.push_back(std::string("fit failed: ") + e.what());
            }
            rep.series_id = inputs[i].id;
            out.reports[i] = std::move(rep);
        }
    };
    const int nw = std::max(1, std::min(jobs, n));
    if (nw <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < nw; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    out.summary.n_series = n;
    for (const auto& rep : out.reports) {
        if (rep.failed) {
            ++out.summary.n_failures;
            continue;
        }
        if (!rep.shifts.empty()) ++out.summary.n_with_shifts;
        out.summary.n_outliers_total += static_cast<int>(rep.outliers.size());
    }
    return out;
}

}  // namespace nlts
