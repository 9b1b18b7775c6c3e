#include "nlts/lts.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace nlts {

namespace {

#include "scale_table.inc"

double sample_sd(const std::vector<double>& v) {
    const std::size_t n = v.size();
    if (n < 2) return 0.0;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (n - 1));
}

// h smallest squared residuals; ties broken by the smaller time index.
// subset comes out sorted ascending; the objective sums in time order.
void select_h(const std::vector<double>& resid, int h, std::vector<int>& subset,
              double& objective) {
    const int T = static_cast<int>(resid.size());
    if (h < 1 || h > T) throw std::invalid_argument("coverage h out of range");
    static thread_local std::vector<std::pair<double, int>> order;
    static thread_local std::vector<char> keep;
    order.resize(T);
    for (int t = 1; t <= T; ++t)
        order[t - 1] = {resid[t - 1] * resid[t - 1], t};
    std::nth_element(order.begin(), order.begin() + (h - 1), order.end());
    keep.assign(T, 0);
    for (int i = 0; i < h; ++i) keep[order[i].second - 1] = 1;
    subset.resize(h);
    objective = 0.0;
    for (int t = 1, i = 0; t <= T; ++t)
        if (keep[t - 1]) {
            subset[i++] = t;
            objective += resid[t - 1] * resid[t - 1];
        }
}

}  // namespace

int LtsOptions::resolved_h(int T, int p) const {
    const int lo = std::max(p, (T + 1) / 2);
    const int hi = T - 1;
    if (lo > hi)
        throw std::invalid_argument("series too short to trim: need T > max(p, T/2)");
    if (h > 0) {
        if (h < (T + 1) / 2 || h >= T)
            throw std::invalid_argument("coverage h must satisfy T/2 <= h < T");
        if (h < p)
            throw std::invalid_argument("coverage h below the coefficient count");
        return h;
    }
    const int def = static_cast<int>(std::floor(0.75 * T));
    return std::clamp(def, lo, hi);
}

int LtsOptions::resolved_margin(int T) const {
    if (margin > 0) return margin;
    return std::max(3, T / 20);
}

double trimmed_objective(const Theta& theta, const ModelSpec& spec,
                         const TimeSeries& y, int h) {
    const auto r = residuals(theta, spec, y);
    std::vector<int> subset;
    double obj = 0.0;
    select_h(r, h, subset, obj);
    return obj;
}

CandidateFit make_candidate(const Theta& theta, const ModelSpec& spec,
                            const TimeSeries& y, int h) {
    CandidateFit c;
    c.theta = theta;
    c.residuals = residuals(theta, spec, y);
    select_h(c.residuals, h, c.subset, c.objective);
    return c;
}

std::vector<double> scaled_residuals(const Theta& theta, const ModelSpec& spec,
                                     const TimeSeries& y, int h) {
    auto c = make_candidate(theta, spec, y, h);
    const double scale = c.objective > 0.0 ? std::sqrt(c.objective / h) : 1.0;
    for (auto& r : c.residuals) r /= scale;
    return c.residuals;
}

double consistency_factor(int h, int T) {
    if (T < 1 || h < (T + 1) / 2 || h > T)
        throw std::invalid_argument("consistency factor needs T/2 <= h <= T");
    if (h == T) return 1.0;
    const boost::math::normal_distribution<double> nd;
    const double q = boost::math::quantile(nd, (T + h) / (2.0 * T));
    return 1.0 - (2.0 * T / h) * q * boost::math::pdf(nd, q);
}

double small_sample_factor(int h, int T) {
    if (h < 1 || h > T)
        throw std::invalid_argument("small-sample factor needs 1 <= h <= T");
    if (h == T) return 1.0;
    constexpr int nT = static_cast<int>(std::size(kScaleTableT));
    constexpr int nF = static_cast<int>(std::size(kScaleTableFrac));
    if (T > kScaleTableT[nT - 1]) return 1.0;
    const double logT =
        std::log(std::clamp(static_cast<double>(T),
                            static_cast<double>(kScaleTableT[0]),
                            static_cast<double>(kScaleTableT[nT - 1])));
    const double frac = std::clamp(static_cast<double>(h) / T, kScaleTableFrac[0],
                                   kScaleTableFrac[nF - 1]);
    int i = 0;
    while (i + 2 < nT && std::log(static_cast<double>(kScaleTableT[i + 1])) < logT)
        ++i;
    int j = 0;
    while (j + 2 < nF && kScaleTableFrac[j + 1] < frac) ++j;
    const double l0 = std::log(static_cast<double>(kScaleTableT[i]));
    const double l1 = std::log(static_cast<double>(kScaleTableT[i + 1]));
    const double u = (logT - l0) / (l1 - l0);
    const double v =
        (frac - kScaleTableFrac[j]) / (kScaleTableFrac[j + 1] - kScaleTableFrac[j]);
    const double f00 = kScaleTableFactor[i][j];
    const double f10 = kScaleTableFactor[i + 1][j];
    const double f01 = kScaleTableFactor[i][j + 1];
    const double f11 = kScaleTableFactor[i + 1][j + 1];
    return (1 - u) * (1 - v) * f00 + u * (1 - v) * f10 + (1 - u) * v * f01 +
           u * v * f11;
}

ScaleEstimate estimate_scale(double objective, int h, int T, double series_scale) {
    if (objective <= 0.0) {
        const double base = series_scale > 0.0 ? series_scale : 1.0;
        return {1e-12 * base, true};
    }
    const double sigma = small_sample_factor(h, T) *
                         std::sqrt(objective / (h * consistency_factor(h, T)));
    return {sigma, false};
}

double huber_rho(double x, double b) {
    const double ax = std::abs(x);
    if (ax <= b) return 0.5 * x * x;
    return b * ax - 0.5 * b * b;
}

std::vector<char> flag_outliers(std::span<const double> scaled_res,
                                double conf_level) {
    if (conf_level <= 0.0 || conf_level >= 1.0)
        throw std::invalid_argument("confidence level must be in (0, 1)");
    const boost::math::normal_distribution<double> nd;
    const double cut = boost::math::quantile(nd, 1.0 - (1.0 - conf_level) / 2.0);
    std::vector<char> flags(scaled_res.size(), 0);
    for (std::size_t i = 0; i < scaled_res.size(); ++i)
        flags[i] = std::abs(scaled_res[i]) > cut ? 1 : 0;
    return flags;
}

std::vector<int> sample_elemental(int T, const ModelSpec& spec, int shift_pos,
                                  Rng& rng) {
    const int p = spec.param_count();
    const int init_cols = spec.trend_degree + 1 + 2 * spec.n_harmonics +
                          (spec.with_shift ? 1 : 0);
    const int size = std::max(p - 1, init_cols);
    if (size > T)
        throw std::invalid_argument("series too short for elemental subsets");
    std::vector<char> used(T + 1, 0);
    std::vector<int> out;
    out.reserve(size);
    if (shift_pos > 0) {
        if (shift_pos < 2 || shift_pos > T)
            throw std::invalid_argument("shift position out of range");
        out.push_back(shift_pos);
        used[shift_pos] = 1;
        const int before = rng.uniform_int(1, shift_pos - 1);
        out.push_back(before);
        used[before] = 1;
    }
    while (static_cast<int>(out.size()) < size) {
        const int d = rng.uniform_int(1, T);
        if (used[d]) continue;  // duplicate: redraw
        used[d] = 1;
        out.push_back(d);
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

// Residuals over the full series straight from the shared basis, avoiding
// the fitted-value temporary of predict_all.
void residuals_into(const Theta& theta, const ModelSpec& spec,
                    const ModelBasis& basis, const TimeSeries& y,
                    std::vector<double>& out) {
    const int T = y.size();
    out.resize(T);
    for (int i = 0; i < T; ++i) {
        double v = 0.0;
        for (int a = 0; a <= spec.trend_degree; ++a)
            v += theta.trend[a] * basis.trend_pow(i, a);
        if (spec.n_harmonics > 0) {
            double s = 0.0;
            for (int b = 0; b < spec.n_harmonics; ++b)
                s += theta.harmonics[b][0] * basis.harmonics(i, 2 * b) +
                     theta.harmonics[b][1] * basis.harmonics(i, 2 * b + 1);
            double m = 1.0;
            for (int g = 0; g < spec.amplitude_degree; ++g)
                m += theta.amplitude[g] * basis.amp_pow(i, g);
            v += s * m;
        }
        if (spec.with_shift && (i + 1) >= theta.shift_time &&
            theta.shift_time > 0)
            v += theta.shift_height;
        out[i] = y.values[i] - v;
    }
}

// Candidate whose theta was fit on `fit_subset`: residuals and the trimmed
// objective come from theta, subset records the set the fit ran on (size h),
// which is what the fixed-point test in cstep compares against.
CandidateFit candidate_on_subset(const Theta& theta, const ModelSpec& spec,
                                 const ModelBasis& basis, const TimeSeries& y,
                                 int h, std::vector<int> fit_subset) {
    CandidateFit c;
    c.theta = theta;
    residuals_into(theta, spec, basis, y, c.residuals);
    static thread_local std::vector<int> scratch;
    select_h(c.residuals, h, scratch, c.objective);
    c.subset = std::move(fit_subset);
    return c;
}

// One concentration round for a theta not yet fit on h points: select the
// h best-fitting indices under theta, then warm-refit on them.
CandidateFit concentrate_from(const Theta& theta, const ModelSpec& spec,
                              const ModelBasis& basis, const TimeSeries& y,
                              int h, const AlsOptions& als) {
    static thread_local std::vector<double> resid;
    residuals_into(theta, spec, basis, y, resid);
    std::vector<int> subset;
    double obj = 0.0;
    select_h(resid, h, subset, obj);
    const auto ar = detail::als_fit_basis_warm(y, spec, basis, subset, theta, als);
    return candidate_on_subset(ar.theta, spec, basis, y, h, std::move(subset));
}

}  // namespace

CandidateFit cstep(const TimeSeries& y, const ModelSpec& spec,
                   const ModelBasis& basis, const CandidateFit& cand,
                   const LtsOptions& opts) {
    const int h = static_cast<int>(cand.subset.size());
    std::vector<int> next_subset;
    double next_obj = 0.0;
    select_h(cand.residuals, h, next_subset, next_obj);
    const auto ar = detail::als_fit_basis_warm(y, spec, basis, next_subset,
                                               cand.theta, opts.als);
    CandidateFit out = candidate_on_subset(ar.theta, spec, basis, y, h,
                                           std::move(next_subset));
    // No descent means the incoming candidate already is a fixed point of
    // the select-and-refit map; hand it back untouched.
    if (out.objective >= cand.objective) return cand;
    return out;
}

CandidateFit cstep_converge(const TimeSeries& y, const ModelSpec& spec,
                            const ModelBasis& basis, const CandidateFit& cand,
                            const LtsOptions& opts) {
    CandidateFit cur = cand;
    for (int k = 0; k < opts.max_cstep_iter; ++k) {
        CandidateFit nxt = cstep(y, spec, basis, cur, opts);
        if (nxt.subset == cur.subset) return nxt;
        if (nxt.objective >= cur.objective) {
            // Tie or roundoff stall: no strict descent left.
            return nxt.objective <= cur.objective ? nxt : cur;
        }
        cur = std::move(nxt);
    }
    return cur;
}

namespace {

void pool_insert(std::vector<CandidateFit>& pool, CandidateFit&& c,
                 std::size_t cap) {
    auto it = std::upper_bound(
        pool.begin(), pool.end(), c.objective,
        [](double obj, const CandidateFit& x) { return obj < x.objective; });
    pool.insert(it, std::move(c));
    if (pool.size() > cap) pool.pop_back();
}

struct Engine {
    const TimeSeries& y;
    const ModelSpec& spec;
    const LtsOptions& opts;
    int T, p, h;
    ModelBasis basis;

    Engine(const TimeSeries& y_, const ModelSpec& spec_, const LtsOptions& opts_)
        : y(y_), spec(spec_), opts(opts_), T(y_.size()), p(spec_.param_count()),
          h(opts_.resolved_h(T, p)), basis(ModelBasis::build(spec_, T)) {}

    // n_trials elemental starts, two concentration rounds each, best n_best
    // concentrated to convergence. Deterministic per (seed, position).
    std::vector<CandidateFit> trial_pool(int pos) const {
        Rng rng(Rng::mix(opts.seed, static_cast<std::uint64_t>(pos)));
        std::vector<CandidateFit> pool;
        pool.reserve(opts.n_best + 1);
        // Degenerate elemental draws are redrawn under the same constraints;
        // the global cap prevents livelock on pathological series.
        int retries_left = 10 * opts.n_trials;
        for (int m = 0; m < opts.n_trials; ++m) {
            for (;;) {
                try {
                    const auto elem = sample_elemental(T, spec, pos, rng);
                    const auto ar = detail::als_fit_basis(y, spec, basis, elem,
                                                          pos, opts.als);
                    CandidateFit c =
                        concentrate_from(ar.theta, spec, basis, y, h, opts.als);
                    c = cstep(y, spec, basis, c, opts);
                    pool_insert(pool, std::move(c), opts.n_best);
                } catch (const SingularFit&) {
                    if (--retries_left >= 0) continue;
                }
                break;
            }
        }
        std::vector<CandidateFit> done;
        done.reserve(pool.size());
        for (auto& c : pool) {
            try {
                pool_insert(done, cstep_converge(y, spec, basis, c, opts),
                            pool.size());
            } catch (const SingularFit&) {
                continue;
            }
        }
        return done;
    }

    PositionFits merge_position(int pos, std::vector<CandidateFit> trial,
                                std::span<const CandidateFit> warm) const {
        std::vector<CandidateFit> all = std::move(trial);
        for (const auto& w : warm) {
            Theta th = w.theta;
            th.shift_time = pos;
            try {
                CandidateFit c = concentrate_from(th, spec, basis, y, h, opts.als);
                c = cstep_converge(y, spec, basis, c, opts);
                pool_insert(all, std::move(c), all.size() + 1);
            } catch (const SingularFit&) {
                continue;  // no usable fit with the shift re-anchored here
            }
        }
        PositionFits pf;
        pf.pooled_objectives.reserve(all.size());
        for (const auto& c : all) pf.pooled_objectives.push_back(c.objective);
        if (static_cast<int>(all.size()) > opts.n_best)
            all.resize(opts.n_best);
        pf.best = std::move(all);
        return pf;
    }
};

struct InferenceBlock {
    Eigen::VectorXd se;
    int dof = 0;
};

InferenceBlock linear_inference(const Eigen::MatrixXd& X,
                                const Eigen::VectorXd& rhs,
                                const Eigen::VectorXd& coefs) {
    InferenceBlock blk;
    const int n = static_cast<int>(X.rows());
    const int k = static_cast<int>(X.cols());
    blk.dof = n - k;
    blk.se = Eigen::VectorXd::Constant(k, std::numeric_limits<double>::quiet_NaN());
    if (blk.dof < 1) return blk;
    const double s2 = (rhs - X * coefs).squaredNorm() / blk.dof;
    const Eigen::MatrixXd xtx = X.transpose() * X;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
    if (!lu.isInvertible()) return blk;
    const Eigen::MatrixXd inv = lu.inverse();
    for (int j = 0; j < k; ++j)
        blk.se[j] = std::sqrt(std::max(0.0, s2 * inv(j, j)));
    return blk;
}

void t_and_p(double coef, double se, int dof, double& t, double& pval) {
    if (std::isnan(se) || dof < 1) {
        t = std::numeric_limits<double>::quiet_NaN();
        pval = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    if (se == 0.0) {
        t = coef == 0.0 ? 0.0 : std::numeric_limits<double>::infinity() *
                                    (coef > 0 ? 1 : -1);
        pval = coef == 0.0 ? 1.0 : 0.0;
        return;
    }
    t = coef / se;
    const boost::math::students_t_distribution<double> td(dof);
    pval = 2.0 * boost::math::cdf(td, -std::abs(t));
}

}  // namespace

PositionFits fits_for_shift(const TimeSeries& y, const ModelSpec& spec,
                            int shift_pos,
                            std::span<const CandidateFit> warm_starts,
                            const LtsOptions& opts) {
    Engine eng(y, spec, opts);
    return eng.merge_position(shift_pos, eng.trial_pool(shift_pos), warm_starts);
}

ShiftRefinement refine_shift(const TimeSeries& y, const ModelSpec& spec,
                             const Theta& theta, double sigma,
                             const LtsOptions& opts) {
    if (sigma <= 0.0) throw std::invalid_argument("refinement needs sigma > 0");
    if (opts.window_width < 1 || opts.window_width % 2 == 0)
        throw std::invalid_argument("refinement window width must be odd");
    ShiftRefinement out;
    out.position = theta.shift_time;
    const int T = y.size();
    const int u = opts.resolved_margin(T);
    const int half = opts.window_width / 2;
    const int lo = std::max(u + 1, theta.shift_time - half);
    const int hi = std::min(T - u, theta.shift_time + half);
    if (lo > hi) return out;
    double best = std::numeric_limits<double>::infinity();
    for (int cand = lo; cand <= hi; ++cand) {
        Theta th = theta;
        th.shift_time = cand;
        double f = 0.0;
        for (int t = lo; t <= hi; ++t) {
            const double r = y.values[t - 1] - predict(th, spec, t);
            f += huber_rho(r / sigma, opts.huber_b);
        }
        out.profile.push_back({cand, f});
        if (f < best) best = f;
    }
    // Ties keep the incoming position, otherwise the smallest minimizer.
    int chosen = -1;
    for (const auto& pt : out.profile) {
        if (pt.value != best) continue;
        if (pt.position == theta.shift_time) {
            chosen = pt.position;
            break;
        }
        if (chosen < 0) chosen = pt.position;
    }
    out.position = chosen;
    return out;
}

FitResult nlts_fit(const TimeSeries& y, const ModelSpec& spec,
                   const LtsOptions& opts) {
    spec.validate();
    const int T = y.size();
    const int p = spec.param_count();
    if (T < p)
        throw std::invalid_argument("series shorter than the coefficient count");
    if (!y.labels.empty() && y.labels.size() != y.values.size())
        throw std::invalid_argument("label column length mismatch");
    for (double v : y.values)
        if (!std::isfinite(v))
            throw std::invalid_argument("series contains non-finite values");

    Engine eng(y, spec, opts);
    FitResult fr;
    fr.h = eng.h;
    if (opts.h == 0 && eng.h != static_cast<int>(std::floor(0.75 * T)))
        fr.warnings.push_back("default coverage clamped to feasible range");
    if (T <= 5 * p)
        fr.warnings.push_back(
            "short series: 5 or fewer points per coefficient");

    const double series_sd = sample_sd(y.values);

    const CandidateFit* best = nullptr;
    CandidateFit best_store;

    if (spec.with_shift) {
        const int u = opts.resolved_margin(T);
        const int lo = u + 1;
        const int hi = T - u;
        if (lo > hi)
            throw std::invalid_argument("margin leaves no candidate shift positions");

        const int npos = hi - lo + 1;
        std::vector<std::vector<CandidateFit>> trial(npos);
        const int jobs = std::max(1, opts.jobs);
        if (jobs == 1 || npos == 1) {
            for (int i = 0; i < npos; ++i) trial[i] = eng.trial_pool(lo + i);
        } else {
            // The trial pools are independent of the warm-start chain, so this
            // phase parallelizes without changing any result.
            std::atomic<int> next{0};
            std::exception_ptr err;
            std::mutex err_mu;
            auto worker = [&]() {
                for (;;) {
                    const int i = next.fetch_add(1);
                    if (i >= npos) return;
                    try {
                        trial[i] = eng.trial_pool(lo + i);
                    } catch (...) {
                        std::lock_guard<std::mutex> lk(err_mu);
                        if (!err) err = std::current_exception();
                        return;
                    }
                }
            };
            std::vector<std::thread> pool;
            for (int j = 0; j < std::min(jobs, npos); ++j)
                pool.emplace_back(worker);
            for (auto& th : pool) th.join();
            if (err) std::rethrow_exception(err);
        }

        std::vector<CandidateFit> carry;
        for (int i = 0; i < npos; ++i) {
            const int pos = lo + i;
            PositionFits pf = eng.merge_position(pos, std::move(trial[i]), carry);
            if (pf.best.empty()) {
                fr.warnings.push_back("no valid fit at shift position " +
                                      std::to_string(pos));
                continue;
            }
            fr.positions.push_back(pos);
            const CandidateFit& top = pf.best.front();
            const double scale =
                top.objective > 0.0 ? std::sqrt(top.objective / eng.h) : 1.0;
            std::vector<double> row(top.residuals);
            for (auto& r : row) r /= scale;
            fr.position_scaled_res.push_back(std::move(row));
            fr.objective_profile.push_back(std::move(pf.pooled_objectives));
            if (!best || top.objective < best->objective) {
                best_store = top;
                best = &best_store;
            }
            carry = std::move(pf.best);
        }
    } else {
        PositionFits pf = eng.merge_position(0, eng.trial_pool(0), {});
        if (!pf.best.empty()) {
            best_store = pf.best.front();
            best = &best_store;
        }
    }

    if (!best) throw std::runtime_error("no identifiable shift model");

    fr.objective = best->objective;
    fr.scale = estimate_scale(best->objective, eng.h, T, series_sd);

    int refined_shift = best->theta.shift_time;
    if (spec.with_shift) {
        const auto ref =
            refine_shift(y, spec, best->theta, fr.scale.sigma, opts);
        refined_shift = ref.position;
        fr.refinement_profile = ref.profile;
    }

    // Flag residuals carry the refined shift position when it moved.
    Theta flag_theta = best->theta;
    if (spec.with_shift) flag_theta.shift_time = refined_shift;
    if (flag_theta.shift_time != best->theta.shift_time)
        residuals_into(flag_theta, spec, eng.basis, y, fr.scaled_res);
    else
        fr.scaled_res = best->residuals;
    for (auto& r : fr.scaled_res) r /= fr.scale.sigma;
    fr.outlier_flags = flag_outliers(fr.scaled_res, opts.conf_level);

    std::vector<int> keep;
    keep.reserve(T);
    for (int t = 1; t <= T; ++t)
        if (!fr.outlier_flags[t - 1]) keep.push_back(t);
    const int need = spec.trend_degree + 1 + 2 * spec.n_harmonics +
                     (spec.with_shift ? 1 : 0);
    if (static_cast<int>(keep.size()) < need) {
        fr.warnings.push_back("too few unflagged points; reweighting on the "
                              "trimmed subset instead");
        keep = best->subset;
    }

    Theta start = best->theta;
    start.shift_time = spec.with_shift ? refined_shift : 0;
    Theta final_theta = start;
    bool refit_ok = false;
    try {
        const auto ar =
            detail::als_fit_basis_warm(y, spec, eng.basis, keep, start, opts.als);
        final_theta = ar.theta;
        refit_ok = true;
    } catch (const SingularFit&) {
        fr.warnings.push_back("reweighted fit was rank deficient; keeping the "
                              "trimmed coefficients");
    }
    fr.theta = final_theta;

    // Standard errors from the two half-step designs at the final fit.
    fr.coef_names = coefficient_names(spec);
    const auto flat = final_theta.flatten(spec);
    fr.coef = flat;
    const std::size_t ncoef = flat.size();
    fr.coef_se.assign(ncoef, std::numeric_limits<double>::quiet_NaN());
    fr.t_stats.assign(ncoef, std::numeric_limits<double>::quiet_NaN());
    fr.p_values.assign(ncoef, std::numeric_limits<double>::quiet_NaN());
    if (refit_ok) {
        const int ntrend = spec.trend_degree + 1;
        std::vector<double> seasonal(T, 0.0);
        if (spec.n_harmonics > 0)
            for (int t = 1; t <= T; ++t)
                seasonal[t - 1] = seasonal_value(final_theta, spec, t);
        const auto sysA = design_step_a(spec, eng.basis, y, seasonal,
                                        final_theta.shift_time, keep);
        Eigen::VectorXd coefA(sysA.X.cols());
        {
            int k = 0;
            for (int a = 0; a < ntrend; ++a) coefA[k++] = final_theta.trend[a];
            for (int g = 0; g < spec.amplitude_degree; ++g)
                coefA[k++] = final_theta.amplitude[g];
            if (spec.with_shift) coefA[k++] = final_theta.shift_height;
        }
        const auto blkA = linear_inference(sysA.X, sysA.rhs, coefA);
        const int nbeta = 2 * spec.n_harmonics;
        // Map step-A entries (trend, amplitude, shift) into report order.
        for (int a = 0; a < ntrend; ++a) fr.coef_se[a] = blkA.se[a];
        for (int g = 0; g < spec.amplitude_degree; ++g)
            fr.coef_se[ntrend + nbeta + g] = blkA.se[ntrend + g];
        if (spec.with_shift)
            fr.coef_se[ntrend + nbeta + spec.amplitude_degree] =
                blkA.se[sysA.X.cols() - 1];
        int dofB = 0;
        if (spec.n_harmonics > 0) {
            const auto sysB =
                design_step_b(spec, eng.basis, y, final_theta, keep);
            Eigen::VectorXd coefB(nbeta);
            for (int b = 0; b < spec.n_harmonics; ++b) {
                coefB[2 * b] = final_theta.harmonics[b][0];
                coefB[2 * b + 1] = final_theta.harmonics[b][1];
            }
            const auto blkB = linear_inference(sysB.X, sysB.rhs, coefB);
            for (int c = 0; c < nbeta; ++c) fr.coef_se[ntrend + c] = blkB.se[c];
            dofB = blkB.dof;
        }
        for (std::size_t j = 0; j < ncoef; ++j) {
            const bool beta_block =
                j >= static_cast<std::size_t>(ntrend) &&
                j < static_cast<std::size_t>(ntrend + nbeta);
            const int dof = beta_block ? dofB : blkA.dof;
            t_and_p(fr.coef[j], fr.coef_se[j], dof, fr.t_stats[j],
                    fr.p_values[j]);
        }
    }
    if (spec.with_shift) {
        // |t| above the Student-t quantile at conf_level; in two-sided
        // p-value terms that is p < 2 (1 - conf_level).
        const double p_shift = fr.p_values.back();
        fr.shift_significant =
            std::isfinite(p_shift) && p_shift < 2.0 * (1.0 - opts.conf_level);
    }
    return fr;
}

}  // namespace nlts
