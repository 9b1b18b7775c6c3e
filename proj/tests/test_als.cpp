#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "nlts/als.hpp"
#include "nlts/rng.hpp"
#include "nlts/testkit.hpp"

using namespace nlts;

namespace {

std::vector<int> full_range(int T) {
    std::vector<int> s(T);
    std::iota(s.begin(), s.end(), 1);
    return s;
}

double subset_ssr_of(const Theta& th, const ModelSpec& spec,
                     const TimeSeries& y, std::span<const int> subset) {
    double ssr = 0.0;
    for (int t : subset) {
        const double r = y.values[t - 1] - predict(th, spec, t);
        ssr += r * r;
    }
    return ssr;
}

}  // namespace

TEST_CASE("rank-revealing least squares flags deficient designs") {
    Eigen::MatrixXd X(4, 2);
    X << 1, 2, 1, 2, 1, 2, 1, 2;  // second column is twice the first
    Eigen::VectorXd y(4);
    y << 1, 2, 3, 4;
    CHECK_FALSE(ls_solve(X, y).rank_ok);

    Eigen::MatrixXd X2(4, 2);
    X2 << 1, 0, 1, 1, 1, 2, 1, 3;
    const auto sol = ls_solve(X2, y);  // exact line y = 1 + x
    CHECK(sol.rank_ok);
    CHECK(sol.coeffs[0] == doctest::Approx(1.0));
    CHECK(sol.coeffs[1] == doctest::Approx(1.0));

    // Underdetermined systems are never rank ok.
    Eigen::MatrixXd X3(1, 2);
    X3 << 1, 1;
    Eigen::VectorXd y3(1);
    y3 << 1;
    CHECK_FALSE(ls_solve(X3, y3).rank_ok);
}

TEST_CASE("warm start at the exact coefficients is a fixed point") {
    const ModelSpec spec = testkit::growth_shift_spec();
    const Theta truth = testkit::growth_shift_theta();
    const TimeSeries y = testkit::simulate_series(
        spec, truth, 150, std::numeric_limits<double>::infinity(), 1);
    const auto subset = full_range(150);
    const auto res = als_fit(y, spec, subset, truth);
    CHECK(res.converged);
    CHECK(res.subset_ssr < 1e-6);
    CHECK(relative_change(res.theta, truth, spec) < 1e-9);
}

TEST_CASE("cold fit recovers a mildly modulated model") {
    ModelSpec spec;
    spec.trend_degree = 1;
    spec.n_harmonics = 2;
    spec.amplitude_degree = 1;
    spec.with_shift = true;
    Theta truth = Theta::zeros(spec);
    truth.trend = {40.0, 1.2};
    truth.harmonics = {{12.0, -6.0}, {4.0, 3.0}};
    truth.amplitude = {0.004};
    truth.shift_height = 120.0;
    truth.shift_time = 50;
    const TimeSeries y = testkit::simulate_series(
        spec, truth, 120, std::numeric_limits<double>::infinity(), 7);
    const auto res = als_fit(y, spec, full_range(120), 50);
    CHECK(res.converged);
    CHECK(res.subset_ssr / 120.0 < 1e-6);
    CHECK(relative_change(res.theta, truth, spec) < 1e-4);
}

TEST_CASE("iteration caps and convergence accounting") {
    const ModelSpec spec = testkit::growth_shift_spec();
    const Theta truth = testkit::growth_shift_theta();
    const TimeSeries y = testkit::simulate_series(
        spec, truth, 150, std::numeric_limits<double>::infinity(), 1);
    AlsOptions opts;
    opts.max_iter = 2;
    opts.tol = 1e-300;  // unreachable, so the cap binds
    const auto res = als_fit(y, spec, full_range(150), 40, opts);
    CHECK_FALSE(res.converged);
    CHECK(res.iterations == 2);
}

TEST_CASE("each half-step is a descent step on the subset") {
    const ModelSpec spec = testkit::growth_shift_spec();
    const Theta truth = testkit::growth_shift_theta();
    const TimeSeries y = testkit::simulate_series(spec, truth, 150, 20.0, 3);
    const auto basis = ModelBasis::build(spec, y.size());
    const auto subset = full_range(150);

    // Start somewhere deliberately wrong.
    Theta th = truth;
    th.trend[0] += 200.0;
    th.harmonics[0][0] *= 0.5;
    th.amplitude[0] *= 1.3;

    const double ssr0 = subset_ssr_of(th, spec, y, subset);
    std::vector<double> seasonal(y.size());
    for (int t = 1; t <= y.size(); ++t)
        seasonal[t - 1] = seasonal_value(th, spec, t);
    const auto sysA =
        design_step_a(spec, basis, y, seasonal, th.shift_time, subset);
    const auto solA = ls_solve(sysA.X, sysA.rhs);
    REQUIRE(solA.rank_ok);
    th.trend = {solA.coeffs[0], solA.coeffs[1]};
    th.amplitude = {solA.coeffs[2]};
    th.shift_height = solA.coeffs[3];
    const double ssr1 = subset_ssr_of(th, spec, y, subset);
    CHECK(ssr1 <= ssr0 + 1e-9 * ssr0);

    const auto sysB = design_step_b(spec, basis, y, th, subset);
    const auto solB = ls_solve(sysB.X, sysB.rhs);
    REQUIRE(solB.rank_ok);
    for (int b = 0; b < spec.n_harmonics; ++b)
        th.harmonics[b] = {solB.coeffs[2 * b], solB.coeffs[2 * b + 1]};
    const double ssr2 = subset_ssr_of(th, spec, y, subset);
    CHECK(ssr2 <= ssr1 + 1e-9 * ssr1);
}

TEST_CASE("fit depends only on observations inside the subset") {
    const ModelSpec spec = testkit::growth_shift_spec();
    const Theta truth = testkit::growth_shift_theta();
    TimeSeries y = testkit::simulate_series(spec, truth, 150, 20.0, 11);
    std::vector<int> subset;
    for (int t = 1; t <= 150; ++t)
        if (t % 3 != 0) subset.push_back(t);

    const auto res1 = als_fit(y, spec, subset, 40);
    for (int t = 3; t <= 150; t += 3) y.values[t - 1] += 1e6;  // outside only
    const auto res2 = als_fit(y, spec, subset, 40);
    CHECK(res1.theta.flatten(spec) == res2.theta.flatten(spec));
    CHECK(res1.subset_ssr == res2.subset_ssr);
}

TEST_CASE("repeating a converged fit from its own solution stays put") {
    ModelSpec spec;
    spec.trend_degree = 1;
    spec.n_harmonics = 2;
    spec.amplitude_degree = 1;
    spec.with_shift = true;
    Theta truth = Theta::zeros(spec);
    truth.trend = {40.0, 1.2};
    truth.harmonics = {{12.0, -6.0}, {4.0, 3.0}};
    truth.amplitude = {0.004};
    truth.shift_height = 120.0;
    truth.shift_time = 50;
    const TimeSeries y = testkit::simulate_series(spec, truth, 120, 20.0, 5);
    const auto subset = full_range(120);
    const auto first = als_fit(y, spec, subset, 50);
    REQUIRE(first.converged);
    const auto second = als_fit(y, spec, subset, first.theta);
    CHECK(second.subset_ssr <= first.subset_ssr * (1.0 + 1e-12));
    CHECK(relative_change(second.theta, first.theta, spec) < 1e-4);
}

TEST_CASE("no-seasonality shapes collapse to one linear solve") {
    ModelSpec spec;
    spec.trend_degree = 1;
    spec.n_harmonics = 0;
    spec.amplitude_degree = 0;
    spec.with_shift = true;
    Theta truth = Theta::zeros(spec);
    truth.trend = {5.0, 2.0};
    truth.shift_height = 40.0;
    truth.shift_time = 20;
    const TimeSeries y = testkit::simulate_series(
        spec, truth, 48, std::numeric_limits<double>::infinity(), 2);
    const auto res = als_fit(y, spec, full_range(48), 20);
    CHECK(res.converged);
    CHECK(res.iterations == 0);
    CHECK(res.subset_ssr < 1e-12);
    CHECK(relative_change(res.theta, truth, spec) < 1e-9);
}

TEST_CASE("rank-deficient designs raise SingularFit") {
    ModelSpec spec;
    spec.trend_degree = 0;
    spec.n_harmonics = 1;
    spec.amplitude_degree = 0;
    spec.with_shift = true;
    TimeSeries y;
    for (int t = 1; t <= 24; ++t) y.values.push_back(t * 1.0);
    // Every subset index at or beyond the shift makes the step column
    // collinear with the intercept.
    std::vector<int> subset;
    for (int t = 5; t <= 12; ++t) subset.push_back(t);
    CHECK_THROWS_AS(als_fit(y, spec, subset, 5), SingularFit);
}

TEST_CASE("subset smaller than the design is rejected") {
    const ModelSpec spec = testkit::growth_shift_spec();
    const Theta truth = testkit::growth_shift_theta();
    const TimeSeries y = testkit::simulate_series(spec, truth, 150, 20.0, 9);
    std::vector<int> tiny = {4, 9, 13};
    CHECK_THROWS_AS(als_fit(y, spec, tiny, 40), std::invalid_argument);
    std::vector<int> bad = {0, 5, 9};
    CHECK_THROWS_AS(als_fit(y, spec, bad, 40), std::invalid_argument);
}
