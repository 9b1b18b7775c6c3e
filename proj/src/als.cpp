#include "nlts/als.hpp"

#include <algorithm>

namespace nlts {

namespace {

constexpr double kRankThreshold = 1e-10;

void check_subset(const TimeSeries& y, std::span<const int> subset) {
    if (subset.empty()) throw std::invalid_argument("fit subset is empty");
    for (int t : subset)
        if (t < 1 || t > y.size())
            throw std::invalid_argument("fit subset index out of range");
}

double subset_ssr(const Theta& theta, const ModelSpec& spec,
                  const ModelBasis& basis, const TimeSeries& y,
                  std::span<const int> subset) {
    double ssr = 0.0;
    for (int t : subset) {
        double v = 0.0;
        for (int a = 0; a <= spec.trend_degree; ++a)
            v += theta.trend[a] * basis.trend_pow(t - 1, a);
        if (spec.n_harmonics > 0) {
            double s = 0.0;
            for (int b = 0; b < spec.n_harmonics; ++b)
                s += theta.harmonics[b][0] * basis.harmonics(t - 1, 2 * b) +
                     theta.harmonics[b][1] * basis.harmonics(t - 1, 2 * b + 1);
            double m = 1.0;
            for (int g = 0; g < spec.amplitude_degree; ++g)
                m += theta.amplitude[g] * basis.amp_pow(t - 1, g);
            v += s * m;
        }
        if (spec.with_shift && t >= theta.shift_time && theta.shift_time > 0)
            v += theta.shift_height;
        const double r = y.values[t - 1] - v;
        ssr += r * r;
    }
    return ssr;
}

Theta unpack_init(const ModelSpec& spec, const Eigen::VectorXd& c,
                  int shift_time) {
    Theta th = Theta::zeros(spec);
    int k = 0;
    for (auto& a : th.trend) a = c[k++];
    for (auto& h : th.harmonics) {
        h[0] = c[k++];
        h[1] = c[k++];
    }
    if (spec.with_shift) {
        th.shift_height = c[k++];
        th.shift_time = shift_time;
    }
    return th;
}

LsSolution solve_or_throw(const LinearSystem& sys, const char* stage) {
    if (sys.X.rows() < sys.X.cols())
        throw std::invalid_argument(std::string("fit subset smaller than the ") +
                                    stage + " design");
    LsSolution sol = ls_solve(sys.X, sys.rhs);
    if (!sol.rank_ok)
        throw SingularFit(std::string("rank-deficient design in ") + stage);
    return sol;
}

// Normal-equation solver for the small alternating subproblems. The Gram
// matrix is equilibrated to unit diagonal before an unpivoted Cholesky; a
// pivot falling below the threshold marks the design rank deficient. The
// designs here are smooth low-degree bases, so the squared conditioning of
// the normal equations stays far from the threshold on any viable subset.
class GramSolver {
public:
    void resize(int k) {
        k_ = k;
        G_.resize(k, k);
        d_.resize(k);
        ri_.resize(k);
        x_.resize(k);
    }

    // Lower triangle of X'X and the projection X'rhs, filled by the caller.
    Eigen::MatrixXd& gram() { return G_; }
    Eigen::VectorXd& proj() { return x_; }

    // Solves (X'X) x = X'rhs in place; returns false when a zero column or a
    // small Cholesky pivot signals rank deficiency.
    bool solve() {
        const int k = k_;
        double* G = G_.data();
        double* d = d_.data();
        double* ri = ri_.data();
        double* x = x_.data();
        for (int j = 0; j < k; ++j) {
            const double g = G[j * k + j];
            if (!(g > 0.0)) return false;
            d[j] = 1.0 / std::sqrt(g);
        }
        for (int j = 0; j < k; ++j) {
            double* col = G + j * k;
            const double dj = d[j];
            for (int i = j; i < k; ++i) col[i] *= d[i] * dj;
            x[j] *= dj;
        }
        // Cholesky in place on the lower triangle; ri holds the reciprocal
        // pivots so the substitution passes stay division free.
        for (int j = 0; j < k; ++j) {
            double* colj = G + j * k;
            double piv = colj[j];
            for (int r = 0; r < j; ++r) {
                const double l = G[r * k + j];
                piv -= l * l;
            }
            if (piv < kPivotThreshold) return false;
            const double s = std::sqrt(piv);
            const double rs = 1.0 / s;
            colj[j] = s;
            ri[j] = rs;
            for (int i = j + 1; i < k; ++i) {
                double v = colj[i];
                for (int r = 0; r < j; ++r) v -= G[r * k + i] * G[r * k + j];
                colj[i] = v * rs;
            }
        }
        for (int j = 0; j < k; ++j) {
            double v = x[j];
            for (int r = 0; r < j; ++r) v -= G[r * k + j] * x[r];
            x[j] = v * ri[j];
        }
        for (int j = k - 1; j >= 0; --j) {
            double v = x[j];
            const double* colj = G + j * k;
            for (int r = j + 1; r < k; ++r) v -= colj[r] * x[r];
            x[j] = v * ri[j];
        }
        for (int j = 0; j < k; ++j) x[j] *= d[j];
        return true;
    }

    const Eigen::VectorXd& solution() const { return x_; }

private:
    static constexpr double kPivotThreshold = 1e-13;
    int k_ = 0;
    Eigen::MatrixXd G_;
    Eigen::VectorXd d_, ri_, x_;
};

// Per-thread scratch for the alternation; reused across calls so the hot
// path allocates nothing once warmed up.
struct AltWorkspace {
    Eigen::MatrixXd W, TW, TT, TWb, CC;
    Eigen::VectorXd DW, yW, TD, Ty, DWb, yWb, E, gtil, w;
    Eigen::VectorXd alpha, gamma, beta, prev_alpha, prev_gamma, prev_beta;
    GramSolver lsA, lsB;

    void resize(int U, int ntrend, int namp, int nbeta, int kA) {
        W.resize(U, U);
        TW.resize(ntrend, U);
        TT.resize(ntrend, ntrend);
        TWb.resize(ntrend, namp);
        CC.resize(namp, namp);
        DW.resize(U);
        yW.resize(U);
        TD.resize(ntrend);
        Ty.resize(ntrend);
        DWb.resize(namp);
        yWb.resize(namp);
        E.resize(U);
        gtil.resize(namp);
        w.resize(U);
        alpha.resize(ntrend);
        gamma.resize(namp - 1);
        beta.resize(nbeta);
        prev_alpha.resize(ntrend);
        prev_gamma.resize(namp - 1);
        prev_beta.resize(nbeta);
        lsA.resize(kA);
        lsB.resize(nbeta);
    }
};

// Hot path: the designs are assembled once into preallocated blocks and only
// the iteration-dependent columns are rewritten, so a full alternation round
// costs two QR factorizations and a few small mat-vec products.
AlsResult alternate(const TimeSeries& y, const ModelSpec& spec,
                    const ModelBasis& basis, std::span<const int> subset,
                    Theta theta, const AlsOptions& opts) {
    AlsResult res;
    if (spec.n_harmonics == 0) {
        // No seasonal block: the model is linear in all coefficients.
        const auto sys =
            design_init(spec, basis, y, theta.shift_time, subset);
        const auto sol = solve_or_throw(sys, "linear fit");
        res.theta = unpack_init(spec, sol.coeffs, theta.shift_time);
        res.converged = true;
        res.iterations = 0;
        res.subset_ssr = subset_ssr(res.theta, spec, basis, y, subset);
        return res;
    }

    const int n = static_cast<int>(subset.size());
    const int ntrend = spec.trend_degree + 1;
    const int ngamma = spec.amplitude_degree;
    const int nbeta = 2 * spec.n_harmonics;
    const int shift_cols = spec.with_shift ? 1 : 0;
    const int kA = ntrend + ngamma + shift_cols;
    if (n < kA || n < nbeta)
        throw std::invalid_argument(
            "fit subset smaller than the alternating designs");

    // Both half-step designs are built from products of the same basis
    // columns: writing w_u = amp_g * harm_j (u = g * nbeta + j, amp_0 = 1),
    // the amplitude-scaled seasonal columns of step A and the modulated
    // harmonic columns of step B are linear in w with weights beta resp.
    // (1, gamma). Their Gram matrices and projections are therefore
    // contractions of subset moments accumulated once per call, and each
    // iteration runs on the moment tensors alone, independent of n. The
    // contractions are spelled out as scalar loops: the operands are tiny
    // and expression dispatch would cost more than the arithmetic.
    const int namp = ngamma + 1;
    const int U = namp * nbeta;
    static thread_local AltWorkspace ws;
    ws.resize(U, ntrend, namp, nbeta, kA);
    ws.W.setZero();
    ws.TW.setZero();
    ws.TT.setZero();
    ws.DW.setZero();
    ws.yW.setZero();
    ws.TD.setZero();
    ws.Ty.setZero();
    double DD = 0.0, Dy = 0.0;
    {
        double* w = ws.w.data();
        double* Wd = ws.W.data();
        double* TWd = ws.TW.data();
        for (int i = 0; i < n; ++i) {
            const int row = subset[i] - 1;
            const double yt = y.values[row];
            for (int j = 0; j < nbeta; ++j) w[j] = basis.harmonics(row, j);
            for (int g = 1; g < namp; ++g) {
                const double pg = basis.amp_pow(row, g - 1);
                for (int j = 0; j < nbeta; ++j) w[g * nbeta + j] = pg * w[j];
            }
            for (int c = 0; c < U; ++c) {
                const double wc = w[c];
                double* col = Wd + c * U;
                for (int r = c; r < U; ++r) col[r] += wc * w[r];
            }
            for (int u = 0; u < U; ++u) ws.yW[u] += yt * w[u];
            for (int a = 0; a < ntrend; ++a) {
                const double ta = basis.trend_pow(row, a);
                for (int u = 0; u < U; ++u) TWd[u * ntrend + a] += ta * w[u];
                ws.Ty[a] += ta * yt;
                for (int aa = 0; aa <= a; ++aa)
                    ws.TT(a, aa) += ta * basis.trend_pow(row, aa);
            }
            if (shift_cols && subset[i] >= theta.shift_time &&
                theta.shift_time > 0) {
                for (int u = 0; u < U; ++u) ws.DW[u] += w[u];
                for (int a = 0; a < ntrend; ++a)
                    ws.TD[a] += basis.trend_pow(row, a);
                DD += 1.0;
                Dy += yt;
            }
        }
        ws.W.triangularView<Eigen::Upper>() = ws.W.transpose();
        ws.TT.triangularView<Eigen::Upper>() = ws.TT.transpose();
    }

    double* alpha = ws.alpha.data();
    double* gamma = ws.gamma.data();
    double* beta = ws.beta.data();
    for (int a = 0; a < ntrend; ++a) alpha[a] = theta.trend[a];
    for (int g = 0; g < ngamma; ++g) gamma[g] = theta.amplitude[g];
    for (int b = 0; b < spec.n_harmonics; ++b) {
        beta[2 * b] = theta.harmonics[b][0];
        beta[2 * b + 1] = theta.harmonics[b][1];
    }
    const double* Wd = ws.W.data();
    const double* TWd = ws.TW.data();
    const double* DWd = ws.DW.data();
    const double* yWd = ws.yW.data();
    double* TWb = ws.TWb.data();  // ntrend x namp
    double* CC = ws.CC.data();    // namp x namp
    double* DWb = ws.DWb.data();
    double* yWb = ws.yWb.data();
    double* E = ws.E.data();
    double* gtil = ws.gtil.data();

    std::copy(alpha, alpha + ntrend, ws.prev_alpha.data());
    std::copy(gamma, gamma + ngamma, ws.prev_gamma.data());
    std::copy(beta, beta + nbeta, ws.prev_beta.data());
    double delta1 = theta.shift_height, prev_delta = theta.shift_height;
    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        // Trend/amplitude/shift step with the seasonal block frozen. The
        // seasonal column for amplitude degree g has w-weights beta placed in
        // block g; S itself is the block-0 column.
        for (int g = 0; g < namp; ++g) {
            for (int gg = 0; gg <= g; ++gg) {
                double acc = 0.0;
                for (int jp = 0; jp < nbeta; ++jp) {
                    const double* col = Wd + (gg * nbeta + jp) * U + g * nbeta;
                    double inner = 0.0;
                    for (int j = 0; j < nbeta; ++j) inner += beta[j] * col[j];
                    acc += beta[jp] * inner;
                }
                CC[g * namp + gg] = CC[gg * namp + g] = acc;
            }
            double dwb = 0.0, ywb = 0.0;
            for (int a = 0; a < ntrend; ++a) TWb[g * ntrend + a] = 0.0;
            for (int j = 0; j < nbeta; ++j) {
                const int c = g * nbeta + j;
                const double bj = beta[j];
                for (int a = 0; a < ntrend; ++a)
                    TWb[g * ntrend + a] += bj * TWd[c * ntrend + a];
                dwb += bj * DWd[c];
                ywb += bj * yWd[c];
            }
            DWb[g] = dwb;
            yWb[g] = ywb;
        }
        auto& GA = ws.lsA.gram();
        auto& bA = ws.lsA.proj();
        for (int a = 0; a < ntrend; ++a) {
            for (int aa = 0; aa <= a; ++aa) GA(a, aa) = ws.TT(a, aa);
            bA[a] = ws.Ty[a] - TWb[a];
        }
        for (int g = 1; g < namp; ++g) {
            const int c = ntrend + g - 1;
            for (int a = 0; a < ntrend; ++a) GA(c, a) = TWb[g * ntrend + a];
            for (int gg = 1; gg <= g; ++gg)
                GA(c, ntrend + gg - 1) = CC[g * namp + gg];
            bA[c] = yWb[g] - CC[g * namp];
        }
        if (shift_cols) {
            const int c = kA - 1;
            for (int a = 0; a < ntrend; ++a) GA(c, a) = ws.TD[a];
            for (int g = 1; g < namp; ++g) GA(c, ntrend + g - 1) = DWb[g];
            GA(c, c) = DD;
            bA[c] = Dy - DWb[0];
        }
        if (!ws.lsA.solve())
            throw SingularFit("rank-deficient design in trend/amplitude step");
        const double* solA = ws.lsA.solution().data();
        for (int a = 0; a < ntrend; ++a) alpha[a] = solA[a];
        for (int g = 0; g < ngamma; ++g) gamma[g] = solA[ntrend + g];
        delta1 = shift_cols ? solA[kA - 1] : 0.0;

        // Harmonics step with trend, amplitude and shift frozen. Column j of
        // the design has w-weights (1, gamma) spread across blocks at j.
        gtil[0] = 1.0;
        for (int g = 0; g < ngamma; ++g) gtil[g + 1] = gamma[g];
        for (int u = 0; u < U; ++u) {
            double e = yWd[u] - DWd[u] * delta1;
            for (int a = 0; a < ntrend; ++a) e -= alpha[a] * TWd[u * ntrend + a];
            E[u] = e;
        }
        auto& GB = ws.lsB.gram();
        auto& bB = ws.lsB.proj();
        for (int j = 0; j < nbeta; ++j) {
            for (int jj = 0; jj <= j; ++jj) {
                double v = 0.0;
                for (int gp = 0; gp < namp; ++gp) {
                    const double* col = Wd + (gp * nbeta + jj) * U + j;
                    double inner = 0.0;
                    for (int g = 0; g < namp; ++g)
                        inner += gtil[g] * col[g * nbeta];
                    v += gtil[gp] * inner;
                }
                GB(j, jj) = v;
            }
            double b = 0.0;
            for (int g = 0; g < namp; ++g) b += gtil[g] * E[g * nbeta + j];
            bB[j] = b;
        }
        if (!ws.lsB.solve())
            throw SingularFit("rank-deficient design in harmonics step");
        std::copy(ws.lsB.solution().data(), ws.lsB.solution().data() + nbeta,
                  beta);

        // Euclidean norm ratio of the coefficient change, shift time excluded;
        // an all-zero previous vector forces another iteration.
        res.iterations = iter;
        double num = 0.0, den = 0.0;
        for (int a = 0; a < ntrend; ++a) {
            const double d = alpha[a] - ws.prev_alpha[a];
            num += d * d;
            den += ws.prev_alpha[a] * ws.prev_alpha[a];
        }
        for (int j = 0; j < nbeta; ++j) {
            const double d = beta[j] - ws.prev_beta[j];
            num += d * d;
            den += ws.prev_beta[j] * ws.prev_beta[j];
        }
        for (int g = 0; g < ngamma; ++g) {
            const double d = gamma[g] - ws.prev_gamma[g];
            num += d * d;
            den += ws.prev_gamma[g] * ws.prev_gamma[g];
        }
        if (shift_cols) {
            num += (delta1 - prev_delta) * (delta1 - prev_delta);
            den += prev_delta * prev_delta;
        }
        if (den > 0.0 ? num < opts.tol * opts.tol * den : num == 0.0) {
            res.converged = true;
            break;
        }
        std::copy(alpha, alpha + ntrend, ws.prev_alpha.data());
        std::copy(gamma, gamma + ngamma, ws.prev_gamma.data());
        std::copy(beta, beta + nbeta, ws.prev_beta.data());
        prev_delta = delta1;
    }
    for (int a = 0; a < ntrend; ++a) theta.trend[a] = alpha[a];
    for (int g = 0; g < ngamma; ++g) theta.amplitude[g] = gamma[g];
    theta.shift_height = delta1;
    for (int b = 0; b < spec.n_harmonics; ++b)
        theta.harmonics[b] = {beta[2 * b], beta[2 * b + 1]};
    res.theta = theta;
    res.subset_ssr = subset_ssr(res.theta, spec, basis, y, subset);
    return res;
}

}  // namespace

LsSolution ls_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& rhs) {
    LsSolution sol;
    sol.coeffs = Eigen::VectorXd::Zero(X.cols());
    if (X.rows() == 0 || X.cols() == 0 || X.rows() < X.cols()) return sol;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    const auto diag = qr.matrixR().diagonal().head(X.cols()).cwiseAbs().eval();
    const double dmax = diag.maxCoeff();
    const double dmin = diag.minCoeff();
    sol.rank_ok = dmax > 0.0 && dmin >= kRankThreshold * dmax;
    sol.coeffs = qr.solve(rhs);
    return sol;
}

namespace detail {

AlsResult als_fit_basis(const TimeSeries& y, const ModelSpec& spec,
                        const ModelBasis& basis, std::span<const int> subset,
                        int shift_time, const AlsOptions& opts) {
    spec.validate();
    check_subset(y, subset);
    const auto sys = design_init(spec, basis, y, shift_time, subset);
    const auto sol = solve_or_throw(sys, "linearized init");
    Theta theta = unpack_init(spec, sol.coeffs, shift_time);
    return alternate(y, spec, basis, subset, theta, opts);
}

AlsResult als_fit_basis_warm(const TimeSeries& y, const ModelSpec& spec,
                             const ModelBasis& basis, std::span<const int> subset,
                             const Theta& start, const AlsOptions& opts) {
    spec.validate();
    check_subset(y, subset);
    return alternate(y, spec, basis, subset, start, opts);
}

}  // namespace detail

AlsResult als_fit(const TimeSeries& y, const ModelSpec& spec,
                  std::span<const int> subset, int shift_time,
                  const AlsOptions& opts) {
    const auto basis = ModelBasis::build(spec, y.size());
    return detail::als_fit_basis(y, spec, basis, subset, shift_time, opts);
}

AlsResult als_fit(const TimeSeries& y, const ModelSpec& spec,
                  std::span<const int> subset, const Theta& start,
                  const AlsOptions& opts) {
    const auto basis = ModelBasis::build(spec, y.size());
    return detail::als_fit_basis_warm(y, spec, basis, subset, start, opts);
}

}  // namespace nlts
