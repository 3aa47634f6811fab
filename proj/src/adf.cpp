#include "dnode/adf.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "dnode/errors.hpp"

namespace dnode {
namespace {

// MacKinnon (1994) tau distribution, constant-only case (one I(1) series).
constexpr double kTauStar = -1.61;
constexpr double kTauMin = -18.83;
constexpr double kTauMax = 2.74;
constexpr double kSmallP[3] = {2.1659, 1.4412, 0.038269};
constexpr double kLargeP[4] = {1.7339, 0.93202, -0.12745, -0.010368};

// MacKinnon (2010) response surface, constant-only: crit = b0 + b1/n + b2/n^2 + b3/n^3.
constexpr double kCrit1[4] = {-3.43035, -6.5393, -16.786, -79.433};
constexpr double kCrit5[4] = {-2.86154, -2.8903, -4.234, -40.040};
constexpr double kCrit10[4] = {-2.56677, -1.5384, -2.809, 0.0};

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Solve the symmetric positive definite system a*x = b in place (Cholesky).
// Returns false when the system is numerically singular.
bool solve_spd(std::vector<double>& a, std::vector<double>& b, int k) {
    std::vector<double> l(static_cast<std::size_t>(k) * k, 0.0);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a[static_cast<std::size_t>(i) * k + j];
            for (int m = 0; m < j; ++m) {
                s -= l[static_cast<std::size_t>(i) * k + m] * l[static_cast<std::size_t>(j) * k + m];
            }
            if (i == j) {
                if (s <= 0.0) return false;
                l[static_cast<std::size_t>(i) * k + j] = std::sqrt(s);
            } else {
                l[static_cast<std::size_t>(i) * k + j] = s / l[static_cast<std::size_t>(j) * k + j];
            }
        }
    }
    // forward then back substitution
    for (int i = 0; i < k; ++i) {
        double s = b[i];
        for (int m = 0; m < i; ++m) s -= l[static_cast<std::size_t>(i) * k + m] * b[m];
        b[i] = s / l[static_cast<std::size_t>(i) * k + i];
    }
    for (int i = k - 1; i >= 0; --i) {
        double s = b[i];
        for (int m = i + 1; m < k; ++m) s -= l[static_cast<std::size_t>(m) * k + i] * b[m];
        b[i] = s / l[static_cast<std::size_t>(i) * k + i];
    }
    a = std::move(l);
    return true;
}

// (A^T A)^{-1}[idx][idx] from the Cholesky factor left in `l` by solve_spd.
double inv_diag(const std::vector<double>& l, int k, int idx) {
    // Solve L z = e_idx, then L^T w = z; result = w[idx].
    std::vector<double> z(k, 0.0);
    z[idx] = 1.0;
    for (int i = 0; i < k; ++i) {
        double s = z[i];
        for (int m = 0; m < i; ++m) s -= l[static_cast<std::size_t>(i) * k + m] * z[m];
        z[i] = s / l[static_cast<std::size_t>(i) * k + i];
    }
    for (int i = k - 1; i >= 0; --i) {
        double s = z[i];
        for (int m = i + 1; m < k; ++m) s -= l[static_cast<std::size_t>(m) * k + i] * z[m];
        z[i] = s / l[static_cast<std::size_t>(i) * k + i];
    }
    return z[idx];
}

} // namespace

int schwert_lag(int n) {
    return static_cast<int>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

double mackinnon_pvalue(double stat) {
    if (stat > kTauMax) return 1.0;
    if (stat < kTauMin) return 0.0;
    double poly;
    if (stat <= kTauStar) {
        poly = kSmallP[0] + stat * (kSmallP[1] + stat * kSmallP[2]);
    } else {
        poly = kLargeP[0] + stat * (kLargeP[1] + stat * (kLargeP[2] + stat * kLargeP[3]));
    }
    return norm_cdf(poly);
}

double mackinnon_crit(double level, int nobs) {
    const double* b = nullptr;
    if (level <= 0.015) b = kCrit1;
    else if (level <= 0.075) b = kCrit5;
    else b = kCrit10;
    if (nobs <= 0) return b[0];
    const double n = static_cast<double>(nobs);
    return b[0] + b[1] / n + b[2] / (n * n) + b[3] / (n * n * n);
}

AdfResult adf_test(std::span<const double> y, int lags) {
    const int n = static_cast<int>(y.size());
    if (n < 4) throw EdaError("adf_test: series too short");
    const int p = lags < 0 ? schwert_lag(n) : lags;
    const int nobs = n - 1 - p;   // usable dy_t rows
    const int k = p + 2;          // constant, y_{t-1}, p lagged differences
    if (nobs <= k) {
        throw EdaError("adf_test: not enough observations for lag order " + std::to_string(p));
    }

    AdfResult res;
    res.lags = p;
    res.nobs = nobs;
    res.crit_1 = mackinnon_crit(0.01, nobs);
    res.crit_5 = mackinnon_crit(0.05, nobs);
    res.crit_10 = mackinnon_crit(0.10, nobs);

    // Degenerate (constant) series: no unit root to find.
    double vmin = y[0], vmax = y[0];
    for (double v : y) {
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    if (vmax - vmin < 1e-12 * (1.0 + std::fabs(vmax))) {
        res.degenerate = true;
        res.stat = -1e10;
        res.p_value = 0.0;
        return res;
    }

    std::vector<double> dy(n - 1);
    for (int t = 0; t + 1 < n; ++t) dy[t] = y[t + 1] - y[t];

    // Row t of X: [1, y_{t}, dy_{t-1}, ..., dy_{t-p}] predicting dy_t,
    // for t = p .. n-2 (0-based into dy).
    std::vector<double> xtx(static_cast<std::size_t>(k) * k, 0.0);
    std::vector<double> xty(k, 0.0);
    std::vector<double> row(k);
    double yss = 0.0;
    for (int t = p; t <= n - 2; ++t) {
        row[0] = 1.0;
        row[1] = y[t];
        for (int i = 1; i <= p; ++i) row[1 + i] = dy[t - i];
        const double target = dy[t];
        yss += target * target;
        for (int i = 0; i < k; ++i) {
            xty[i] += row[i] * target;
            for (int j = 0; j <= i; ++j) xtx[static_cast<std::size_t>(i) * k + j] += row[i] * row[j];
        }
    }
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            xtx[static_cast<std::size_t>(i) * k + j] = xtx[static_cast<std::size_t>(j) * k + i];
        }
    }

    std::vector<double> beta = xty;
    std::vector<double> chol = xtx;
    if (!solve_spd(chol, beta, k)) {
        res.degenerate = true;
        res.stat = -1e10;
        res.p_value = 0.0;
        return res;
    }

    // Residual sum of squares via SSR = y'y - beta'X'y.
    double ssr = yss;
    for (int i = 0; i < k; ++i) ssr -= beta[i] * xty[i];
    ssr = std::max(ssr, 0.0);
    const double s2 = ssr / static_cast<double>(nobs - k);
    const double se = std::sqrt(s2 * inv_diag(chol, k, 1));
    if (!(se > 0.0) || !std::isfinite(se)) {
        res.degenerate = true;
        res.stat = -1e10;
        res.p_value = 0.0;
        return res;
    }
    res.stat = beta[1] / se;
    res.p_value = mackinnon_pvalue(res.stat);
    return res;
}

} // namespace dnode
