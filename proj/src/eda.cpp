#include "dnode/eda.hpp"

#include <algorithm>
#include <cmath>

#include "dnode/adf.hpp"
#include "dnode/decompose.hpp"
#include "dnode/errors.hpp"
#include "dnode/fft.hpp"

namespace dnode {
namespace {

// Sample autocorrelation at one lag, mean removed.
double acf_at_lag(std::span<const double> x, int lag) {
    const int n = static_cast<int>(x.size());
    if (lag <= 0 || lag >= n) throw EdaError("acf: lag out of range");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double denom = 0.0;
    for (double v : x) denom += (v - mean) * (v - mean);
    if (denom < 1e-300) return 0.0;
    double num = 0.0;
    for (int t = 0; t + lag < n; ++t) num += (x[t] - mean) * (x[t + lag] - mean);
    return num / denom;
}

Matrix window_slice(const Panel& panel, std::size_t begin, std::size_t len, std::size_t feature) {
    Matrix out(len, 1);
    for (std::size_t i = 0; i < len; ++i) out(i, 0) = panel.values(begin + i, feature);
    return out;
}

struct Candidate {
    int kernel = 0;
    int period = 0;
    double seasonality = 0.0;
    double stationarity = 0.0;
    std::vector<double> p_values;
};

} // namespace

double forecastability(std::span<const double> series) {
    if (series.size() < 4) throw EdaError("forecastability: need at least 4 points");
    const auto power = power_spectrum(series);
    const std::size_t k = power.size();
    double total = 0.0;
    for (double p : power) total += p;
    if (total < 1e-300) return 0.0; // constant series
    double entropy = 0.0;
    for (double p : power) {
        const double q = p / total;
        if (q > 0.0) entropy -= q * std::log(q);
    }
    const double f = 1.0 - entropy / std::log(static_cast<double>(k));
    return std::clamp(f, 0.0, 1.0);
}

double trend_slope(std::span<const double> series) {
    const std::size_t n = series.size();
    if (n < 2) throw EdaError("trend_slope: need at least 2 points");
    // OLS of value against index 0..n-1.
    const double xbar = static_cast<double>(n - 1) / 2.0;
    double ybar = 0.0;
    for (double v : series) ybar += v;
    ybar /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, mean_abs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = static_cast<double>(i) - xbar;
        sxy += dx * (series[i] - ybar);
        sxx += dx * dx;
        mean_abs += std::fabs(series[i]);
    }
    mean_abs /= static_cast<double>(n);
    const double slope = sxy / sxx;
    return mean_abs > 0.0 ? slope / mean_abs : slope;
}

double acf_seasonal_ratio(const Panel& panel, int window_length, int kernel, int period) {
    if (window_length < 4) throw EdaError("acf_seasonal_ratio: window too short");
    if (period <= 0 || period >= window_length || kernel >= window_length) {
        throw EdaError("acf_seasonal_ratio: period and kernel must be below window length");
    }
    const std::size_t wl = static_cast<std::size_t>(window_length);
    const std::size_t n_windows = panel.n_steps() / wl;
    if (n_windows == 0) throw EdaError("acf_seasonal_ratio: panel shorter than one window");
    const double bound = 1.96 / std::sqrt(static_cast<double>(window_length));

    std::size_t seasonal = 0, total = 0;
    for (std::size_t f = 0; f < panel.n_features(); ++f) {
        for (std::size_t w = 0; w < n_windows; ++w) {
            const Matrix x = window_slice(panel, w * wl, wl, f);
            const Matrix trend = moving_average_trend(x, kernel);
            Vec detrended(wl);
            for (std::size_t i = 0; i < wl; ++i) detrended[i] = x(i, 0) - trend(i, 0);
            if (acf_at_lag(detrended, period) > bound) ++seasonal;
            ++total;
        }
    }
    return static_cast<double>(seasonal) / static_cast<double>(total);
}

AdfRatioResult adf_stationary_ratio(const Panel& panel, int window_length, int kernel,
                                    int period, double significance) {
    if (window_length < 20) throw EdaError("adf_stationary_ratio: window must be >= 20");
    const std::size_t wl = static_cast<std::size_t>(window_length);
    const std::size_t n_windows = panel.n_steps() / wl;
    if (n_windows == 0) throw EdaError("adf_stationary_ratio: panel shorter than one window");

    DecompConfig config;
    config.kernel_size = kernel;
    config.period = period;
    config.extract_seasonality = period >= 2 && static_cast<std::size_t>(period) <= wl;

    AdfRatioResult res;
    std::size_t stationary = 0, total = 0;
    for (std::size_t f = 0; f < panel.n_features(); ++f) {
        for (std::size_t w = 0; w < n_windows; ++w) {
            const Matrix x = window_slice(panel, w * wl, wl, f);
            const DecomposedWindow d = decompose(x, config);
            const Vec residual = d.residual.column(0);
            const AdfResult adf = adf_test(residual);
            const double crit = mackinnon_crit(significance, adf.nobs);
            if (adf.degenerate || adf.stat < crit) ++stationary;
            res.p_values.push_back(adf.p_value);
            ++total;
        }
    }
    res.ratio = static_cast<double>(stationary) / static_cast<double>(total);
    return res;
}

EdaReport select_parameters(const Panel& panel, const CandidateGrid& grid) {
    if (grid.kernel_sizes.empty() || grid.periods.empty()) {
        throw EdaError("select_parameters: empty candidate grid");
    }
    const int adf_window =
        grid.adf_window_length > 0 ? grid.adf_window_length : grid.window_length;

    std::vector<Candidate> survivors;
    for (int kernel : grid.kernel_sizes) {
        std::vector<Candidate> per_kernel;
        for (int period : grid.periods) {
            if (period >= grid.window_length || kernel >= grid.window_length) continue;
            Candidate c;
            c.kernel = kernel;
            c.period = period;
            c.seasonality = acf_seasonal_ratio(panel, grid.window_length, kernel, period);
            per_kernel.push_back(std::move(c));
        }
        std::stable_sort(per_kernel.begin(), per_kernel.end(),
                         [](const Candidate& a, const Candidate& b) {
                             if (a.seasonality != b.seasonality) return a.seasonality > b.seasonality;
                             return a.period < b.period;
                         });
        if (per_kernel.size() > 3) per_kernel.resize(3);
        for (auto& c : per_kernel) survivors.push_back(std::move(c));
    }
    if (survivors.empty()) throw EdaError("select_parameters: no feasible candidates");

    for (auto& c : survivors) {
        auto adf = adf_stationary_ratio(panel, adf_window, c.kernel, c.period);
        c.stationarity = adf.ratio;
        c.p_values = std::move(adf.p_values);
    }

    // Candidate comparison: stationarity ratio first. Ties fall back to the
    // seasonality ratio (the winning combination is the one with the highest
    // seasonality), then to the count of windows with p < 0.01, then to the
    // smaller period, then to grid order. Leftover deterministic seasonality
    // makes residual ADF p-values spuriously tiny, so the p-value count must
    // not outrank seasonality.
    auto strong_count = [](const Candidate& c) {
        return std::count_if(c.p_values.begin(), c.p_values.end(),
                             [](double p) { return p < 0.01; });
    };
    auto better = [&](const Candidate& a, const Candidate& b) {
        if (a.stationarity > b.stationarity + 1e-6) return true;
        if (a.stationarity < b.stationarity - 1e-6) return false;
        if (a.seasonality > b.seasonality + 1e-6) return true;
        if (a.seasonality < b.seasonality - 1e-6) return false;
        const auto sa = strong_count(a), sb = strong_count(b);
        if (sa != sb) return sa > sb;
        return a.period < b.period;
    };
    const Candidate* best = &survivors.front();
    for (const auto& c : survivors) {
        if (better(c, *best)) best = &c;
    }

    EdaReport report;
    report.forecastability = panel_forecastability(panel);
    report.trend_slope = panel_trend_slope(panel);
    report.kernel_size = best->kernel;
    report.period = best->period;
    report.seasonality_ratio = best->seasonality;
    report.stationarity_ratio = best->stationarity;
    report.use_seasonality = best->seasonality >= grid.seasonality_threshold;
    report.use_instance_norm = false;
    return report;
}

bool detect_distribution_shift(const Panel& train, const Panel& test, int kernel,
                               double threshold) {
    if (train.n_steps() == 0 || test.n_steps() == 0) throw EdaError("empty panel");
    const Matrix trend_train = moving_average_trend(train.values, kernel);
    const Matrix trend_test = moving_average_trend(test.values, kernel);
    for (std::size_t j = 0; j < train.n_features(); ++j) {
        double m_train = 0.0, m_test = 0.0;
        for (std::size_t i = 0; i < trend_train.rows(); ++i) m_train += trend_train(i, j);
        m_train /= static_cast<double>(trend_train.rows());
        for (std::size_t i = 0; i < trend_test.rows(); ++i) m_test += trend_test(i, j);
        m_test /= static_cast<double>(trend_test.rows());
        double var = 0.0;
        for (std::size_t i = 0; i < trend_train.rows(); ++i) {
            const double d = trend_train(i, j) - m_train;
            var += d * d;
        }
        const double sd = std::sqrt(var / static_cast<double>(trend_train.rows()));
        if (std::fabs(m_train - m_test) > threshold * std::max(sd, 1e-12)) return true;
    }
    return false;
}

double panel_forecastability(const Panel& panel) {
    double acc = 0.0;
    for (std::size_t j = 0; j < panel.n_features(); ++j) {
        acc += forecastability(panel.values.column(j));
    }
    return acc / static_cast<double>(panel.n_features());
}

double panel_trend_slope(const Panel& panel) {
    double acc = 0.0;
    for (std::size_t j = 0; j < panel.n_features(); ++j) {
        acc += trend_slope(panel.values.column(j));
    }
    return acc / static_cast<double>(panel.n_features());
}

} // namespace dnode
