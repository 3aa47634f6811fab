#pragma once

#include <span>
#include <vector>

#include "dnode/data.hpp"

namespace dnode {

// One row of dataset statistics plus the decomposition parameters selected
// from them.
struct EdaReport {
    double forecastability = 0.0;   // 1 - normalized spectral entropy, in [0,1]
    double trend_slope = 0.0;       // OLS slope / mean |value|
    double seasonality_ratio = 0.0; // fraction of windows passing the ACF test
    double stationarity_ratio = 0.0;// fraction of residual windows passing ADF
    int kernel_size = 25;
    int period = 24;
    bool use_seasonality = true;
    bool use_instance_norm = false;
};

struct CandidateGrid {
    std::vector<int> kernel_sizes{10, 25, 50};
    std::vector<int> periods{24, 48};
    int window_length = 336;
    // ADF windows may differ from the ACF windows (stationarity is judged
    // on longer slices); 0 means "same as window_length".
    int adf_window_length = 0;
    double seasonality_threshold = 0.5;
};

// 1 - H(p)/log(K) where p is the normalized power spectrum over the
// K = floor(N/2) positive-frequency bins and H is Shannon entropy (natural
// log). A constant series returns 0 by convention.
double forecastability(std::span<const double> series);

// OLS slope of value against index, divided by the mean absolute value of
// the series; the raw slope when that mean is zero.
double trend_slope(std::span<const double> series);

// Fraction of (non-overlapping window x feature) slices whose detrended
// sequence has sample autocorrelation at lag `period` above 1.96/sqrt(n).
double acf_seasonal_ratio(const Panel& panel, int window_length, int kernel, int period);

struct AdfRatioResult {
    double ratio = 0.0;
    std::vector<double> p_values; // one per window x feature, for tie-breaks
};

// Fraction of residual slices whose ADF statistic rejects a unit root at
// the given significance (MacKinnon critical value).
AdfRatioResult adf_stationary_ratio(const Panel& panel, int window_length, int kernel,
                                    int period, double significance = 0.05);

// Per kernel size keep the 3 periods with the highest seasonality ratio,
// then pick the survivor with the highest residual stationarity ratio.
// Near-ties (within 1e-6) go to the candidate with more windows at
// p < 0.01, then the smaller mean p-value. use_instance_norm is left false;
// callers decide it from detect_distribution_shift.
EdaReport select_parameters(const Panel& panel, const CandidateGrid& grid);

// True when any feature's trend-component mean moves between train and test
// by more than `threshold` times that feature's train trend std.
bool detect_distribution_shift(const Panel& train, const Panel& test, int kernel,
                               double threshold = 0.5);

// Feature-averaged full-series forecastability and adjusted trend slope
// (the two whole-panel statistics of the report).
double panel_forecastability(const Panel& panel);
double panel_trend_slope(const Panel& panel);

} // namespace dnode
