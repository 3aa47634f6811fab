#pragma once

#include <span>

namespace dnode {

// Augmented Dickey-Fuller unit-root test, constant-only regression:
//   dy_t = alpha + gamma*y_{t-1} + sum_{i=1..p} beta_i dy_{t-i} + e_t
// H0: gamma = 0 (unit root). Rejecting at the 5% MacKinnon critical value
// reads as "stationary".
struct AdfResult {
    double stat = 0.0;     // t-statistic of gamma
    double p_value = 1.0;  // MacKinnon (1994) approximation
    double crit_1 = 0.0;   // MacKinnon (2010) finite-sample critical values
    double crit_5 = 0.0;
    double crit_10 = 0.0;
    int lags = 0;
    int nobs = 0;          // regression sample size
    bool degenerate = false; // constant series: counted stationary, p = 0
};

// floor(12*(n/100)^(1/4))
int schwert_lag(int n);

// lags < 0 selects the Schwert rule. Throws EdaError when the regression
// sample is too short.
AdfResult adf_test(std::span<const double> y, int lags = -1);

// MacKinnon 1994 asymptotic p-value for the constant-only tau statistic.
double mackinnon_pvalue(double stat);

// MacKinnon 2010 response-surface critical value; level is 0.01/0.05/0.10,
// nobs <= 0 gives the asymptotic value.
double mackinnon_crit(double level, int nobs);

} // namespace dnode
