#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dnode/matrix.hpp"

namespace dnode {

// A multivariate time series: N uniformly spaced timesteps x F features.
// Immutable by convention once loaded; everything downstream works on
// windows sliced out of it.
struct Panel {
    std::vector<std::int64_t> timestamps; // epoch seconds, strictly increasing
    Matrix values;                        // N x F
    std::vector<std::string> feature_names;

    std::size_t n_steps() const { return values.rows(); }
    std::size_t n_features() const { return values.cols(); }
};

struct SplitSpec {
    double train_frac = 0.7;
    double val_frac = 0.1;
    double test_frac = 0.2;

    void validate() const; // throws SplitError
};

// One supervised pair: x = rows [start, start+lookback), y = the following
// `horizon` rows. Kept as a view; materialize with x()/y().
struct WindowPair {
    const Panel* panel = nullptr;
    std::size_t start = 0;
    std::size_t lookback = 0;
    std::size_t horizon = 0;

    Matrix x() const;
    Matrix y() const;
};

struct FeatureStats {
    Vec mean;
    Vec stddev; // floored at 1e-8
};

// First column is the datetime (ISO-8601 date or "YYYY-MM-DD HH:MM:SS"),
// remaining columns numeric, header row required.
Panel load_csv(const std::string& path, const std::string& datetime_column = "date");

// Chronological contiguous split at floor(N*frac) boundaries. min_len > 0
// additionally requires every piece to hold at least one (L+H) window.
std::array<Panel, 3> split(const Panel& panel, const SplitSpec& spec,
                           std::size_t min_len = 0);

FeatureStats zscore_fit(const Panel& train);
void zscore_apply(Panel& panel, const FeatureStats& stats);

std::vector<WindowPair> windows(const Panel& panel, std::size_t lookback,
                                std::size_t horizon);

} // namespace dnode
