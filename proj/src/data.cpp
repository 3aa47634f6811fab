#include "dnode/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dnode/errors.hpp"

namespace dnode {
namespace {

std::vector<std::string> split_line(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string strip(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

// Days since 1970-01-01 for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(int y, int m, int d) {
    static const int cum[12] = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334};
    std::int64_t days = 0;
    for (int yy = 1970; yy < y; ++yy) days += is_leap(yy) ? 366 : 365;
    for (int yy = y; yy < 1970; ++yy) days -= is_leap(yy) ? 366 : 365;
    days += cum[m - 1] + (m > 2 && is_leap(y) ? 1 : 0) + (d - 1);
    return days;
}

// Accepts "YYYY-MM-DD", "YYYY-MM-DD HH:MM:SS" and the ISO-8601 'T' form,
// with an optional :SS. Slashes are tolerated as date separators.
std::int64_t parse_datetime(const std::string& raw, std::size_t line_no) {
    const std::string s = strip(raw);
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    char sep = ' ';
    int n = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &h, &mi, &sec);
    if (n < 3) n = std::sscanf(s.c_str(), "%d/%d/%d%c%d:%d:%d", &y, &mo, &d, &sep, &h, &mi, &sec);
    if (n < 3 || mo < 1 || mo > 12 || d < 1 || d > 31) {
        throw IngestError("line " + std::to_string(line_no) + ": cannot parse datetime '" + s + "'");
    }
    if (n >= 4 && sep != ' ' && sep != 'T') {
        throw IngestError("line " + std::to_string(line_no) + ": cannot parse datetime '" + s + "'");
    }
    return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + sec;
}

double parse_value(const std::string& raw, std::size_t line_no, std::size_t col) {
    const std::string s = strip(raw);
    if (s.empty()) {
        throw IngestError("line " + std::to_string(line_no) + ", column " +
                          std::to_string(col) + ": missing value");
    }
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v)) {
        throw IngestError("line " + std::to_string(line_no) + ", column " +
                          std::to_string(col) + ": non-numeric value '" + s + "'");
    }
    return v;
}

Panel slice_panel(const Panel& p, std::size_t begin, std::size_t end) {
    Panel out;
    out.feature_names = p.feature_names;
    out.timestamps.assign(p.timestamps.begin() + static_cast<std::ptrdiff_t>(begin),
                          p.timestamps.begin() + static_cast<std::ptrdiff_t>(end));
    out.values = Matrix(end - begin, p.n_features());
    for (std::size_t i = begin; i < end; ++i) {
        for (std::size_t j = 0; j < p.n_features(); ++j) {
            out.values(i - begin, j) = p.values(i, j);
        }
    }
    return out;
}

} // namespace

void SplitSpec::validate() const {
    if (train_frac <= 0 || val_frac <= 0 || test_frac <= 0) {
        throw SplitError("split fractions must lie in (0,1)");
    }
    if (std::fabs(train_frac + val_frac + test_frac - 1.0) > 1e-9) {
        throw SplitError("split fractions must sum to 1");
    }
}

Matrix WindowPair::x() const {
    Matrix out(lookback, panel->n_features());
    for (std::size_t i = 0; i < lookback; ++i) {
        for (std::size_t j = 0; j < panel->n_features(); ++j) {
            out(i, j) = panel->values(start + i, j);
        }
    }
    return out;
}

Matrix WindowPair::y() const {
    Matrix out(horizon, panel->n_features());
    for (std::size_t i = 0; i < horizon; ++i) {
        for (std::size_t j = 0; j < panel->n_features(); ++j) {
            out(i, j) = panel->values(start + lookback + i, j);
        }
    }
    return out;
}

Panel load_csv(const std::string& path, const std::string& datetime_column) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw IngestError("'" + path + "': empty file");
    auto header = split_line(line, ',');
    if (header.size() < 2) throw IngestError("'" + path + "': need a datetime column plus data");
    if (!datetime_column.empty() && strip(header[0]) != datetime_column) {
        throw IngestError("'" + path + "': first column is '" + strip(header[0]) +
                          "', expected '" + datetime_column + "'");
    }

    Panel panel;
    for (std::size_t j = 1; j < header.size(); ++j) panel.feature_names.push_back(strip(header[j]));
    const std::size_t n_features = panel.feature_names.size();

    std::vector<double> flat;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (strip(line).empty()) continue;
        auto fields = split_line(line, ',');
        if (fields.size() != n_features + 1) {
            throw IngestError("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(n_features + 1) + " fields, got " +
                              std::to_string(fields.size()));
        }
        panel.timestamps.push_back(parse_datetime(fields[0], line_no));
        for (std::size_t j = 1; j < fields.size(); ++j) {
            flat.push_back(parse_value(fields[j], line_no, j));
        }
    }
    if (panel.timestamps.empty()) throw IngestError("'" + path + "': no data rows");

    const std::size_t n = panel.timestamps.size();
    for (std::size_t i = 1; i < n; ++i) {
        if (panel.timestamps[i] <= panel.timestamps[i - 1]) {
            throw IngestError("timestamps not strictly increasing at row " + std::to_string(i + 1));
        }
    }
    if (n >= 3) {
        const std::int64_t step = panel.timestamps[1] - panel.timestamps[0];
        for (std::size_t i = 2; i < n; ++i) {
            if (panel.timestamps[i] - panel.timestamps[i - 1] != step) {
                throw IngestError("non-uniform timestamp granularity at row " + std::to_string(i + 1));
            }
        }
    }

    panel.values = Matrix(n, n_features);
    std::copy(flat.begin(), flat.end(), panel.values.data());
    return panel;
}

std::array<Panel, 3> split(const Panel& panel, const SplitSpec& spec, std::size_t min_len) {
    spec.validate();
    const std::size_t n = panel.n_steps();
    const auto b1 = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.train_frac));
    const auto b2 = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * (spec.train_frac + spec.val_frac)));
    std::array<Panel, 3> parts{slice_panel(panel, 0, b1), slice_panel(panel, b1, b2),
                               slice_panel(panel, b2, n)};
    for (const auto& part : parts) {
        if (part.n_steps() == 0 || (min_len > 0 && part.n_steps() < min_len)) {
            throw SplitError("split of " + std::to_string(n) +
                             " rows leaves a piece shorter than " + std::to_string(min_len));
        }
    }
    return parts;
}

FeatureStats zscore_fit(const Panel& train) {
    const std::size_t n = train.n_steps(), f = train.n_features();
    if (n == 0) throw IngestError("zscore_fit: empty panel");
    FeatureStats stats;
    stats.mean.assign(f, 0.0);
    stats.stddev.assign(f, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < f; ++j) stats.mean[j] += train.values(i, j);
    }
    for (std::size_t j = 0; j < f; ++j) stats.mean[j] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < f; ++j) {
            const double d = train.values(i, j) - stats.mean[j];
            stats.stddev[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < f; ++j) {
        stats.stddev[j] = std::max(std::sqrt(stats.stddev[j] / static_cast<double>(n)), 1e-8);
    }
    return stats;
}

void zscore_apply(Panel& panel, const FeatureStats& stats) {
    for (std::size_t i = 0; i < panel.n_steps(); ++i) {
        for (std::size_t j = 0; j < panel.n_features(); ++j) {
            panel.values(i, j) = (panel.values(i, j) - stats.mean[j]) / stats.stddev[j];
        }
    }
}

std::vector<WindowPair> windows(const Panel& panel, std::size_t lookback, std::size_t horizon) {
    const std::size_t n = panel.n_steps();
    if (lookback < 1 || horizon < 1 || n < lookback + horizon) {
        throw WindowError("need at least L+H=" + std::to_string(lookback + horizon) +
                          " rows, have " + std::to_string(n));
    }
    std::vector<WindowPair> out;
    out.reserve(n - lookback - horizon + 1);
    for (std::size_t s = 0; s + lookback + horizon <= n; ++s) {
        out.push_back({&panel, s, lookback, horizon});
    }
    return out;
}

} // namespace dnode
