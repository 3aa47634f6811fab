#pragma once

#include <stdexcept>
#include <string>

namespace dnode {

struct IngestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SplitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct WindowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EdaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DecompError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NormError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace dnode
