#pragma once

#include <stdexcept>
#include <string>

namespace ccnet {

// Exit-code buckets used by the CLI: 1 validation, 2 runtime, 3 data format.
struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace ccnet
