#pragma once

#include <stdexcept>
#include <string>

namespace tt2fr {

/// Invalid configuration value or config file.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or unusable input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace tt2fr
