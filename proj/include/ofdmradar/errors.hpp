#pragma once

#include <stdexcept>
#include <string>

namespace ofdmradar {

/// Bad parameters, malformed configs, shape mismatches. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Scenario violates the assumptions of the simplified channel model
/// (delay beyond the CP window, velocity beyond the Doppler bound).
/// CLI exit code 3.
class ModelValidityError : public std::runtime_error {
public:
    explicit ModelValidityError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ofdmradar
