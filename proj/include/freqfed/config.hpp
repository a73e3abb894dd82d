#pragma once

#include <stdexcept>
#include <string>

#include "freqfed/federation.hpp"

namespace freqfed {

/// Raised for malformed config text, unknown keys, or invalid values.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parses the flat key=value config format. Lines starting with '#' and blank
/// lines are ignored; unknown keys are hard errors.
FederationConfig parse_config_text(const std::string& text);
FederationConfig load_config_file(const std::string& path);

/// Renders a config back to the key=value format (used by tests and to dump
/// effective settings).
std::string config_to_text(const FederationConfig& cfg);

}  // namespace freqfed
