#pragma once

#include <string>
#include <string_view>

#include "cqfb/experiment.hpp"

namespace cqfb {

/// Parses a flat `key = value` file. Blank lines and `#` comments are
/// ignored; unknown keys, duplicates and malformed lines are ConfigErrors
/// carrying the line number. The result is validated with resolve().
ExperimentConfig parse_config(std::string_view text);

/// Every key with its current value, one `key = value` per line. Parsing the
/// output reproduces cfg bit-for-bit.
std::string config_to_text(const ExperimentConfig& cfg);

/// Defaults with one comment line per key (for --print-defaults).
std::string documented_defaults();

/// Recovers the config text from the `# key = value` echo at the top of an
/// exported CSV.
std::string extract_header_config(std::string_view csv_text);

}  // namespace cqfb
