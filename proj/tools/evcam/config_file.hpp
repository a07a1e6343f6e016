#pragma once

#include <string>
#include <utility>
#include <vector>

namespace evcam::cli {

/// `key = value` lines; blank lines and lines starting with '#' or ';' are
/// skipped. Keys are long flag names without the leading dashes.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path);

/// Extracts `--config <path>` / `--config=<path>` from argv, returning the
/// path (empty if absent) and the remaining arguments.
std::pair<std::string, std::vector<std::string>> take_config_flag(const std::vector<std::string>& args);

}  // namespace evcam::cli
