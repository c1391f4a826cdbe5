#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <string>

#include "hyperkge/train.hpp"

namespace hyperkge {

// Ordered key -> value settings parsed from flat "key = value" lines.
// '#' starts a comment, blank lines are skipped. Duplicate keys keep the
// last value (later lines override earlier ones).
using Settings = std::map<std::string, std::string>;

Settings parse_settings(std::istream& in, const std::string& origin);
Settings parse_settings_file(const std::filesystem::path& path);

// Applies settings onto the config. Unknown keys and malformed values raise
// UsageError naming the key.
void apply_settings(TrainConfig& config, const Settings& settings);

// Every tunable as "key = value" lines, in a fixed order, parseable by
// parse_settings.
std::string config_text(const TrainConfig& config);

// Maps a preset name to its config file. A value naming an existing file is
// used as-is; otherwise "<name>.conf" is searched in $HYPERKGE_PRESETS, then
// in the build-time preset directory.
std::filesystem::path resolve_preset(const std::string& name_or_path);

}  // namespace hyperkge
