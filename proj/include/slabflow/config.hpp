#pragma once

#include "slabflow/timeslab.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace slabflow {

using ConfigOverrides = std::map<std::string, std::string>;

/// Every configuration key, in serialisation order.
const std::vector<std::string>& config_keys();

/// Parses flat `key = value` text (comments start with #, strings may be
/// double-quoted), then applies `overrides` and validates. Unknown or
/// repeated keys and unparsable values raise ConfigError naming the key.
SimConfig parse_config(std::string_view text, const ConfigOverrides& overrides = {});
SimConfig parse_config_file(const std::string& path, const ConfigOverrides& overrides = {});

/// Applies one key to a config without validating.
void set_config_value(SimConfig& config, const std::string& key, std::string_view value);
std::string get_config_value(const SimConfig& config, const std::string& key);

/// Text that parse_config maps back to the identical config. Unset sigma is
/// omitted.
std::string serialize_config(const SimConfig& config);

/// Shortest decimal text that reads back to the same double; independent
/// of the C locale.
std::string format_number(double x);
double parse_number(std::string_view text, const std::string& key);

const char* to_string(InflowProfile p);
const char* to_string(PressureGuess g);
const char* to_string(SnapshotMode m);

}  // namespace slabflow
