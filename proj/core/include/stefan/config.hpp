#pragma once

#include <map>
#include <string>
#include <vector>

#include "stefan/sde.hpp"

namespace stefan {

struct ParsedConfig {
  SimConfig sim;
  std::vector<int> converge_modes{8, 16, 32};  // per-axis m values for `converge`
  std::string preset;                          // empty when fully explicit
};

// Flat `key = value` text with '#' comments. Unknown keys are rejected with
// their line number. A `preset` key expands a named default configuration;
// later keys override individual fields.
//
// Presets: heat1d, heat2d, heat2d-exact (pinned dt for the exact-decay
// oracle), slab2d (the noisy two-phase default).
ParsedConfig parse_config_text(const std::string& text);
ParsedConfig parse_config_file(const std::string& path);

ParsedConfig preset_config(const std::string& name);

// Every resolved key/value, suitable for echoing into the manifest and for
// reconstructing the run (parse_config_text on the echo is the identity).
std::map<std::string, std::string> echo_config(const ParsedConfig& cfg);

}  // namespace stefan
