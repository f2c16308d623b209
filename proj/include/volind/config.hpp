#pragma once

#include <map>
#include <string>

#include "volind/experiment.hpp"

namespace volind {

/// Raw `section.key -> value` pairs as read from an INI document.
using ConfigMap = std::map<std::string, std::string>;

struct LoadedConfig {
    ExperimentConfig experiment;
    std::string output_dir = "out";
    ConfigMap effective;  // every key with its resolved value, output.dir excluded
    std::string hash;     // SHA-256 of the canonical effective document
};

/// Parses an INI document. Throws ConfigError on syntax errors or unknown keys.
ConfigMap parse_config_text(const std::string& text);
ConfigMap read_config_file(const std::string& path);

/// Applies VOLIND_<SECTION>_<KEY> environment overrides for every known key.
void apply_env_overrides(ConfigMap& raw);

/// Fills defaults, resolves geometry rules and builds the effective map and hash.
LoadedConfig resolve_config(const ConfigMap& raw);

/// read_config_file + apply_env_overrides + `overrides` + resolve_config.
LoadedConfig load_config(const std::string& path, const ConfigMap& overrides = {});

/// Canonical form: sorted `key=value` lines.
std::string canonical_config(const ConfigMap& effective);
std::string sha256_hex(const std::string& data);

}  // namespace volind
