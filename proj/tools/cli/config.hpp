#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "gtap/error.hpp"

namespace gtap::cli {

inline constexpr char kConfigSchema[] = "gtap-config/1";

// The config file is malformed, uses an unknown key, or has a value of the
// wrong type.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Every recognised key with its default value. A user config may only
// contain keys that appear here.
nlohmann::json default_config();

// Overlays `user` onto `defaults`, rejecting unknown keys and type mismatches.
// Keys whose default is null accept a string.
nlohmann::json merge_config(const nlohmann::json& defaults, const nlohmann::json& user,
                            const std::string& where = "");

// Parses and merges a config file over the defaults. An empty path yields
// the defaults.
nlohmann::json load_config(const std::filesystem::path& path);

// FNV-1a over the canonical dump without the seed and bias-file path, as 16
// hex digits.
// Runs that differ only by seed share a hash and can be merged by `report`.
std::string config_hash(const nlohmann::json& resolved);

}  // namespace gtap::cli
