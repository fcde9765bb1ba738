#include "cli/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace gtap::cli {

using nlohmann::json;

json default_config() {
  return json::parse(R"({
    "schema": "gtap-config/1",
    "seed": 0,
    "data": {
      "source": "synthetic",
      "train_images": null,
      "train_labels": null,
      "test_images": null,
      "test_labels": null,
      "path": null,
      "kind": "blobs",
      "n": 1000,
      "vocab_size": 1000,
      "fractions": [0.7, 0.15, 0.15],
      "train_size": 0,
      "eval_size": 512,
      "test_size": 0
    },
    "model": {
      "hidden": [16],
      "path": null,
      "include_inputs": false
    },
    "train": {
      "learning_rate": 0.05,
      "epochs": 10,
      "batch_size": 32,
      "dropout": 0.0
    },
    "bands": {
      "axis_points": 21,
      "k": 500,
      "output": "true_class_prob",
      "batch_per_trial": false,
      "bootstrap": 1000
    },
    "prune": {
      "method": "top_n",
      "index": null,
      "d": 0.5,
      "fraction": 0.5,
      "step": 1,
      "samples": 1000,
      "estimator": "pie",
      "granularity": "neuron",
      "bias_file": null
    },
    "curve": {
      "methods": ["top_n", "iterated_prune", "iterated_build", "wmp", "wgmp", "random"],
      "fractions": [1.0, 0.5, 0.25, 0.1],
      "seeds": [],
      "timing": false
    },
    "oracle": {
      "k": 50000,
      "tolerance": 0.01
    },
    "report": {
      "inputs": [],
      "force": false
    }
  })");
}

namespace {

std::string type_name(const json& v) {
  if (v.is_number_integer()) return "integer";
  if (v.is_number()) return "number";
  return v.type_name();
}

bool compatible(const json& def, const json& val) {
  if (def.is_null()) return val.is_null() || val.is_string();
  if (def.is_number_integer()) return val.is_number_integer();
  if (def.is_number()) return val.is_number();
  return def.type() == val.type();
}

}  // namespace

json merge_config(const json& defaults, const json& user, const std::string& where) {
  if (!user.is_object()) {
    throw ConfigError("config" + (where.empty() ? "" : " section '" + where + "'") +
                      " must be a JSON object");
  }
  json out = defaults;
  for (const auto& [key, value] : user.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!defaults.contains(key)) throw ConfigError("unknown config key '" + path + "'");
    const json& def = defaults[key];
    if (def.is_object()) {
      out[key] = merge_config(def, value, path);
      continue;
    }
    if (!compatible(def, value)) {
      throw ConfigError("config key '" + path + "' expects " +
                        (def.is_null() ? std::string("string or null") : type_name(def)) +
                        ", got " + type_name(value));
    }
    out[key] = value;
  }
  if (where.empty() && out["schema"] != kConfigSchema) {
    throw ConfigError("unsupported config schema '" + out["schema"].get<std::string>() +
                      "' (expected " + kConfigSchema + ")");
  }
  return out;
}

json load_config(const std::filesystem::path& path) {
  if (path.empty()) return default_config();
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  json user;
  try {
    user = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return merge_config(default_config(), user);
}

std::string config_hash(const json& resolved) {
  json canonical = resolved;
  canonical.erase("seed");
  // The bias file's d has already been folded into prune.d; its location is
  // not a setting.
  if (canonical.contains("prune")) canonical["prune"].erase("bias_file");
  const std::string text = canonical.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

}  // namespace gtap::cli
