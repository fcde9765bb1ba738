#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "gtap/dataset.hpp"
#include "gtap/network.hpp"

namespace gtap::cli {

// Resolved settings shared by every command.
struct Workspace {
  nlohmann::json config;  // defaults merged with the config file and flag overrides
  std::string hash;       // config_hash(config)
  std::uint64_t seed = 0;
  int threads = 1;
  std::filesystem::path out;
};

struct DataParts {
  Dataset train;
  Dataset eval;  // the evaluation batch behind the neuron game and the bands
  Dataset test;  // held out; only used for reported accuracy
};

// Builds the three parts described by the "data" section. IDX sources with
// test files draw train and eval from the training files; every other source
// is split by data.fractions.
DataParts load_data(const Workspace& ws);

NetworkSpec model_spec(const Workspace& ws, const DataParts& data);
std::filesystem::path model_path(const Workspace& ws);
// Loads the model and checks it against the data shape.
DenseNetwork load_checked_model(const Workspace& ws, const DataParts& data);

// "# config_hash=<hash> seed=<seed>" line that heads every CSV artifact.
std::string artifact_comment(const Workspace& ws);

void write_text(const std::filesystem::path& path, const std::string& content);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
std::string read_text(const std::filesystem::path& path);

}  // namespace gtap::cli
