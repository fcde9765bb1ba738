#include "cli/workspace.hpp"

#include <fstream>
#include <sstream>

#include "cli/config.hpp"
#include "gtap/error.hpp"
#include "gtap/model_io.hpp"

namespace gtap::cli {

using nlohmann::json;

namespace {

std::string required_path(const json& data, const char* key) {
  if (!data[key].is_string() || data[key].get<std::string>().empty()) {
    throw ConfigError(std::string("data.") + key + " is required for source '" +
                      data["source"].get<std::string>() + "'");
  }
  return data[key].get<std::string>();
}

// Parts come out of a seeded shuffle, so a prefix is a uniform subsample.
Dataset truncated(const Dataset& d, std::size_t limit) {
  if (limit == 0 || limit >= d.size()) return d;
  std::vector<std::size_t> idx(limit);
  for (std::size_t i = 0; i < limit; ++i) idx[i] = i;
  return d.subset(idx);
}

std::size_t size_setting(const json& data, const char* key) {
  const auto v = data[key].get<std::int64_t>();
  if (v < 0) throw ConfigError(std::string("data.") + key + " must be non-negative");
  return static_cast<std::size_t>(v);
}

}  // namespace

DataParts load_data(const Workspace& ws) {
  const json& data = ws.config["data"];
  const std::string source = data["source"].get<std::string>();
  const std::size_t train_size = size_setting(data, "train_size");
  const std::size_t eval_size = size_setting(data, "eval_size");
  const std::size_t test_size = size_setting(data, "test_size");

  DataParts parts;
  if (source == "idx" && data["test_images"].is_string()) {
    const Dataset pool =
        load_idx(required_path(data, "train_images"), required_path(data, "train_labels"));
    Dataset test =
        load_idx(required_path(data, "test_images"), required_path(data, "test_labels"));
    const std::size_t eval_n = eval_size == 0 ? pool.size() / 10 : eval_size;
    if (eval_n >= pool.size()) throw ConfigError("data.eval_size exceeds the training pool");
    const std::size_t train_n =
        train_size == 0 ? pool.size() - eval_n : std::min(train_size, pool.size() - eval_n);
    const auto order = sample_indices(pool.size(), train_n + eval_n, ws.seed);
    parts.train = pool.subset(std::span(order).first(train_n), ":train");
    parts.eval = pool.subset(std::span(order).subspan(train_n), ":eval");
    parts.test = truncated(test, test_size);
    const std::size_t classes = std::max(pool.n_classes, test.n_classes);
    parts.train.n_classes = parts.eval.n_classes = parts.test.n_classes = classes;
    return parts;
  }

  Dataset full;
  if (source == "idx") {
    full = load_idx(required_path(data, "train_images"), required_path(data, "train_labels"));
  } else if (source == "csv") {
    full = load_csv(required_path(data, "path"));
  } else if (source == "text") {
    const TextCorpus corpus = load_text_corpus(required_path(data, "path"));
    const auto vocab = data["vocab_size"].get<std::int64_t>();
    if (vocab < 1) throw ConfigError("data.vocab_size must be at least 1");
    full = vectorize_text(corpus, static_cast<std::size_t>(vocab)).second;
  } else if (source == "synthetic") {
    const auto n = data["n"].get<std::int64_t>();
    if (n < 4) throw ConfigError("data.n must be at least 4");
    full = make_synthetic(parse_synthetic_kind(data["kind"].get<std::string>()),
                          static_cast<std::size_t>(n), ws.seed);
  } else {
    throw ConfigError("unknown data.source '" + source +
                      "' (expected idx, csv, text or synthetic)");
  }

  const auto& f = data["fractions"];
  if (!f.is_array() || f.size() != 3 || !f[0].is_number() || !f[1].is_number() ||
      !f[2].is_number()) {
    throw ConfigError("data.fractions must hold three numbers (train, eval, test)");
  }
  DatasetSplit s = split(full, {f[0].get<double>(), f[1].get<double>(), f[2].get<double>()},
                         ws.seed);
  parts.train = truncated(s.train, train_size);
  parts.eval = truncated(s.eval, eval_size);
  parts.test = truncated(s.test, test_size);
  return parts;
}

NetworkSpec model_spec(const Workspace& ws, const DataParts& data) {
  NetworkSpec spec;
  spec.layer_sizes.push_back(data.train.n_features);
  const json& hidden = ws.config["model"]["hidden"];
  for (const auto& h : hidden) {
    if (!h.is_number_integer() || h.get<std::int64_t>() < 1) {
      throw ConfigError("model.hidden must list positive integers");
    }
    spec.layer_sizes.push_back(h.get<std::size_t>());
  }
  spec.layer_sizes.push_back(data.train.n_classes);
  spec.validate();
  return spec;
}

std::filesystem::path model_path(const Workspace& ws) {
  const json& p = ws.config["model"]["path"];
  if (p.is_string() && !p.get<std::string>().empty()) return p.get<std::string>();
  return ws.out / "model.bin";
}

DenseNetwork load_checked_model(const Workspace& ws, const DataParts& data) {
  DenseNetwork net = load_model(model_path(ws));
  if (net.spec().input_size() != data.eval.n_features) {
    throw InvalidArgument("model expects " + std::to_string(net.spec().input_size()) +
                          " features but the data has " + std::to_string(data.eval.n_features));
  }
  if (net.spec().output_size() < data.eval.n_classes) {
    throw InvalidArgument("model has fewer outputs than the data has classes");
  }
  return net;
}

std::string artifact_comment(const Workspace& ws) {
  return "# config_hash=" + ws.hash + " seed=" + std::to_string(ws.seed) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "'");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_json(const std::filesystem::path& path, const json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace gtap::cli
