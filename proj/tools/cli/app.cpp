#include "cli/app.hpp"

#include <functional>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "cli/workspace.hpp"
#include "gtap/error.hpp"

namespace gtap::cli {

using nlohmann::json;

namespace {

constexpr char kExitCodeHelp[] = R"(Exit codes:
  0  success
  1  unexpected internal error
  2  bad command line (unknown flag, missing value)
  3  invalid configuration or argument value
  4  missing or unreadable/unwritable file
  5  training or saliency diverged (non-finite numbers)
  6  input file has the wrong format or version
  7  report inputs carry different config hashes (override with --force))";

// Values given on the command line; unset members leave the config alone.
struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string out = "gtap_out";
  std::optional<std::string> model;

  std::optional<std::int64_t> epochs, batch_size;
  std::optional<double> lr, dropout;

  std::optional<std::int64_t> axis_points, k;
  std::optional<std::string> trial_output;

  std::optional<std::string> method, index, estimator, granularity, bias_file;
  std::optional<double> fraction, d;
  std::optional<std::int64_t> step, samples;

  std::vector<std::string> methods;
  std::vector<double> fractions;
  std::vector<std::uint64_t> seeds;
  bool timing = false;

  std::vector<std::string> inputs;
  bool force = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config file (schema gtap-config/1)");
  cmd->add_option("--seed", f.seed, "master seed (overrides the config)");
  cmd->add_option("--threads", f.threads, "worker threads; never changes results")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "output directory")->capture_default_str();
}

void add_model(CLI::App* cmd, Flags& f) {
  cmd->add_option("--model", f.model, "model file (default <out>/model.bin)");
}

void add_prune_options(CLI::App* cmd, Flags& f, bool single_method) {
  if (single_method) {
    cmd->add_option("--method", f.method,
                    "top_n, iterated_prune, iterated_build, wmp, wgmp or random");
    cmd->add_option("--fraction", f.fraction, "retained fraction in (0, 1]");
    cmd->add_option("--granularity", f.granularity, "neuron or weight (baselines)");
  }
  cmd->add_option("--d", f.d, "bias d in [0, 1] (overrides --bias-file)");
  cmd->add_option("--bias-file", f.bias_file, "bias.json written by `bands`");
  cmd->add_option("--index", f.index, "shapley, banzhaf or biased_banzhaf[(t)]");
  cmd->add_option("--step", f.step, "neurons removed/added per iteration (0 = one round)");
  cmd->add_option("--samples", f.samples, "per-player sample budget");
  cmd->add_option("--estimator", f.estimator, "pie, shared or exact");
}

template <typename T>
void set_if(json& section, const char* key, const std::optional<T>& value) {
  if (value) section[key] = *value;
}

double read_bias_file(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw FormatError("bias file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object() || !doc.contains("d") || !doc["d"].is_number()) {
    throw FormatError("bias file '" + path + "' has no numeric \"d\"");
  }
  const double d = doc["d"].get<double>();
  if (!(d >= 0.0 && d <= 1.0)) throw FormatError("bias file '" + path + "' has d outside [0, 1]");
  return d;
}

Workspace make_workspace(const Flags& f) {
  Workspace ws;
  ws.config = load_config(f.config);
  json& c = ws.config;
  if (f.seed) c["seed"] = *f.seed;
  if (!c["seed"].is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
  ws.seed = c["seed"].get<std::uint64_t>();
  ws.threads = f.threads;
  ws.out = f.out;

  set_if(c["model"], "path", f.model);
  set_if(c["train"], "epochs", f.epochs);
  set_if(c["train"], "batch_size", f.batch_size);
  set_if(c["train"], "learning_rate", f.lr);
  set_if(c["train"], "dropout", f.dropout);
  set_if(c["bands"], "axis_points", f.axis_points);
  set_if(c["bands"], "k", f.k);
  set_if(c["oracle"], "k", f.k);
  set_if(c["bands"], "output", f.trial_output);
  json& p = c["prune"];
  set_if(p, "method", f.method);
  set_if(p, "index", f.index);
  set_if(p, "estimator", f.estimator);
  set_if(p, "granularity", f.granularity);
  set_if(p, "fraction", f.fraction);
  set_if(p, "step", f.step);
  set_if(p, "samples", f.samples);
  set_if(p, "bias_file", f.bias_file);
  if (f.d) {
    p["d"] = *f.d;
    p["bias_file"] = nullptr;
  } else if (p["bias_file"].is_string()) {
    p["d"] = read_bias_file(p["bias_file"].get<std::string>());
  }
  if (!f.methods.empty()) c["curve"]["methods"] = f.methods;
  if (!f.fractions.empty()) c["curve"]["fractions"] = f.fractions;
  if (!f.seeds.empty()) c["curve"]["seeds"] = f.seeds;
  if (f.timing) c["curve"]["timing"] = true;
  if (!f.inputs.empty()) c["report"]["inputs"] = f.inputs;
  if (f.force) c["report"]["force"] = true;

  // Re-run the schema check so flag values get the same type validation.
  ws.config = merge_config(default_config(), c);
  ws.hash = config_hash(ws.config);
  return ws;
}

int exit_code_for(std::ostream& err, const char* kind, const std::string& what, int code) {
  err << "gtap: " << kind << ": " << what << "\n";
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Game-theoretic neural network pruning: power indices, uncertainty bands, "
               "pruning schedules and compression curves.",
               "gtap"};
  app.footer(kExitCodeHelp);
  app.require_subcommand(1, 1);
  Flags f;

  auto* train = app.add_subcommand("train", "train a dense ReLU network and save the model");
  add_common(train, f);
  add_model(train, f);
  train->add_option("--epochs", f.epochs, "training epochs");
  train->add_option("--batch-size", f.batch_size, "minibatch size");
  train->add_option("--lr", f.lr, "SGD learning rate");
  train->add_option("--dropout", f.dropout, "hidden-unit dropout rate in [0, 1) during training");

  auto* bands = app.add_subcommand("bands", "estimate the (p, q) uncertainty bands and select d");
  add_common(bands, f);
  add_model(bands, f);
  bands->add_option("--axis-points", f.axis_points, "grid points per axis over [0, 1]");
  bands->add_option("--k", f.k, "trials per grid cell");
  bands->add_option("--trial-output", f.trial_output, "true_class_prob or correctness");

  auto* prune = app.add_subcommand("prune", "prune the model with one method and write the mask");
  add_common(prune, f);
  add_model(prune, f);
  add_prune_options(prune, f, true);

  auto* curve = app.add_subcommand("curve", "compression curve: accuracy versus retained fraction");
  add_common(curve, f);
  add_model(curve, f);
  add_prune_options(curve, f, false);
  curve->add_option("--methods", f.methods, "methods to compare (append -weights for weight "
                                            "granularity baselines)")
      ->delimiter(',');
  curve->add_option("--fractions", f.fractions, "retained fractions")->delimiter(',');
  curve->add_option("--seeds", f.seeds, "seeds; one row per (method, fraction, seed)")
      ->delimiter(',');
  curve->add_flag("--timing", f.timing, "record wall-clock time per row");

  auto* oracle = app.add_subcommand("oracle", "compare estimators with exact indices on small games");
  add_common(oracle, f);
  oracle->add_option("--k", f.k, "samples per estimate");

  auto* report = app.add_subcommand("report", "merge curve CSVs into per-method mean and std");
  add_common(report, f);
  report->add_option("--input", f.inputs, "curve CSV files to merge")->delimiter(',');
  report->add_flag("--force", f.force, "merge even if config hashes differ");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const std::map<CLI::App*, std::function<void(const Workspace&, std::ostream&)>> dispatch = {
      {train, cmd_train}, {bands, cmd_bands},   {prune, cmd_prune},
      {curve, cmd_curve}, {oracle, cmd_oracle}, {report, cmd_report}};
  try {
    const Workspace ws = make_workspace(f);
    std::filesystem::create_directories(ws.out);
    write_json(ws.out / "resolved_config.json", ws.config);
    dispatch.at(app.get_subcommands().front())(ws, out);
    return kExitOk;
  } catch (const HashMismatchError& e) {
    return exit_code_for(err, "config hash mismatch", e.what(), kExitHashMismatch);
  } catch (const DivergenceError& e) {
    return exit_code_for(err, "diverged", e.what(), kExitDivergence);
  } catch (const FormatError& e) {
    return exit_code_for(err, "format error", e.what(), kExitFormat);
  } catch (const IoError& e) {
    return exit_code_for(err, "i/o error", e.what(), kExitIo);
  } catch (const InvalidArgument& e) {
    return exit_code_for(err, "invalid configuration", e.what(), kExitConfig);
  } catch (const json::exception& e) {
    return exit_code_for(err, "invalid configuration", e.what(), kExitConfig);
  } catch (const std::filesystem::filesystem_error& e) {
    return exit_code_for(err, "i/o error", e.what(), kExitIo);
  } catch (const std::exception& e) {
    return exit_code_for(err, "error", e.what(), kExitFailure);
  }
}

}  // namespace gtap::cli
