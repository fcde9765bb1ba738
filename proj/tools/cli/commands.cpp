#include "cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <map>
#include <memory>
#include <sstream>

#include "cli/config.hpp"
#include "gtap/game.hpp"
#include "gtap/model_io.hpp"
#include "gtap/power_index.hpp"
#include "gtap/pruning.hpp"
#include "gtap/training.hpp"
#include "gtap/uncertainty.hpp"

namespace gtap::cli {

using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::int64_t positive_int(const json& section, const char* key, const char* where) {
  const auto v = section[key].get<std::int64_t>();
  if (v < 1) throw ConfigError(std::string(where) + "." + key + " must be at least 1");
  return v;
}

PruneConfig prune_config(const Workspace& ws) {
  const json& p = ws.config["prune"];
  PruneConfig cfg;
  cfg.method = parse_prune_method(p["method"].get<std::string>());
  cfg.d = p["d"].get<double>();
  if (p["index"].is_string()) cfg.index = IndexKind::parse(p["index"].get<std::string>(), cfg.d);
  cfg.fraction = p["fraction"].get<double>();
  const auto step = p["step"].get<std::int64_t>();
  if (step < 0) throw ConfigError("prune.step must be non-negative");
  cfg.step = static_cast<std::size_t>(step);
  cfg.samples = positive_int(p, "samples", "prune");
  cfg.estimator = parse_index_estimator(p["estimator"].get<std::string>());
  cfg.granularity = parse_granularity(p["granularity"].get<std::string>());
  cfg.seed = ws.seed;
  cfg.threads = ws.threads;
  cfg.validate();
  return cfg;
}

bool include_inputs(const Workspace& ws) {
  return ws.config["model"]["include_inputs"].get<bool>();
}

std::vector<double> number_list(const json& arr, const char* what) {
  std::vector<double> out;
  for (const auto& v : arr) {
    if (!v.is_number()) throw ConfigError(std::string(what) + " must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

double resolve_bias(const Workspace& ws, std::string* source) {
  const json& p = ws.config["prune"];
  if (source != nullptr) *source = p["bias_file"].is_string() ? "bias_file" : "config";
  return p["d"].get<double>();
}

void cmd_train(const Workspace& ws, std::ostream& out) {
  const DataParts data = load_data(ws);
  const NetworkSpec spec = model_spec(ws, data);
  const json& t = ws.config["train"];
  TrainParams params;
  params.learning_rate = t["learning_rate"].get<double>();
  params.epochs = static_cast<std::size_t>(t["epochs"].get<std::int64_t>());
  params.dropout = t["dropout"].get<double>();
  params.batch_size = static_cast<std::size_t>(positive_int(t, "batch_size", "train"));
  params.seed = ws.seed;
  if (t["epochs"].get<std::int64_t>() < 0) throw ConfigError("train.epochs must be non-negative");

  TrainLog log;
  const DenseNetwork net = train(DenseNetwork::glorot(spec, ws.seed), data.train, params, &log);
  const auto path = model_path(ws);
  write_text(path, serialize_model(net));

  const bool inputs = include_inputs(ws);
  auto acc = [&](const Dataset& d) {
    if (d.empty()) return 0.0;
    const BatchEvaluator ev(net, d, inputs);
    return ev.accuracy(ev.universe().kept_set());
  };
  json doc;
  doc["config_hash"] = ws.hash;
  doc["seed"] = ws.seed;
  doc["layer_sizes"] = spec.layer_sizes;
  doc["initial_loss"] = log.initial_loss;
  doc["epoch_loss"] = log.epoch_loss;
  doc["train_accuracy"] = acc(data.train);
  doc["eval_accuracy"] = acc(data.eval);
  doc["test_accuracy"] = acc(data.test);
  doc["rows"] = {{"train", data.train.size()}, {"eval", data.eval.size()},
                 {"test", data.test.size()}};
  write_json(ws.out / "train_log.json", doc);
  out << "trained " << spec.layer_sizes.size() - 2 << "-hidden-layer network on "
      << data.train.size() << " rows: loss " << log.initial_loss << " -> "
      << (log.epoch_loss.empty() ? log.initial_loss : log.epoch_loss.back())
      << ", test accuracy " << doc["test_accuracy"].get<double>() << "\n";
}

void cmd_bands(const Workspace& ws, std::ostream& out) {
  const DataParts data = load_data(ws);
  const DenseNetwork net = load_checked_model(ws, data);
  const json& b = ws.config["bands"];
  const BatchEvaluator evaluator(net, data.eval, include_inputs(ws));

  MCUEConfig cfg;
  cfg.k = positive_int(b, "k", "bands");
  cfg.seed = ws.seed;
  cfg.output = parse_trial_output(b["output"].get<std::string>());
  cfg.batch_per_trial = b["batch_per_trial"].get<bool>();
  cfg.bootstrap = b["bootstrap"].get<std::int64_t>();
  const auto axis = static_cast<std::size_t>(positive_int(b, "axis_points", "bands"));
  const UncertaintyGrid grid = band_grid(evaluator, axis, cfg, ws.threads);
  const BiasSelection sel = select_bias(grid);

  write_text(ws.out / "bands.csv", artifact_comment(ws) + band_csv(grid));
  json doc;
  doc["config_hash"] = ws.hash;
  doc["seed"] = ws.seed;
  doc["t_star"] = sel.t_star;
  doc["d"] = sel.d;
  doc["degenerate"] = sel.degenerate;
  doc["axis_points"] = axis;
  doc["k"] = cfg.k;
  doc["diagonal"] = json::array();
  for (const auto& [p, v] : sel.diagonal) doc["diagonal"].push_back({p, v});
  write_json(ws.out / "bias.json", doc);

  out << "band grid " << axis << "x" << axis << " (k=" << cfg.k << "): t* = " << fmt17(sel.t_star)
      << ", d = " << fmt17(sel.d) << "\n";
  if (sel.degenerate) {
    out << "warning: the diagonal variance is zero everywhere; falling back to d = 0.5\n";
  }
}

void cmd_prune(const Workspace& ws, std::ostream& out) {
  const DataParts data = load_data(ws);
  const DenseNetwork net = load_checked_model(ws, data);
  const PruneConfig cfg = prune_config(ws);
  const bool inputs = include_inputs(ws);
  std::string d_source;
  resolve_bias(ws, &d_source);

  json mask_doc;
  json log;
  double test_acc = 0.0, eval_acc = 0.0;
  const BatchEvaluator test_eval(net, data.test, inputs);
  if (is_gtap(cfg.method)) {
    const NeuronGame game(net, data.eval, inputs);
    const PruneResult result = run_schedule(game, cfg);
    eval_acc = game.value(result.kept);
    test_acc = test_eval.accuracy(result.kept);
    mask_doc["n"] = game.num_players();
    mask_doc["kept"] = result.kept.members();
    log["index_kind"] = cfg.resolved_index().to_string();
    log["estimator"] = to_string(cfg.estimator);
    log["samples_per_round"] = result.samples_per_round;
    log["rounds"] = result.rounds.size();
    log["changed"] = result.changed;
  } else {
    const BaselineResult result = baseline_prune(net, data.eval, cfg, inputs);
    const BatchEvaluator pruned_test(result.network, data.test, inputs);
    const BatchEvaluator pruned_eval(result.network, data.eval, inputs);
    eval_acc = pruned_eval.accuracy(result.mask.kept_set());
    test_acc = pruned_test.accuracy(result.mask.kept_set());
    mask_doc["n"] = result.mask.size();
    mask_doc["kept"] = result.mask.kept_set().members();
    if (cfg.granularity == Granularity::kWeight) {
      write_text(ws.out / "pruned_model.bin", serialize_model(result.network));
      mask_doc["kept_weights"] = result.kept_weights;
      mask_doc["total_weights"] = result.total_weights;
    }
  }
  mask_doc["method"] = method_label(cfg);
  mask_doc["granularity"] = to_string(cfg.granularity);
  mask_doc["config_hash"] = ws.hash;
  mask_doc["seed"] = ws.seed;
  write_json(ws.out / "mask.json", mask_doc);

  log["config_hash"] = ws.hash;
  log["seed"] = ws.seed;
  log["method"] = method_label(cfg);
  log["d"] = cfg.d;
  log["d_source"] = d_source;
  log["fraction"] = cfg.fraction;
  log["kept"] = mask_doc["kept"].size();
  log["eval_accuracy"] = eval_acc;
  log["test_accuracy"] = test_acc;
  write_json(ws.out / "prune_log.json", log);
  out << method_label(cfg) << " at fraction " << cfg.fraction << " (d = " << fmt17(cfg.d)
      << "): kept " << mask_doc["kept"].size() << "/" << mask_doc["n"].get<std::size_t>()
      << " neurons, test accuracy " << fmt17(test_acc) << "\n";
}

void cmd_curve(const Workspace& ws, std::ostream& out) {
  const DataParts data = load_data(ws);
  const DenseNetwork net = load_checked_model(ws, data);
  const PruneConfig base = prune_config(ws);
  const json& c = ws.config["curve"];

  std::vector<CurveMethod> methods;
  for (const auto& m : c["methods"]) {
    if (!m.is_string()) throw ConfigError("curve.methods must hold method names");
    std::string name = m.get<std::string>();
    CurveMethod cm;
    cm.config = base;
    cm.config.index.reset();
    cm.config.granularity = Granularity::kNeuron;
    const std::string suffix = "-weights";
    if (name.size() > suffix.size() && name.ends_with(suffix)) {
      name.resize(name.size() - suffix.size());
      cm.config.granularity = Granularity::kWeight;
    }
    cm.config.method = parse_prune_method(name);
    if (is_gtap(cm.config.method) && cm.config.granularity == Granularity::kWeight) {
      throw ConfigError("'" + m.get<std::string>() + "': GTAP schedules prune neurons only");
    }
    if (is_gtap(cm.config.method)) cm.config.index = base.index;
    methods.push_back(cm);
  }

  CurveOptions options;
  options.fractions = number_list(c["fractions"], "curve.fractions");
  for (const auto& s : c["seeds"]) {
    if (!s.is_number_unsigned()) throw ConfigError("curve.seeds must hold non-negative integers");
    options.seeds.push_back(s.get<std::uint64_t>());
  }
  if (options.seeds.empty()) options.seeds.push_back(ws.seed);
  options.include_inputs = include_inputs(ws);
  options.timing = c["timing"].get<bool>();
  options.threads = ws.threads;

  const CompressionCurve curve = compression_curve(net, data.eval, data.test, methods, options);
  write_text(ws.out / "curve.csv", artifact_comment(ws) + curve_csv(curve));
  out << "compression curve: " << curve.rows.size() << " rows (" << methods.size()
      << " methods x " << options.fractions.size() << " fractions x " << options.seeds.size()
      << " seeds)\n";
}

void cmd_oracle(const Workspace& ws, std::ostream& out) {
  const json& o = ws.config["oracle"];
  const std::int64_t k = positive_int(o, "k", "oracle");
  const double tolerance = o["tolerance"].get<double>();

  std::vector<std::unique_ptr<Game>> suite;
  suite.push_back(std::make_unique<WeightedVotingGame>(3.0, std::vector<double>{2, 1, 1}));
  suite.push_back(std::make_unique<WeightedVotingGame>(1.0, std::vector<double>{1, 0, 0}));
  suite.push_back(std::make_unique<UnanimityGame>(3));
  suite.push_back(std::make_unique<WeightedVotingGame>(51.0, std::vector<double>{40, 30, 20, 10}));
  const std::vector<IndexKind> kinds = {IndexKind::shapley(), IndexKind::banzhaf(),
                                        IndexKind::biased_banzhaf(0.3)};

  std::string csv = artifact_comment(ws) + "game,kind,player,exact,estimate,delta,stderr,k,ok\n";
  std::ostringstream table;
  table << std::left << std::setw(20) << "game" << std::setw(22) << "kind" << std::setw(7)
        << "player" << std::setw(12) << "exact" << std::setw(12) << "estimate" << "delta\n";
  double worst = 0.0;
  for (const auto& game : suite) {
    for (const IndexKind& kind : kinds) {
      const PowerIndexEstimate exact = exact_power_index(*game, kind);
      SamplingConfig cfg;
      cfg.t = kind.inclusion_probability();
      cfg.k = k;
      cfg.seed = ws.seed;
      PowerIndexEstimate est;
      if (kind.family == IndexKind::Family::kShapley) {
        est = mc_shapley(*game, k, ws.seed, ws.threads);
      } else {
        std::vector<std::size_t> players(game->num_players());
        for (std::size_t i = 0; i < players.size(); ++i) players[i] = i;
        est = pie_estimate(*game, cfg, players, ws.threads);
      }
      for (std::size_t i = 0; i < game->num_players(); ++i) {
        const double delta = std::abs(est.values[i] - exact.values[i]);
        worst = std::max(worst, delta);
        csv += "\"" + game->label() + "\"," + kind.to_string() + "," + std::to_string(i) + "," +
               fmt17(exact.values[i]) + "," + fmt17(est.values[i]) + "," + fmt17(delta) + "," +
               fmt17(est.std_error[i]) + "," + std::to_string(k) + "," +
               (delta < tolerance ? "yes" : "no") + "\n";
        char line[160];
        std::snprintf(line, sizeof line, "%-20s%-22s%-7zu%-12.6f%-12.6f%.6f\n",
                      game->label().c_str(), kind.to_string().c_str(), i, exact.values[i],
                      est.values[i], delta);
        table << line;
      }
    }
  }
  write_text(ws.out / "oracle.csv", csv);
  out << table.str() << "max |estimate - exact| = " << fmt17(worst) << " at k = " << k
      << (worst < tolerance ? " (within " : " (EXCEEDS ") << tolerance << ")\n";
}

void cmd_report(const Workspace& ws, std::ostream& out) {
  const json& r = ws.config["report"];
  const bool force = r["force"].get<bool>();
  if (r["inputs"].empty()) throw ConfigError("report needs at least one input curve CSV");

  struct Group {
    std::string method, index_kind;
    double fraction;
    std::vector<double> acc;
  };
  std::vector<Group> groups;
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> lookup;
  std::string hash;
  bool mixed = false;
  for (const auto& in : r["inputs"]) {
    if (!in.is_string()) throw ConfigError("report.inputs must hold file paths");
    const std::string path = in.get<std::string>();
    std::istringstream text(read_text(path));
    std::string line;
    std::getline(text, line);
    const std::string tag = "# config_hash=";
    if (line.rfind(tag, 0) != 0) throw FormatError("'" + path + "' lacks a config_hash line");
    const std::string file_hash = line.substr(tag.size(), line.find(' ', tag.size()) - tag.size());
    if (hash.empty()) {
      hash = file_hash;
    } else if (file_hash != hash) {
      if (!force) {
        throw HashMismatchError("'" + path + "' has config hash " + file_hash + " but earlier inputs have " +
                                hash + " (use --force to merge anyway)");
      }
      mixed = true;
    }
    std::getline(text, line);
    if (line != "method,index_kind,d,fraction,accuracy,seed,k,wall_ms") {
      throw FormatError("'" + path + "' is not a compression-curve CSV");
    }
    while (std::getline(text, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (cells.size() != 8) throw FormatError("malformed curve row in '" + path + "': " + line);
      const auto key = std::make_tuple(cells[0], cells[1], cells[3]);
      auto it = lookup.find(key);
      if (it == lookup.end()) {
        it = lookup.emplace(key, groups.size()).first;
        groups.push_back({cells[0], cells[1], std::stod(cells[3]), {}});
      }
      groups[it->second].acc.push_back(std::stod(cells[4]));
    }
  }

  std::string csv = "# config_hash=" + (mixed ? std::string("mixed") : hash) +
                    " inputs=" + std::to_string(r["inputs"].size()) + "\n" +
                    "method,index_kind,fraction,mean_accuracy,std_accuracy,n\n";
  for (const Group& g : groups) {
    double mean = 0.0;
    for (double a : g.acc) mean += a;
    mean /= static_cast<double>(g.acc.size());
    double ss = 0.0;
    for (double a : g.acc) ss += (a - mean) * (a - mean);
    const double sd = g.acc.size() > 1 ? std::sqrt(ss / static_cast<double>(g.acc.size() - 1)) : 0.0;
    csv += g.method + "," + g.index_kind + "," + fmt17(g.fraction) + "," + fmt17(mean) + "," +
           fmt17(sd) + "," + std::to_string(g.acc.size()) + "\n";
    char line[200];
    std::snprintf(line, sizeof line, "%-16s fraction %-6.3f accuracy %.4f +- %.4f (n=%zu)\n",
                  g.method.c_str(), g.fraction, mean, sd, g.acc.size());
    out << line;
  }
  write_text(ws.out / "report.csv", csv);
}

}  // namespace gtap::cli
