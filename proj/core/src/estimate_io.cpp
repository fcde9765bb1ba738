#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "gtap/error.hpp"
#include "gtap/power_index.hpp"

namespace gtap {
namespace {

using nlohmann::json;

const char* status_name(EntryStatus s) {
  switch (s) {
    case EntryStatus::kEstimated:
      return "estimated";
    case EntryStatus::kNotEstimated:
      return "not_estimated";
    case EntryStatus::kUndefined:
      return "undefined";
  }
  return "unknown";
}

EntryStatus parse_status(const std::string& s) {
  if (s == "estimated") return EntryStatus::kEstimated;
  if (s == "not_estimated") return EntryStatus::kNotEstimated;
  if (s == "undefined") return EntryStatus::kUndefined;
  throw FormatError("unknown estimate status '" + s + "'");
}

EstimateMethod parse_method(const std::string& s) {
  if (s == "exact") return EstimateMethod::kExact;
  if (s == "monte_carlo") return EstimateMethod::kMonteCarlo;
  if (s == "shared_sample") return EstimateMethod::kSharedSample;
  throw FormatError("unknown estimate method '" + s + "'");
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string to_json(const PowerIndexEstimate& e) {
  json doc;
  doc["n_players"] = e.num_players();
  doc["kind"] = e.kind.to_string();
  doc["method"] = to_string(e.method);
  json values = json::array(), errors = json::array(), status = json::array();
  for (std::size_t i = 0; i < e.num_players(); ++i) {
    values.push_back(finite_or_null(e.values[i]));
    errors.push_back(finite_or_null(e.std_error[i]));
    status.push_back(status_name(e.status[i]));
  }
  doc["values"] = std::move(values);
  doc["stderr"] = std::move(errors);
  doc["status"] = std::move(status);
  doc["samples_used"] = e.samples_used;
  doc["seed"] = e.seed;
  doc["samples"] = e.samples;
  doc["dependent"] = e.dependent;
  doc["scope"] = e.scope;
  return doc.dump();
}

PowerIndexEstimate estimate_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& ex) {
    throw FormatError(std::string("estimate JSON: ") + ex.what());
  }
  try {
    const auto n = doc.at("n_players").get<std::size_t>();
    PowerIndexEstimate e = PowerIndexEstimate::blank(
        n, IndexKind::parse(doc.at("kind").get<std::string>()),
        parse_method(doc.value("method", std::string("monte_carlo"))));
    const auto& values = doc.at("values");
    const auto& errors = doc.at("stderr");
    if (values.size() != n || errors.size() != n) {
      throw FormatError("estimate arrays do not match n_players");
    }
    for (std::size_t i = 0; i < n; ++i) {
      e.status[i] = doc.contains("status")
                        ? parse_status(doc["status"].at(i).get<std::string>())
                        : (values[i].is_null() ? EntryStatus::kNotEstimated
                                               : EntryStatus::kEstimated);
      if (values[i].is_null()) {
        e.values[i] = e.status[i] == EntryStatus::kUndefined
                          ? std::numeric_limits<double>::quiet_NaN()
                          : kNotEstimated;
      } else {
        e.values[i] = values[i].get<double>();
      }
      e.std_error[i] = errors[i].is_null() ? std::numeric_limits<double>::quiet_NaN()
                                           : errors[i].get<double>();
    }
    if (doc.contains("samples_used")) {
      e.samples_used = doc["samples_used"].get<std::vector<std::int64_t>>();
      if (e.samples_used.size() != n) throw FormatError("samples_used length mismatch");
    }
    e.seed = doc.at("seed").get<std::uint64_t>();
    e.samples = doc.at("samples").get<std::int64_t>();
    e.dependent = doc.value("dependent", false);
    e.scope = doc.value("scope", std::string("global"));
    return e;
  } catch (const json::exception& ex) {
    throw FormatError(std::string("estimate JSON: ") + ex.what());
  } catch (const InvalidArgument& ex) {
    throw FormatError(std::string("estimate JSON: ") + ex.what());
  }
}

}  // namespace gtap
