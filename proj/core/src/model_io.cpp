#include "gtap/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gtap/error.hpp"

namespace gtap {
namespace {

using nlohmann::json;

constexpr std::size_t kMagicSize = 8;
constexpr char kMagicPrefix[] = "GTAPNN";

void append_f64(std::string& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

double read_f64(const std::string& in, std::size_t offset) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  }
  return std::bit_cast<double>(bits);
}

}  // namespace

std::string serialize_model(const DenseNetwork& net) {
  json header;
  header["layer_sizes"] = net.spec().layer_sizes;
  header["dtype"] = "f64";
  header["seed"] = net.seed();
  std::string out(kModelMagic, kMagicSize);
  out += header.dump();
  out.push_back('\n');
  out.reserve(out.size() + 8 * net.num_parameters());
  for (std::size_t l = 0; l < net.num_weight_layers(); ++l) {
    for (double w : net.weights(l)) append_f64(out, w);
    for (double b : net.biases(l)) append_f64(out, b);
  }
  return out;
}

DenseNetwork deserialize_model(const std::string& bytes) {
  if (bytes.size() < kMagicSize || bytes.compare(0, 6, kMagicPrefix) != 0) {
    throw FormatError("not a GTAP model file (bad magic)");
  }
  if (bytes.compare(0, kMagicSize, kModelMagic) != 0) {
    throw VersionError("unsupported model format version '" + bytes.substr(6, 2) + "'");
  }
  const std::size_t newline = bytes.find('\n', kMagicSize);
  if (newline == std::string::npos) throw FormatError("model header is not terminated");

  NetworkSpec spec;
  std::uint64_t seed = 0;
  try {
    const json header = json::parse(bytes.substr(kMagicSize, newline - kMagicSize));
    if (header.at("dtype").get<std::string>() != "f64") {
      throw FormatError("unsupported dtype in model header");
    }
    spec.layer_sizes = header.at("layer_sizes").get<std::vector<std::size_t>>();
    seed = header.at("seed").get<std::uint64_t>();
  } catch (const json::exception& ex) {
    throw FormatError(std::string("malformed model header: ") + ex.what());
  }
  try {
    spec.validate();
  } catch (const InvalidArgument& ex) {
    throw FormatError(std::string("model header: ") + ex.what());
  }

  DenseNetwork net(spec, seed);
  const std::size_t payload = bytes.size() - newline - 1;
  const std::size_t expected = 8 * net.num_parameters();
  if (payload < expected) {
    throw FormatError("model file truncated: header declares " +
                      std::to_string(net.num_parameters()) + " parameters, found " +
                      std::to_string(payload / 8));
  }
  if (payload > expected) throw FormatError("model file has trailing bytes");

  std::size_t offset = newline + 1;
  for (std::size_t l = 0; l < net.num_weight_layers(); ++l) {
    for (double& w : net.weights(l)) {
      w = read_f64(bytes, offset);
      offset += 8;
    }
    for (double& b : net.biases(l)) {
      b = read_f64(bytes, offset);
      offset += 8;
    }
  }
  if (!net.all_finite()) throw FormatError("model contains non-finite parameters");
  return net;
}

void save_model(const DenseNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  const std::string bytes = serialize_model(net);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

DenseNetwork load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace gtap
