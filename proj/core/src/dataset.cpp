#include "gtap/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "gtap/error.hpp"
#include "gtap/rng.hpp"

namespace gtap {
namespace {

constexpr std::uint32_t kIdxImageMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::uint32_t read_be32(const std::string& bytes, std::size_t offset,
                        const std::filesystem::path& path) {
  if (bytes.size() < offset + 4) {
    throw FormatError("IDX file '" + path.string() + "' truncated in header");
  }
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    v = (v << 8) | static_cast<unsigned char>(bytes[offset + i]);
  }
  return v;
}

// floor(x) with a small guard so 0.8 * 100 -> 80 despite binary rounding.
std::size_t floor_count(double x) {
  return static_cast<std::size_t>(std::floor(x + 1e-9));
}

}  // namespace

void Dataset::validate() const {
  if (n_classes == 0) throw InvalidArgument("dataset needs at least one class");
  if (features.size() != labels.size() * n_features) {
    throw InvalidArgument("feature matrix does not match the label count");
  }
  for (std::int32_t y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= n_classes) {
      throw InvalidArgument("label " + std::to_string(y) + " outside [0, n_classes)");
    }
  }
  for (double x : features) {
    if (!std::isfinite(x)) throw InvalidArgument("dataset contains a non-finite feature");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices, std::string suffix) const {
  Dataset out;
  out.n_features = n_features;
  out.n_classes = n_classes;
  out.name = name + suffix;
  out.features.reserve(indices.size() * n_features);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= size()) throw InvalidArgument("subset index out of range");
    const auto r = row(i);
    out.features.insert(out.features.end(), r.begin(), r.end());
    out.labels.push_back(labels[i]);
  }
  return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(n_classes, 0);
  for (std::int32_t y : labels) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 std::size_t n_classes) {
  const std::string img = read_file(images);
  const std::string lab = read_file(labels);

  if (read_be32(img, 0, images) != kIdxImageMagic) {
    throw FormatError("'" + images.string() + "' is not an IDX image file (bad magic)");
  }
  if (read_be32(lab, 0, labels) != kIdxLabelMagic) {
    throw FormatError("'" + labels.string() + "' is not an IDX label file (bad magic)");
  }
  const std::size_t n = read_be32(img, 4, images);
  const std::size_t rows = read_be32(img, 8, images);
  const std::size_t cols = read_be32(img, 12, images);
  const std::size_t n_labels = read_be32(lab, 4, labels);
  if (n != n_labels) {
    throw FormatError("IDX image count " + std::to_string(n) + " != label count " +
                      std::to_string(n_labels));
  }
  const std::size_t pixels = rows * cols;
  if (img.size() != 16 + n * pixels) {
    throw FormatError("IDX image file '" + images.string() + "' has " +
                      std::to_string(img.size()) + " bytes, expected " +
                      std::to_string(16 + n * pixels));
  }
  if (lab.size() != 8 + n) {
    throw FormatError("IDX label file '" + labels.string() + "' has " +
                      std::to_string(lab.size()) + " bytes, expected " +
                      std::to_string(8 + n));
  }

  Dataset d;
  d.name = images.filename().string();
  d.n_features = pixels;
  d.features.resize(n * pixels);
  for (std::size_t i = 0; i < n * pixels; ++i) {
    d.features[i] = static_cast<double>(static_cast<unsigned char>(img[16 + i])) / 255.0;
  }
  d.labels.resize(n);
  std::size_t max_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    d.labels[i] = static_cast<unsigned char>(lab[8 + i]);
    max_label = std::max<std::size_t>(max_label, static_cast<std::size_t>(d.labels[i]));
  }
  d.n_classes = n_classes != 0 ? n_classes : max_label + 1;
  d.validate();
  return d;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  auto split_line = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell.erase(0, cell.find_first_not_of(" \t\r"));
      cell.erase(cell.find_last_not_of(" \t\r") + 1);
      cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };

  std::string line;
  if (!std::getline(in, line)) throw FormatError("CSV '" + path.string() + "' is empty");
  const auto header = split_line(line);
  const auto label_it = std::find(header.begin(), header.end(), "label");
  if (label_it == header.end()) throw FormatError("CSV header has no 'label' column");
  const std::size_t label_col = static_cast<std::size_t>(label_it - header.begin());

  Dataset d;
  d.name = path.filename().string();
  d.n_features = header.size() - 1;
  std::int32_t max_label = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw FormatError("CSV line " + std::to_string(line_no) + " has " +
                        std::to_string(cells.size()) + " columns, expected " +
                        std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      char* end = nullptr;
      if (c == label_col) {
        const long y = std::strtol(cells[c].c_str(), &end, 10);
        if (cells[c].empty() || *end != '\0' || y < 0) {
          throw FormatError("CSV line " + std::to_string(line_no) + ": bad label '" +
                            cells[c] + "'");
        }
        d.labels.push_back(static_cast<std::int32_t>(y));
        max_label = std::max(max_label, static_cast<std::int32_t>(y));
      } else {
        const double x = std::strtod(cells[c].c_str(), &end);
        if (cells[c].empty() || *end != '\0' || !std::isfinite(x)) {
          throw FormatError("CSV line " + std::to_string(line_no) + ": bad number '" +
                            cells[c] + "'");
        }
        d.features.push_back(x);
      }
    }
  }
  d.n_classes = static_cast<std::size_t>(max_label) + 1;
  d.validate();
  return d;
}

SyntheticKind parse_synthetic_kind(const std::string& name) {
  if (name == "blobs") return SyntheticKind::kBlobs;
  if (name == "xor") return SyntheticKind::kXor;
  throw InvalidArgument("unknown synthetic dataset kind '" + name + "'");
}

Dataset make_synthetic(SyntheticKind kind, std::size_t n, std::uint64_t seed) {
  if (n < 4) throw InvalidArgument("synthetic datasets need n >= 4");
  CounterRng rng(domain_key(seed, RngDomain::kSynthetic), static_cast<std::uint32_t>(kind), 0);
  Dataset d;
  d.n_features = 2;
  d.n_classes = 2;
  d.features.reserve(2 * n);
  d.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (kind == SyntheticKind::kBlobs) {
      const std::int32_t y = static_cast<std::int32_t>(rng.below(2));
      d.features.push_back((y == 0 ? -2.0 : 2.0) + rng.normal());
      d.features.push_back(rng.normal());
      d.labels.push_back(y);
    } else {
      const std::uint64_t quadrant = rng.below(4);
      const double sx = (quadrant & 1) ? 1.0 : -1.0;
      const double sy = (quadrant & 2) ? 1.0 : -1.0;
      d.features.push_back(sx + 0.3 * rng.normal());
      d.features.push_back(sy + 0.3 * rng.normal());
      d.labels.push_back((sx > 0) != (sy > 0) ? 1 : 0);
    }
  }
  d.name = kind == SyntheticKind::kBlobs ? "blobs" : "xor";
  return d;
}

DatasetSplit split(const Dataset& dataset, std::array<double, 3> fractions,
                   std::uint64_t seed) {
  double total = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw InvalidArgument("split fractions must be positive");
    total += f;
  }
  if (total > 1.0 + 1e-12) throw InvalidArgument("split fractions sum to more than 1");

  const std::size_t n = dataset.size();
  std::array<std::size_t, 3> sizes{};
  for (std::size_t p = 0; p < 3; ++p) {
    sizes[p] = floor_count(fractions[p] * static_cast<double>(n));
    if (sizes[p] < dataset.n_classes) {
      throw InvalidArgument("split part " + std::to_string(p) + " would hold " +
                            std::to_string(sizes[p]) + " rows, fewer than n_classes");
    }
  }

  // Each class is shuffled and its members spread evenly over [0, 1); sorting
  // by that position interleaves classes so every prefix is stratified.
  const std::uint64_t key = domain_key(seed, RngDomain::kSplit);
  std::vector<std::vector<std::size_t>> by_class(dataset.n_classes);
  for (std::size_t i = 0; i < n; ++i) {
    by_class[static_cast<std::size_t>(dataset.labels[i])].push_back(i);
  }
  struct Slot {
    double position;
    std::size_t cls;
    std::size_t index;
  };
  std::vector<Slot> slots;
  slots.reserve(n);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    CounterRng rng(key, static_cast<std::uint32_t>(c), 0);
    rng.shuffle(by_class[c]);
    const double count = static_cast<double>(by_class[c].size());
    for (std::size_t j = 0; j < by_class[c].size(); ++j) {
      slots.push_back({(static_cast<double>(j) + 0.5) / count, c, by_class[c][j]});
    }
  }
  std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
    return a.position != b.position ? a.position < b.position : a.cls < b.cls;
  });

  DatasetSplit out;
  std::size_t cursor = 0;
  for (std::size_t p = 0; p < 3; ++p) {
    auto& idx = out.indices[p];
    for (std::size_t j = 0; j < sizes[p]; ++j) idx.push_back(slots[cursor++].index);
    CounterRng rng(key, 0xFFFFFF00u + static_cast<std::uint32_t>(p), 1);
    rng.shuffle(idx);
  }
  out.train = dataset.subset(out.indices[0], ":train");
  out.eval = dataset.subset(out.indices[1], ":eval");
  out.test = dataset.subset(out.indices[2], ":test");
  return out;
}

std::vector<std::size_t> sample_indices(std::size_t population, std::size_t n,
                                        std::uint64_t seed) {
  if (n > population) throw InvalidArgument("cannot sample more rows than exist");
  std::vector<std::size_t> all(population);
  std::iota(all.begin(), all.end(), std::size_t{0});
  CounterRng rng(domain_key(seed, RngDomain::kSubsample), 0, 0);
  // Partial Fisher-Yates: the first n slots are a uniform sample.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(population - i));
    std::swap(all[i], all[j]);
  }
  all.resize(n);
  return all;
}

}  // namespace gtap
