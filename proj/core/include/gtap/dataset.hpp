#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gtap {

// Dense labelled design matrix, immutable after construction by convention.
struct Dataset {
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  std::vector<double> features;  // row-major, size() * n_features
  std::vector<std::int32_t> labels;
  std::string name;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * n_features, n_features};
  }

  // Throws InvalidArgument unless rows/labels agree, labels < n_classes and
  // every feature is finite.
  void validate() const;
  Dataset subset(std::span<const std::size_t> indices, std::string suffix = "") const;
  std::vector<std::size_t> class_counts() const;
};

// IDX (MNIST) image + label files. Pixels are scaled to [0,1]. n_classes = 0
// infers max(label) + 1.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 std::size_t n_classes = 0);

// Header row with a "label" column; every other column is a numeric feature.
Dataset load_csv(const std::filesystem::path& path);

struct TextCorpus {
  std::vector<std::string> texts;
  std::vector<std::int32_t> labels;
  std::vector<std::string> label_names;  // label_names[id]
};

// One document per line: label, TAB, text. Integer labels are used verbatim;
// otherwise distinct label strings are numbered in lexicographic order.
TextCorpus load_text_corpus(const std::filesystem::path& path);

// Lowercased runs of alphanumeric characters. Bytes >= 0x80 count as
// alphanumeric so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text);

class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::optional<std::size_t> index_of(const std::string& token) const;

  // Binary term-presence vector of length size().
  std::vector<double> transform(std::string_view text) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Keeps the vocab_size tokens with highest document frequency (ties broken
// lexicographically); feature order is lexicographic over kept tokens.
std::pair<Vocabulary, Dataset> vectorize_text(const TextCorpus& corpus,
                                              std::size_t vocab_size);
std::pair<Vocabulary, Dataset> vectorize_text(const std::vector<std::string>& texts,
                                              std::size_t vocab_size);

enum class SyntheticKind { kBlobs, kXor };
SyntheticKind parse_synthetic_kind(const std::string& name);

// blobs: unit-variance Gaussians centred at (-2,0) and (2,0).
// xor: four Gaussian clusters (sd 0.3) at (+-1,+-1), label = (x>0) xor (y>0).
Dataset make_synthetic(SyntheticKind kind, std::size_t n, std::uint64_t seed);

struct DatasetSplit {
  Dataset train, eval, test;
  std::array<std::vector<std::size_t>, 3> indices;  // into the source dataset
};

// Seeded, label-stratified three-way split; part sizes are floor(f * n).
DatasetSplit split(const Dataset& dataset, std::array<double, 3> fractions,
                   std::uint64_t seed);

// Seeded uniform sample of n distinct rows (row order follows the draw).
std::vector<std::size_t> sample_indices(std::size_t population, std::size_t n,
                                        std::uint64_t seed);

}  // namespace gtap
