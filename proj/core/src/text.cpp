#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "gtap/dataset.hpp"
#include "gtap/error.hpp"

namespace gtap {
namespace {

bool is_token_char(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         c >= 0x80;
}

bool parse_int_label(const std::string& s, std::int32_t& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (*end != '\0' || v < 0 || v > 1'000'000) return false;
  out = static_cast<std::int32_t>(v);
  return true;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_token_char(c)) {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second) {
      throw InvalidArgument("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
}

std::optional<std::size_t> Vocabulary::index_of(const std::string& token) const {
  const auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<double> Vocabulary::transform(std::string_view text) const {
  std::vector<double> v(tokens_.size(), 0.0);
  for (const auto& token : tokenize(text)) {
    if (auto i = index_of(token)) v[*i] = 1.0;
  }
  return v;
}

std::pair<Vocabulary, Dataset> vectorize_text(const TextCorpus& corpus,
                                              std::size_t vocab_size) {
  if (corpus.texts.empty()) throw InvalidArgument("corpus is empty");
  if (vocab_size < 1) throw InvalidArgument("vocab_size must be at least 1");
  if (!corpus.labels.empty() && corpus.labels.size() != corpus.texts.size()) {
    throw InvalidArgument("corpus labels do not match its texts");
  }

  std::map<std::string, std::size_t> doc_freq;
  for (const auto& text : corpus.texts) {
    const auto tokens = tokenize(text);
    for (const auto& t : std::set<std::string>(tokens.begin(), tokens.end())) ++doc_freq[t];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(doc_freq.begin(), doc_freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > vocab_size) ranked.resize(vocab_size);
  std::vector<std::string> kept;
  for (auto& [token, df] : ranked) kept.push_back(token);
  std::sort(kept.begin(), kept.end());
  Vocabulary vocab(std::move(kept));

  Dataset d;
  d.name = "text";
  d.n_features = vocab.size();
  d.features.reserve(corpus.texts.size() * vocab.size());
  std::int32_t max_label = 0;
  for (std::size_t i = 0; i < corpus.texts.size(); ++i) {
    const auto v = vocab.transform(corpus.texts[i]);
    d.features.insert(d.features.end(), v.begin(), v.end());
    const std::int32_t y = corpus.labels.empty() ? 0 : corpus.labels[i];
    d.labels.push_back(y);
    max_label = std::max(max_label, y);
  }
  d.n_classes = std::max<std::size_t>(corpus.label_names.size(),
                                      static_cast<std::size_t>(max_label) + 1);
  d.validate();
  return {std::move(vocab), std::move(d)};
}

std::pair<Vocabulary, Dataset> vectorize_text(const std::vector<std::string>& texts,
                                              std::size_t vocab_size) {
  TextCorpus corpus;
  corpus.texts = texts;
  return vectorize_text(corpus, vocab_size);
}

TextCorpus load_text_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::string> raw_labels;
  TextCorpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw FormatError("corpus line " + std::to_string(line_no) + " has no TAB separator");
    }
    raw_labels.push_back(line.substr(0, tab));
    corpus.texts.push_back(line.substr(tab + 1));
  }
  if (corpus.texts.empty()) throw FormatError("corpus '" + path.string() + "' is empty");

  std::vector<std::int32_t> numeric(raw_labels.size());
  bool all_numeric = true;
  for (std::size_t i = 0; i < raw_labels.size() && all_numeric; ++i) {
    all_numeric = parse_int_label(raw_labels[i], numeric[i]);
  }
  if (all_numeric) {
    corpus.labels = std::move(numeric);
    const auto max_label = *std::max_element(corpus.labels.begin(), corpus.labels.end());
    for (std::int32_t y = 0; y <= max_label; ++y) corpus.label_names.push_back(std::to_string(y));
    return corpus;
  }
  std::set<std::string> names(raw_labels.begin(), raw_labels.end());
  corpus.label_names.assign(names.begin(), names.end());
  for (const auto& raw : raw_labels) {
    const auto it = std::lower_bound(corpus.label_names.begin(), corpus.label_names.end(), raw);
    corpus.labels.push_back(static_cast<std::int32_t>(it - corpus.label_names.begin()));
  }
  return corpus;
}

}  // namespace gtap
