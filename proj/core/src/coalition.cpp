#include "gtap/coalition.hpp"

#include <algorithm>
#include <bit>

#include "gtap/error.hpp"

namespace gtap {

Coalition::Coalition(std::size_t n_players)
    : n_(n_players), words_((n_players + 63) / 64, 0) {
  if (n_players == 0) throw InvalidArgument("coalition needs at least one player");
}

Coalition Coalition::grand(std::size_t n_players) {
  Coalition c(n_players);
  std::fill(c.words_.begin(), c.words_.end(), ~std::uint64_t{0});
  if (n_players % 64 != 0) {
    c.words_.back() = (std::uint64_t{1} << (n_players % 64)) - 1;
  }
  return c;
}

Coalition Coalition::from_bits(std::size_t n_players, std::uint64_t bits) {
  if (n_players > 64) throw InvalidArgument("from_bits supports at most 64 players");
  Coalition c(n_players);
  if (n_players < 64) bits &= (std::uint64_t{1} << n_players) - 1;
  c.words_[0] = bits;
  return c;
}

Coalition Coalition::from_members(std::size_t n_players,
                                  std::span<const std::size_t> members) {
  Coalition c(n_players);
  for (std::size_t m : members) {
    if (m >= n_players) throw InvalidArgument("coalition member out of range");
    c.insert(m);
  }
  return c;
}

std::size_t Coalition::cardinality() const {
  std::size_t count = 0;
  for (std::uint64_t w : words_) count += static_cast<std::size_t>(std::popcount(w));
  return count;
}

void Coalition::check_same_size(const Coalition& other) const {
  if (other.n_ != n_) throw InvalidArgument("coalitions over different player sets");
}

bool Coalition::disjoint(const Coalition& other) const {
  check_same_size(other);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i] & other.words_[i]) return false;
  }
  return true;
}

bool Coalition::is_subset_of(const Coalition& other) const {
  check_same_size(other);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i] & ~other.words_[i]) return false;
  }
  return true;
}

Coalition& Coalition::operator|=(const Coalition& other) {
  check_same_size(other);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
  return *this;
}

Coalition& Coalition::operator&=(const Coalition& other) {
  check_same_size(other);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
  return *this;
}

Coalition Coalition::complement() const {
  Coalition c = grand(n_);
  for (std::size_t i = 0; i < words_.size(); ++i) c.words_[i] &= ~words_[i];
  return c;
}

std::vector<std::size_t> Coalition::members() const {
  std::vector<std::size_t> out;
  out.reserve(cardinality());
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t bits = words_[w];
    while (bits) {
      out.push_back(w * 64 + static_cast<std::size_t>(std::countr_zero(bits)));
      bits &= bits - 1;
    }
  }
  return out;
}

std::string Coalition::to_string() const {
  std::string out = "{";
  bool first = true;
  for (std::size_t m : members()) {
    if (!first) out += ',';
    out += std::to_string(m);
    first = false;
  }
  return out + "}";
}

Permutation Permutation::identity(std::size_t n) {
  Permutation p;
  p.order.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.order[i] = i;
  return p;
}

bool Permutation::is_valid() const {
  std::vector<bool> seen(order.size(), false);
  for (std::size_t id : order) {
    if (id >= order.size() || seen[id]) return false;
    seen[id] = true;
  }
  return true;
}

}  // namespace gtap
