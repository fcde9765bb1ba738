#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace gtap {

// Fixed-length set of players, stored as a packed bit vector. Bits beyond
// size() are always zero so that equality and hashing can compare words.
class Coalition {
 public:
  Coalition() = default;
  explicit Coalition(std::size_t n_players);

  static Coalition grand(std::size_t n_players);
  // Bit i of `bits` marks player i; requires n_players <= 64.
  static Coalition from_bits(std::size_t n_players, std::uint64_t bits);
  static Coalition from_members(std::size_t n_players,
                                std::span<const std::size_t> members);
  static Coalition from_members(std::size_t n_players,
                                std::initializer_list<std::size_t> members) {
    return from_members(n_players, std::span<const std::size_t>(members.begin(), members.size()));
  }

  std::size_t size() const { return n_; }
  bool empty() const { return cardinality() == 0; }
  std::size_t cardinality() const;

  bool contains(std::size_t player) const {
    return (words_[player >> 6] >> (player & 63)) & 1u;
  }
  void insert(std::size_t player) { words_[player >> 6] |= bit(player); }
  void erase(std::size_t player) { words_[player >> 6] &= ~bit(player); }
  void set(std::size_t player, bool present) {
    present ? insert(player) : erase(player);
  }

  bool disjoint(const Coalition& other) const;
  bool is_subset_of(const Coalition& other) const;
  Coalition& operator|=(const Coalition& other);
  Coalition& operator&=(const Coalition& other);
  Coalition complement() const;

  std::vector<std::size_t> members() const;
  std::span<const std::uint64_t> words() const { return words_; }
  // "{0,2,5}" style rendering for logs and test messages.
  std::string to_string() const;

  friend bool operator==(const Coalition&, const Coalition&) = default;

 private:
  static std::uint64_t bit(std::size_t player) {
    return std::uint64_t{1} << (player & 63);
  }
  void check_same_size(const Coalition& other) const;

  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

// A bijection on {0..n-1}; order[j] is the j-th player to arrive.
struct Permutation {
  std::vector<std::size_t> order;

  static Permutation identity(std::size_t n);
  bool is_valid() const;
};

}  // namespace gtap
