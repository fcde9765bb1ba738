#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "gtap/coalition.hpp"

namespace gtap {

// Transferable-utility coalitional game. value() must be a pure function of
// the coalition and safe to call concurrently from many threads.
class Game {
 public:
  virtual ~Game() = default;

  virtual std::size_t num_players() const = 0;
  virtual double value(const Coalition& coalition) const = 0;
  virtual std::string label() const { return "game"; }
};

// v(C) = 1 iff the summed weight of C reaches the quota.
class WeightedVotingGame final : public Game {
 public:
  WeightedVotingGame(double quota, std::vector<double> weights);

  std::size_t num_players() const override { return weights_.size(); }
  double value(const Coalition& coalition) const override;
  std::string label() const override;

  double quota() const { return quota_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  double quota_;
  std::vector<double> weights_;
};

// v(C) = sum of per-player values over C.
class AdditiveGame final : public Game {
 public:
  explicit AdditiveGame(std::vector<double> values);

  std::size_t num_players() const override { return values_.size(); }
  double value(const Coalition& coalition) const override;
  std::string label() const override { return "additive"; }

 private:
  std::vector<double> values_;
};

// v(C) = 1 iff C contains every player of the carrier (the grand coalition
// when no carrier is given).
class UnanimityGame final : public Game {
 public:
  explicit UnanimityGame(std::size_t n_players);
  UnanimityGame(std::size_t n_players, Coalition carrier);

  std::size_t num_players() const override { return carrier_.size(); }
  double value(const Coalition& coalition) const override;
  std::string label() const override { return "unanimity"; }

 private:
  Coalition carrier_;
};

// Adapts any callable; the callable inherits the purity/thread-safety contract.
class FunctionGame final : public Game {
 public:
  using Fn = std::function<double(const Coalition&)>;
  FunctionGame(std::size_t n_players, Fn fn, std::string label = "function");

  std::size_t num_players() const override { return n_; }
  double value(const Coalition& coalition) const override { return fn_(coalition); }
  std::string label() const override { return label_; }

 private:
  std::size_t n_;
  Fn fn_;
  std::string label_;
};

// Positive rescaling of another game; the wrapped game must outlive this one.
class ScaledGame final : public Game {
 public:
  ScaledGame(const Game& inner, double factor) : inner_(inner), factor_(factor) {}

  std::size_t num_players() const override { return inner_.num_players(); }
  double value(const Coalition& coalition) const override {
    return factor_ * inner_.value(coalition);
  }
  std::string label() const override { return inner_.label() + "*scaled"; }

 private:
  const Game& inner_;
  double factor_;
};

}  // namespace gtap
