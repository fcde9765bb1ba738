#include <bit>
#include <sstream>

#include "gtap/error.hpp"
#include "gtap/game.hpp"

namespace gtap {
namespace {

void check_size(const Game& game, const Coalition& c) {
  if (c.size() != game.num_players()) {
    throw InvalidArgument("coalition size does not match the game's player count");
  }
}

}  // namespace

WeightedVotingGame::WeightedVotingGame(double quota, std::vector<double> weights)
    : quota_(quota), weights_(std::move(weights)) {
  if (weights_.empty()) throw InvalidArgument("weighted voting game needs players");
}

double WeightedVotingGame::value(const Coalition& coalition) const {
  check_size(*this, coalition);
  double total = 0.0;
  const auto words = coalition.words();
  for (std::size_t w = 0; w < words.size(); ++w) {
    std::uint64_t bits = words[w];
    while (bits) {
      total += weights_[w * 64 + static_cast<std::size_t>(std::countr_zero(bits))];
      bits &= bits - 1;
    }
  }
  return total >= quota_ ? 1.0 : 0.0;
}

std::string WeightedVotingGame::label() const {
  std::ostringstream out;
  out << "[" << quota_ << ";";
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    out << (i ? "," : " ") << weights_[i];
  }
  out << "]";
  return out.str();
}

AdditiveGame::AdditiveGame(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidArgument("additive game needs players");
}

double AdditiveGame::value(const Coalition& coalition) const {
  check_size(*this, coalition);
  double total = 0.0;
  for (std::size_t m : coalition.members()) total += values_[m];
  return total;
}

UnanimityGame::UnanimityGame(std::size_t n_players)
    : carrier_(Coalition::grand(n_players)) {}

UnanimityGame::UnanimityGame(std::size_t n_players, Coalition carrier)
    : carrier_(std::move(carrier)) {
  if (carrier_.size() != n_players) throw InvalidArgument("carrier size mismatch");
}

double UnanimityGame::value(const Coalition& coalition) const {
  check_size(*this, coalition);
  return carrier_.is_subset_of(coalition) ? 1.0 : 0.0;
}

FunctionGame::FunctionGame(std::size_t n_players, Fn fn, std::string label)
    : n_(n_players), fn_(std::move(fn)), label_(std::move(label)) {
  if (n_players == 0) throw InvalidArgument("game needs at least one player");
  if (!fn_) throw InvalidArgument("function game needs a callable");
}

}  // namespace gtap
