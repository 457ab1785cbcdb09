#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fgb/estimators.hpp"
#include "fgb/graph.hpp"
#include "fgb/rng.hpp"

namespace fgb {

struct Round {
  FeedbackGraph graph;
  LossVector losses;
};

namespace env_kind {
/// Fixed graph; Bernoulli(means[i]) loss per arm per round.
struct BernoulliGap {
  std::vector<double> means;
  GraphKind graph = graph_kind::Empty{};
};
/// Hidden-arm adversary on a fixed base graph: arms of a maximum independent
/// set draw Bernoulli(1/2) losses except one uniformly drawn arm with
/// Bernoulli(1/2 - epsilon); every other arm always loses 1.
struct LowerBound {
  std::size_t k = 0;
  GraphKind graph = graph_kind::Empty{};
  std::size_t horizon = 0;
  /// Defaults to 1 / (8 sqrt(2 ln(4/3) T / alpha)).
  std::optional<double> epsilon;
};
/// Fresh Erdos-Renyi digraph every round, Bernoulli losses.
struct ErdosRenyiProcess {
  double r = 0.5;
  std::vector<double> means;
};
struct Replay {
  std::string path;
};
}  // namespace env_kind

using EnvironmentSpec = std::variant<env_kind::BernoulliGap, env_kind::LowerBound,
                                     env_kind::ErdosRenyiProcess, env_kind::Replay>;

/// Per-round source of graphs and losses.
///
/// Rounds are requested in order, t = 1, 2, ...; asking again for the current
/// round returns the memoized values. `history` holds the player's past
/// actions I_1..I_{t-1}; built-in environments are oblivious and only check
/// its length.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::size_t k() const = 0;
  /// Number of rounds available, if finite.
  virtual std::optional<std::size_t> horizon() const { return std::nullopt; }

  /// Throws ProtocolViolation on out-of-order access and EndOfStream past the
  /// horizon.
  const Round& emit_round(std::size_t t, std::span<const Action> history);

  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 protected:
  virtual Round next_round(std::size_t t, std::span<const Action> history) = 0;
  void warn(std::string message) { warnings_.push_back(std::move(message)); }

 private:
  std::size_t current_ = 0;
  std::optional<Round> round_;
  std::vector<std::string> warnings_;
};

/// Deterministic in (spec, seed). Throws InvalidParameter on malformed specs.
std::unique_ptr<Environment> make_env(const EnvironmentSpec& spec, std::uint64_t seed);

/// Default gap of the hidden-arm adversary.
double lower_bound_epsilon(std::size_t alpha, std::size_t horizon);

/// Inspection hooks for the hidden-arm adversary.
struct LowerBoundInfo {
  std::vector<Action> independent_set;
  Action hidden_arm;
  double epsilon;
};
std::optional<LowerBoundInfo> lower_bound_info(const Environment& env);

// Replay file: "K <int>", "T <int>", then per round arc lines ("i j")
// closed by "---" followed by one line of K losses.
std::vector<Round> read_replay(std::istream& in);
void write_replay(std::ostream& out, std::span<const Round> rounds);

}  // namespace fgb
