#include "fgb/environments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "fgb/errors.hpp"
#include "text_util.hpp"

namespace fgb {
namespace {

void check_means(std::span<const double> means) {
  if (means.empty()) throw InvalidParameter("environment needs at least one arm mean");
  for (double m : means) {
    if (!(m >= 0.0 && m <= 1.0)) throw InvalidParameter("arm mean outside [0, 1]");
  }
}

LossVector bernoulli_losses(std::span<const double> means, SplitMix64& rng) {
  std::vector<double> losses(means.size());
  for (std::size_t i = 0; i < means.size(); ++i) losses[i] = rng.bernoulli(means[i]) ? 1.0 : 0.0;
  return LossVector(std::move(losses));
}

class BernoulliGapEnv final : public Environment {
 public:
  BernoulliGapEnv(const env_kind::BernoulliGap& spec, std::uint64_t seed)
      : means_(spec.means), rng_(seed), graph_(init_graph(spec, rng_)) {}

  std::size_t k() const override { return means_.size(); }

 private:
  static FeedbackGraph init_graph(const env_kind::BernoulliGap& spec, SplitMix64& rng) {
    check_means(spec.means);
    return generate(spec.graph, spec.means.size(), rng);
  }

  Round next_round(std::size_t, std::span<const Action>) override {
    return Round{graph_, bernoulli_losses(means_, rng_)};
  }

  std::vector<double> means_;
  SplitMix64 rng_;
  FeedbackGraph graph_;
};

class ErdosRenyiEnv final : public Environment {
 public:
  ErdosRenyiEnv(const env_kind::ErdosRenyiProcess& spec, std::uint64_t seed)
      : r_(spec.r), means_(spec.means), rng_(seed) {
    check_means(means_);
    if (!(r_ >= 0.0 && r_ <= 1.0)) throw InvalidParameter("Erdos-Renyi density outside [0, 1]");
  }

  std::size_t k() const override { return means_.size(); }

 private:
  Round next_round(std::size_t, std::span<const Action>) override {
    auto graph = generate(graph_kind::ErdosRenyi{r_}, means_.size(), rng_);
    return Round{std::move(graph), bernoulli_losses(means_, rng_)};
  }

  double r_;
  std::vector<double> means_;
  SplitMix64 rng_;
};

class LowerBoundEnv final : public Environment {
 public:
  LowerBoundEnv(const env_kind::LowerBound& spec, std::uint64_t seed)
      : rng_(seed), graph_(generate(spec.graph, spec.k, rng_)) {
    if (spec.horizon == 0) throw InvalidParameter("lower-bound adversary needs horizon T >= 1");
    info_.independent_set = maximum_independent_set(graph_);
    const std::size_t alpha = info_.independent_set.size();
    info_.hidden_arm = info_.independent_set[rng_.below(alpha)];
    info_.epsilon = spec.epsilon.value_or(lower_bound_epsilon(alpha, spec.horizon));
    if (!(info_.epsilon > 0.0 && info_.epsilon < 0.5)) {
      throw InvalidParameter("lower-bound epsilon must lie in (0, 1/2)");
    }
    if (alpha <= 1) warn("independence number is 1; the adversary has no gap to hide");
    const double a = static_cast<double>(alpha);
    if (static_cast<double>(spec.horizon) < 0.0064 * a * a * a) {
      warn("horizon " + std::to_string(spec.horizon) + " is below 0.0064 alpha^3 = " +
           std::to_string(0.0064 * a * a * a));
    }
  }

  std::size_t k() const override { return graph_.k(); }
  const LowerBoundInfo& info() const { return info_; }

 private:
  Round next_round(std::size_t, std::span<const Action>) override {
    std::vector<double> losses(graph_.k(), 1.0);
    for (Action i : info_.independent_set) {
      const double mean = i == info_.hidden_arm ? 0.5 - info_.epsilon : 0.5;
      losses[i] = rng_.bernoulli(mean) ? 1.0 : 0.0;
    }
    return Round{graph_, LossVector(std::move(losses))};
  }

  SplitMix64 rng_;
  FeedbackGraph graph_;
  LowerBoundInfo info_;
};

class ReplayEnv final : public Environment {
 public:
  explicit ReplayEnv(std::vector<Round> rounds) : rounds_(std::move(rounds)) {
    if (rounds_.empty()) throw InvalidParameter("replay holds no rounds");
  }

  std::size_t k() const override { return rounds_.front().graph.k(); }
  std::optional<std::size_t> horizon() const override { return rounds_.size(); }

 private:
  Round next_round(std::size_t t, std::span<const Action>) override { return rounds_[t - 1]; }

  std::vector<Round> rounds_;
};

}  // namespace

const Round& Environment::emit_round(std::size_t t, std::span<const Action> history) {
  if (t == 0) throw ProtocolViolation("rounds are numbered from 1");
  if (history.size() != t - 1) {
    throw ProtocolViolation("round " + std::to_string(t) + " needs " + std::to_string(t - 1) +
                            " past actions, got " + std::to_string(history.size()));
  }
  if (t == current_ && round_) return *round_;
  if (t != current_ + 1) {
    throw ProtocolViolation("round " + std::to_string(t) + " requested after round " +
                            std::to_string(current_));
  }
  if (const auto h = horizon(); h && t > *h) {
    throw EndOfStream("environment has only " + std::to_string(*h) + " rounds");
  }
  round_ = next_round(t, history);
  current_ = t;
  return *round_;
}

double lower_bound_epsilon(std::size_t alpha, std::size_t horizon) {
  if (alpha == 0 || horizon == 0) throw InvalidParameter("alpha and T must be positive");
  return 1.0 / (8.0 * std::sqrt(2.0 * std::log(4.0 / 3.0) * static_cast<double>(horizon) /
                                static_cast<double>(alpha)));
}

std::optional<LowerBoundInfo> lower_bound_info(const Environment& env) {
  if (const auto* lb = dynamic_cast<const LowerBoundEnv*>(&env)) return lb->info();
  return std::nullopt;
}

std::unique_ptr<Environment> make_env(const EnvironmentSpec& spec, std::uint64_t seed) {
  if (const auto* s = std::get_if<env_kind::BernoulliGap>(&spec)) {
    return std::make_unique<BernoulliGapEnv>(*s, seed);
  }
  if (const auto* s = std::get_if<env_kind::LowerBound>(&spec)) {
    return std::make_unique<LowerBoundEnv>(*s, seed);
  }
  if (const auto* s = std::get_if<env_kind::ErdosRenyiProcess>(&spec)) {
    return std::make_unique<ErdosRenyiEnv>(*s, seed);
  }
  const auto& path = std::get<env_kind::Replay>(spec).path;
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open replay file '" + path + "'");
  try {
    return std::make_unique<ReplayEnv>(read_replay(in));
  } catch (const InvalidParameter& e) {
    throw InvalidParameter(path + ": " + e.what());
  }
}

std::vector<Round> read_replay(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::optional<std::string> {
    while (std::getline(in, line)) {
      ++line_no;
      if (!detail::is_blank_or_comment(line)) return std::string(detail::trim(line));
    }
    return std::nullopt;
  };
  auto fail = [&](const std::string& what) {
    return InvalidParameter("replay line " + std::to_string(line_no) + ": " + what);
  };

  auto header = next_line();
  if (!header) throw InvalidParameter("replay input is empty");
  const std::size_t k = detail::parse_header(*header, "K");
  header = next_line();
  if (!header) throw fail("missing 'T <int>' header");
  const std::size_t horizon = detail::parse_header(*header, "T");

  std::vector<Round> rounds;
  rounds.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    std::vector<Arc> arcs;
    while (true) {
      auto l = next_line();
      if (!l) throw fail("round " + std::to_string(t + 1) + " ends before '---'");
      if (*l == "---") break;
      const auto tokens = detail::split_ws(*l);
      if (tokens.size() != 2) throw fail("expected an arc 'i j' or '---'");
      arcs.emplace_back(detail::parse_number<Action>(tokens[0], "arc tail"),
                        detail::parse_number<Action>(tokens[1], "arc head"));
    }
    auto l = next_line();
    if (!l) throw fail("round " + std::to_string(t + 1) + " has no loss line");
    const auto tokens = detail::split_ws(*l);
    if (tokens.size() != k) {
      throw fail("expected " + std::to_string(k) + " losses, got " + std::to_string(tokens.size()));
    }
    std::vector<double> losses;
    for (auto tok : tokens) losses.push_back(detail::parse_number<double>(tok, "loss"));
    try {
      rounds.push_back(Round{FeedbackGraph(k, arcs), LossVector(std::move(losses))});
    } catch (const InvalidParameter& e) {
      throw fail(e.what());
    }
  }
  if (next_line()) throw fail("trailing content after " + std::to_string(horizon) + " rounds");
  return rounds;
}

void write_replay(std::ostream& out, std::span<const Round> rounds) {
  if (rounds.empty()) throw InvalidParameter("cannot write an empty replay");
  out << "K " << rounds.front().graph.k() << "\nT " << rounds.size() << '\n';
  for (const auto& round : rounds) {
    for (const auto& [i, j] : round.graph.arcs()) out << i << ' ' << j << '\n';
    out << "---\n";
    const auto losses = round.losses.values();
    for (std::size_t i = 0; i < losses.size(); ++i) {
      out << (i ? " " : "") << detail::format_double(losses[i]);
    }
    out << '\n';
  }
}

}  // namespace fgb
