#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fgb/environments.hpp"
#include "fgb/policies.hpp"
#include "fgb/rng.hpp"

namespace fgb {

enum class PolicyName { kExp3Set, kExp3Dom, kElpP, kHedge, kExp3 };

PolicyName parse_policy_name(const std::string& name);
std::string to_string(PolicyName name);

/// Policy choice plus parameters. Learning rates left unset are tuned for
/// the horizon from `round_bound`, a per-round bound m_t on mas (or alpha for
/// symmetric graphs); see tuning_bound for the default.
struct PolicySpec {
  PolicyName name = PolicyName::kExp3Set;
  std::optional<double> eta;
  std::optional<double> round_bound;
  /// Exp3Dom: fixed per-band gammas; the doubling trick when unset.
  std::optional<std::vector<double>> gammas;
  /// ELP.P confidence.
  double delta = 0.1;
};

struct ExperimentConfig {
  PolicySpec policy;
  EnvironmentSpec environment;
  std::size_t horizon = 1;
  std::size_t repetitions = 1;
  std::uint64_t seed = 0;
  std::string output;
  std::size_t stride = 100;
  std::size_t threads = 1;
};

struct TracePoint {
  std::size_t round;
  double player_loss;
  double best_arm_loss;
  /// player_loss - best_arm_loss, against the best realized fixed arm.
  double regret;
  std::vector<double> arm_losses;
};

struct RunTrace {
  std::vector<TracePoint> points;
  std::vector<Action> actions;
};

struct AggregatePoint {
  std::size_t round;
  double mean_regret;
  double std_regret;
  double mean_player_loss;
  double best_arm_loss;

  friend bool operator==(const AggregatePoint&, const AggregatePoint&) = default;
};

struct RegretTrace {
  std::vector<AggregatePoint> points;
  std::vector<RunTrace> runs;
};

using AnyPolicy = std::variant<Exp3Set, Exp3Dom, ElpP, Hedge, Exp3>;

/// Number of actions the environment spec will expose (reads replay files).
std::size_t environment_k(const EnvironmentSpec& spec);

/// The per-round bound used for tuning: spec.round_bound when set, else 1 for
/// Hedge and k for Exp3. Exp3-SET and ELP.P use the environment's fixed
/// graph when it is deterministic: alpha if symmetric, exact mas if
/// k <= 20; k in every other case.
double tuning_bound(const PolicySpec& spec, const EnvironmentSpec& env);

/// Instantiates and tunes a policy for k actions and horizon T.
AnyPolicy make_policy(const PolicySpec& spec, std::size_t k, std::size_t horizon,
                      double round_bound);

/// Plays `horizon` rounds of the protocol. Informed policies receive the
/// round's graph before acting; uninformed ones only through feedback.
template <typename Policy>
RunTrace run_protocol(Policy& policy, Environment& env, std::size_t horizon, SplitMix64& rng,
                      std::size_t stride) {
  static_assert(InformedPolicy<Policy> || UninformedPolicy<Policy>);
  const std::size_t k = env.k();
  RunTrace trace;
  trace.actions.reserve(horizon);
  std::vector<double> arm_losses(k, 0.0);
  double player_loss = 0.0;
  for (std::size_t t = 1; t <= horizon; ++t) {
    const Round& round = env.emit_round(t, trace.actions);
    Action action;
    if constexpr (InformedPolicy<Policy>) {
      action = policy.act(round.graph, rng).action;
    } else {
      action = policy.act(rng).action;
    }
    const auto losses = round.losses.values();
    const auto observed = observe(round.graph, action, losses);
    policy.update(RoundFeedback{action, observed, round.graph});

    player_loss += losses[action];
    for (std::size_t i = 0; i < k; ++i) arm_losses[i] += losses[i];
    trace.actions.push_back(action);
    if (t % stride == 0 || t == horizon) {
      const double best = *std::min_element(arm_losses.begin(), arm_losses.end());
      trace.points.push_back({t, player_loss, best, player_loss - best, arm_losses});
    }
  }
  return trace;
}

/// One run. The environment draws from substream 0 of `seed` and the policy
/// from substream 1. Throws ConfigurationError when the policy does not fit
/// the environment or a replay is shorter than the horizon.
RunTrace run_one(const PolicySpec& policy, const EnvironmentSpec& env, std::size_t horizon,
                 std::uint64_t seed, std::size_t stride = 100);

/// Repetition i runs with seed derive_seed(config.seed, i). Repetitions may
/// run on several threads; the reduction is in repetition order, so the
/// output does not depend on the thread count.
RegretTrace run_many(const ExperimentConfig& config);

/// Mean and sample standard deviation of regret across runs, per recorded round.
std::vector<AggregatePoint> aggregate(const std::vector<RunTrace>& runs);

// CSV: round,mean_regret,std_regret,mean_player_loss,best_arm_loss.
void emit_csv(const std::vector<AggregatePoint>& points, std::ostream& out);
void emit_csv(const std::vector<AggregatePoint>& points, const std::string& path);
std::vector<AggregatePoint> parse_csv(std::istream& in);

/// JSON experiment description; see docs/config.md.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace fgb
