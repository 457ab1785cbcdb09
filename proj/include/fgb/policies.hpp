#pragma once

#include <concepts>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fgb/estimators.hpp"
#include "fgb/graph.hpp"
#include "fgb/lp.hpp"
#include "fgb/rng.hpp"

namespace fgb {

struct Observation {
  Action action;
  double loss;
};

/// What the learner sees after acting: its action, the (action, loss) pairs of
/// the observation set, and the round's graph.
struct RoundFeedback {
  Action action;
  std::span<const Observation> observed;
  const FeedbackGraph& graph;
};

/// Builds feedback for `action` from a full loss vector, in observation-set order.
std::vector<Observation> observe(const FeedbackGraph& g, Action action,
                                 std::span<const double> losses);

struct Decision {
  Distribution p;
  Action action;
};

/// Inverse-CDF sampling with one uniform draw. Falls back to the last action
/// with positive mass when rounding leaves u above the final partial sum.
Action sample_inverse_cdf(std::span<const double> p, double u);

/// Softmax of log-weights with max-subtraction.
std::vector<double> softmax(std::span<const double> log_weights);

// Uninformed policies act before the round's graph is disclosed; informed
// ones receive it as an argument. The harness dispatches on these concepts,
// so pairing an informed policy with a graph-withholding loop does not compile.
template <typename P>
concept UninformedPolicy = requires(P& p, SplitMix64& rng, const RoundFeedback& fb) {
  { p.act(rng) };
  { p.update(fb) };
  { p.k() } -> std::convertible_to<std::size_t>;
};

template <typename P>
concept InformedPolicy =
    requires(P& p, const FeedbackGraph& g, SplitMix64& rng, const RoundFeedback& fb) {
      { p.act(g, rng) };
      { p.update(fb) };
      { p.k() } -> std::convertible_to<std::size_t>;
    };

// Learning-rate tuning.
/// sqrt(2 ln k / sum_bound), the tuning for per-round bounds on mas (or alpha
/// in the symmetric case) summing to `sum_bound`. Clamped to 1; k == 1 gives 1.
double exp3set_tuned_eta(std::size_t k, double sum_bound);
/// eta with eta^2 = (1/6) sqrt(ln(5k/delta) ln k) / sum_bound.
double elpp_tuned_eta(std::size_t k, double delta, double sum_bound);

/// Exponential weights with importance-weighted losses on the observed set;
/// the graph is only needed after acting.
class Exp3Set {
 public:
  /// eta in (0, 1], k >= 1.
  Exp3Set(std::size_t k, double eta);

  Decision act(SplitMix64& rng);
  void update(const RoundFeedback& fb);

  std::size_t k() const noexcept { return log_weights_.size(); }
  double eta() const noexcept { return eta_; }
  std::size_t rounds() const noexcept { return rounds_; }
  std::span<const double> log_weights() const noexcept { return log_weights_; }
  Distribution distribution() const;

 private:
  double eta_;
  std::vector<double> log_weights_;
  std::vector<double> last_p_;
  std::optional<Action> pending_;
  std::size_t rounds_ = 0;
};

/// Full-information exponential weights (every loss observed, q = 1).
class Hedge {
 public:
  Hedge(std::size_t k, double eta);

  Decision act(SplitMix64& rng);
  void update(const RoundFeedback& fb);

  std::size_t k() const noexcept { return log_weights_.size(); }
  std::span<const double> log_weights() const noexcept { return log_weights_; }

 private:
  double eta_;
  std::vector<double> log_weights_;
  std::optional<Action> pending_;
};

/// Bandit exponential weights without explicit exploration: only the played
/// action's loss is used, divided by its own probability.
class Exp3 {
 public:
  Exp3(std::size_t k, double eta);

  Decision act(SplitMix64& rng);
  void update(const RoundFeedback& fb);

  std::size_t k() const noexcept { return log_weights_.size(); }
  std::span<const double> log_weights() const noexcept { return log_weights_; }
  /// Loss estimates computed by the most recent update.
  std::span<const double> last_estimates() const noexcept { return last_estimates_; }

 private:
  double eta_;
  std::vector<double> log_weights_;
  std::vector<double> last_p_;
  std::vector<double> last_estimates_;
  std::optional<Action> pending_;
};

/// One exponential-weights instance of Exp3Dom, used for rounds whose
/// dominating set has size in [2^b, 2^(b+1) - 1].
struct DomBand {
  double gamma;
  std::vector<double> log_weights;
  /// Doubling level r; gamma = min(1, sqrt(2^b ln k / 2^r)).
  unsigned level = 0;
  /// Running sum of 1 + Q_t / 2^(b+1) since the last restart.
  double accumulator = 0.0;
  std::size_t restarts = 0;
  std::size_t updates = 0;
};

struct DomDecision {
  Distribution p;
  Action action;
  std::size_t band;
  std::vector<Action> dominating_set;
};

/// Informed exponential weights with exploration on a greedy dominating set,
/// one instance per dominating-set size band.
class Exp3Dom {
 public:
  /// Fixed exploration rate per band; gammas.size() must be floor(log2 k) + 1
  /// and each gamma in (0, 1].
  static Exp3Dom with_fixed_gammas(std::size_t k, std::vector<double> gammas);
  /// Per-band doubling trick: start at level 0 and restart the band with the
  /// next level whenever its accumulator exceeds 2^level.
  static Exp3Dom with_doubling(std::size_t k);

  static std::size_t band_count(std::size_t k);
  static std::size_t band_of(std::size_t dominating_set_size);
  static double doubling_gamma(std::size_t k, std::size_t band, unsigned level);

  DomDecision act(const FeedbackGraph& g, SplitMix64& rng);
  void update(const RoundFeedback& fb);

  std::size_t k() const noexcept { return k_; }
  bool doubling() const noexcept { return doubling_; }
  std::span<const DomBand> bands() const noexcept { return bands_; }

 private:
  Exp3Dom(std::size_t k, std::vector<DomBand> bands, bool doubling);

  struct Pending {
    Action action;
    std::size_t band;
    std::vector<double> p;
  };

  std::size_t k_;
  std::vector<DomBand> bands_;
  bool doubling_;
  std::optional<Pending> pending_;
};

/// Mixture computed by one ELP.P act.
struct ElpMix {
  std::vector<double> p;
  std::vector<double> s;
  double lp_value;
  double gamma;
};

/// p = (1 - gamma) softmax(log_weights) + gamma s with s from the max-min
/// coverage LP and gamma = (1 + beta) eta / LP value. Throws
/// ConfigurationError if gamma > 1/2.
ElpMix elpp_mixture(std::span<const double> log_weights, const MaxMinSolution& lp, double eta,
                    double beta);

struct ElpDecision {
  Distribution p;
  Action action;
  double gamma;
  Distribution s;
};

/// Informed exponential weights on biased reward estimates with LP-shaped
/// exploration.
class ElpP {
 public:
  /// delta in (0, 1), eta in (0, 1/(3k)], and the resulting
  /// beta = 2 eta sqrt(ln(5k/delta) / ln k) <= 1/4. For k == 1 beta is 0.
  ElpP(std::size_t k, double delta, double eta);

  static double beta_for(std::size_t k, double delta, double eta);

  ElpDecision act(const FeedbackGraph& g, SplitMix64& rng);
  void update(const RoundFeedback& fb);

  std::size_t k() const noexcept { return log_weights_.size(); }
  double eta() const noexcept { return eta_; }
  double beta() const noexcept { return beta_; }
  double delta() const noexcept { return delta_; }
  std::span<const double> log_weights() const noexcept { return log_weights_; }
  /// Observation probabilities from the most recent update.
  std::span<const double> last_q() const noexcept { return last_q_; }

 private:
  struct Pending {
    Action action;
    std::vector<double> p;
  };

  double delta_;
  double eta_;
  double beta_;
  std::vector<double> log_weights_;
  std::vector<double> last_q_;
  std::optional<Pending> pending_;
  // The LP depends only on the graph; reuse it while the graph repeats.
  std::optional<FeedbackGraph> lp_graph_;
  std::optional<MaxMinSolution> lp_;
};

}  // namespace fgb
