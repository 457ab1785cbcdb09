#include "fgb/policies.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <string>

#include "fgb/errors.hpp"

namespace fgb {
namespace {

void require_eta(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidParameter("eta must lie in (0, 1]");
}

void require_k(std::size_t k) {
  if (k == 0) throw InvalidParameter("policy needs at least one action");
}

Action take_pending(std::optional<Action>& pending, const RoundFeedback& fb) {
  if (!pending) throw ProtocolViolation("update called without a preceding act");
  if (fb.action != *pending) {
    throw ProtocolViolation("feedback reports action " + std::to_string(fb.action) +
                            " but the policy played " + std::to_string(*pending));
  }
  pending.reset();
  return fb.action;
}

// The observed pairs must be exactly the observation set of the played action.
void check_observed(const RoundFeedback& fb, std::size_t k) {
  if (fb.graph.k() != k) {
    throw ProtocolViolation("feedback graph has k = " + std::to_string(fb.graph.k()) +
                            ", policy has k = " + std::to_string(k));
  }
  const auto expected = observation_set(fb.graph, fb.action);
  if (expected.size() != fb.observed.size()) {
    throw ProtocolViolation("observed " + std::to_string(fb.observed.size()) +
                            " losses, observation set of action " + std::to_string(fb.action) +
                            " has " + std::to_string(expected.size()));
  }
  for (std::size_t n = 0; n < expected.size(); ++n) {
    if (fb.observed[n].action != expected[n]) {
      throw ProtocolViolation("observed action " + std::to_string(fb.observed[n].action) +
                              " is not in the observation set in order");
    }
    const double loss = fb.observed[n].loss;
    if (!(loss >= 0.0 && loss <= 1.0)) throw ProtocolViolation("observed loss outside [0, 1]");
  }
}

double log_k(std::size_t k) { return std::log(static_cast<double>(k)); }

}  // namespace

std::vector<Observation> observe(const FeedbackGraph& g, Action action,
                                 std::span<const double> losses) {
  if (losses.size() != g.k()) throw InvalidParameter("loss vector size differs from k");
  std::vector<Observation> out;
  for (Action j : observation_set(g, action)) out.push_back({j, losses[j]});
  return out;
}

Action sample_inverse_cdf(std::span<const double> p, double u) {
  double cumulative = 0.0;
  Action last_positive = 0;
  for (Action i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    cumulative += p[i];
    last_positive = i;
    if (u < cumulative) return i;
  }
  return last_positive;
}

std::vector<double> softmax(std::span<const double> log_weights) {
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  std::vector<double> w(log_weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(log_weights[i] - top);
    total += w[i];
  }
  for (double& v : w) v /= total;
  return w;
}

double exp3set_tuned_eta(std::size_t k, double sum_bound) {
  require_k(k);
  if (!(sum_bound > 0.0)) throw InvalidParameter("tuning needs a positive bound sum");
  if (k == 1) return 1.0;
  return std::min(1.0, std::sqrt(2.0 * log_k(k) / sum_bound));
}

double elpp_tuned_eta(std::size_t k, double delta, double sum_bound) {
  require_k(k);
  if (!(sum_bound > 0.0)) throw InvalidParameter("tuning needs a positive bound sum");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidParameter("delta must lie in (0, 1)");
  const double kd = static_cast<double>(k);
  if (k == 1) return 1.0 / 3.0;
  const double log_conf = std::log(5.0 * kd / delta);
  const double eta = std::sqrt(std::sqrt(log_conf * log_k(k)) / (6.0 * sum_bound));
  // Stay inside the admissible region eta <= 1/(3k), beta <= 1/4.
  const double beta_cap = 1.0 / (8.0 * std::sqrt(log_conf / log_k(k)));
  return std::min({eta, 1.0 / (3.0 * kd), beta_cap});
}

// -- Exp3Set -----------------------------------------------------------------

Exp3Set::Exp3Set(std::size_t k, double eta) : eta_(eta), log_weights_(k, 0.0) {
  require_k(k);
  require_eta(eta);
}

Distribution Exp3Set::distribution() const { return Distribution(softmax(log_weights_)); }

Decision Exp3Set::act(SplitMix64& rng) {
  last_p_ = softmax(log_weights_);
  const Action a = sample_inverse_cdf(last_p_, rng.uniform());
  pending_ = a;
  return {Distribution(last_p_), a};
}

void Exp3Set::update(const RoundFeedback& fb) {
  take_pending(pending_, fb);
  check_observed(fb, k());
  // q comes from the graph disclosed after acting.
  const auto q = observation_probs(last_p_, fb.graph);
  for (const auto& [i, loss] : fb.observed) {
    log_weights_[i] -= eta_ * iw_estimate(loss, true, q[i]);
  }
  ++rounds_;
}

// -- Hedge -------------------------------------------------------------------

Hedge::Hedge(std::size_t k, double eta) : eta_(eta), log_weights_(k, 0.0) {
  require_k(k);
  require_eta(eta);
}

Decision Hedge::act(SplitMix64& rng) {
  auto p = softmax(log_weights_);
  const Action a = sample_inverse_cdf(p, rng.uniform());
  pending_ = a;
  return {Distribution(std::move(p)), a};
}

void Hedge::update(const RoundFeedback& fb) {
  take_pending(pending_, fb);
  check_observed(fb, k());
  if (fb.observed.size() != k()) {
    throw ProtocolViolation("Hedge needs every loss; observed " +
                            std::to_string(fb.observed.size()) + " of " + std::to_string(k()));
  }
  for (const auto& [i, loss] : fb.observed) log_weights_[i] -= eta_ * loss;
}

// -- Exp3 --------------------------------------------------------------------

Exp3::Exp3(std::size_t k, double eta) : eta_(eta), log_weights_(k, 0.0) {
  require_k(k);
  require_eta(eta);
}

Decision Exp3::act(SplitMix64& rng) {
  last_p_ = softmax(log_weights_);
  const Action a = sample_inverse_cdf(last_p_, rng.uniform());
  pending_ = a;
  return {Distribution(last_p_), a};
}

void Exp3::update(const RoundFeedback& fb) {
  const Action played = take_pending(pending_, fb);
  check_observed(fb, k());
  last_estimates_.assign(k(), 0.0);
  for (const auto& [i, loss] : fb.observed) {
    if (i == played) last_estimates_[i] = iw_estimate(loss, true, last_p_[i]);
  }
  log_weights_[played] -= eta_ * last_estimates_[played];
}

// -- Exp3Dom -----------------------------------------------------------------

std::size_t Exp3Dom::band_count(std::size_t k) {
  require_k(k);
  return static_cast<std::size_t>(std::bit_width(k));
}

std::size_t Exp3Dom::band_of(std::size_t dominating_set_size) {
  if (dominating_set_size == 0) throw InvalidParameter("empty dominating set");
  return static_cast<std::size_t>(std::bit_width(dominating_set_size)) - 1;
}

double Exp3Dom::doubling_gamma(std::size_t k, std::size_t band, unsigned level) {
  require_k(k);
  // ln 1 = 0 would give gamma = 0; with one action any gamma yields p = (1).
  if (k == 1) return 1.0;
  const double g = std::sqrt(std::ldexp(log_k(k), static_cast<int>(band)) /
                             std::ldexp(1.0, static_cast<int>(level)));
  return std::min(1.0, g);
}

Exp3Dom::Exp3Dom(std::size_t k, std::vector<DomBand> bands, bool doubling)
    : k_(k), bands_(std::move(bands)), doubling_(doubling) {}

Exp3Dom Exp3Dom::with_fixed_gammas(std::size_t k, std::vector<double> gammas) {
  const std::size_t count = band_count(k);
  if (gammas.size() != count) {
    throw InvalidParameter("Exp3Dom needs " + std::to_string(count) + " gammas for k = " +
                           std::to_string(k) + ", got " + std::to_string(gammas.size()));
  }
  std::vector<DomBand> bands;
  for (double g : gammas) {
    if (!(g > 0.0 && g <= 1.0)) throw InvalidParameter("Exp3Dom gamma must lie in (0, 1]");
    bands.push_back(DomBand{g, std::vector<double>(k, 0.0)});
  }
  return Exp3Dom(k, std::move(bands), false);
}

Exp3Dom Exp3Dom::with_doubling(std::size_t k) {
  const std::size_t count = band_count(k);
  std::vector<DomBand> bands;
  for (std::size_t b = 0; b < count; ++b) {
    bands.push_back(DomBand{doubling_gamma(k, b, 0), std::vector<double>(k, 0.0)});
  }
  return Exp3Dom(k, std::move(bands), true);
}

DomDecision Exp3Dom::act(const FeedbackGraph& g, SplitMix64& rng) {
  if (g.k() != k_) throw InvalidParameter("graph size differs from policy k");
  auto dominating = greedy_dominating_set(g);
  const std::size_t b = band_of(dominating.size());
  const DomBand& band = bands_[b];

  auto p = softmax(band.log_weights);
  const double explore = band.gamma / static_cast<double>(dominating.size());
  for (double& v : p) v *= 1.0 - band.gamma;
  for (Action r : dominating) p[r] += explore;

  const Action a = sample_inverse_cdf(p, rng.uniform());
  pending_ = Pending{a, b, p};
  return {Distribution(std::move(p)), a, b, std::move(dominating)};
}

void Exp3Dom::update(const RoundFeedback& fb) {
  if (!pending_) throw ProtocolViolation("update called without a preceding act");
  Pending pending = std::move(*pending_);
  std::optional<Action> played = pending.action;
  pending_.reset();
  take_pending(played, fb);
  check_observed(fb, k_);

  DomBand& band = bands_[pending.band];
  const auto q = observation_probs(pending.p, fb.graph);
  const double scale = band.gamma / std::ldexp(1.0, static_cast<int>(pending.band));
  for (const auto& [i, loss] : fb.observed) {
    band.log_weights[i] -= scale * iw_estimate(loss, true, q[i]);
  }
  ++band.updates;

  double exposure_sum = 0.0;
  for (std::size_t i = 0; i < k_; ++i) {
    if (pending.p[i] > 0.0) exposure_sum += pending.p[i] / q[i];
  }
  band.accumulator += 1.0 + exposure_sum / std::ldexp(1.0, static_cast<int>(pending.band) + 1);
  if (doubling_ && band.accumulator > std::ldexp(1.0, static_cast<int>(band.level))) {
    std::fill(band.log_weights.begin(), band.log_weights.end(), 0.0);
    ++band.level;
    band.gamma = doubling_gamma(k_, pending.band, band.level);
    band.accumulator = 0.0;
    ++band.restarts;
  }
}

// -- ELP.P -------------------------------------------------------------------

double ElpP::beta_for(std::size_t k, double delta, double eta) {
  require_k(k);
  if (k == 1) return 0.0;
  const double kd = static_cast<double>(k);
  return 2.0 * eta * std::sqrt(std::log(5.0 * kd / delta) / log_k(k));
}

ElpP::ElpP(std::size_t k, double delta, double eta)
    : delta_(delta), eta_(eta), beta_(0.0), log_weights_(k, 0.0) {
  require_k(k);
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidParameter("ELP.P: delta must lie in (0, 1)");
  const double eta_max = 1.0 / (3.0 * static_cast<double>(k));
  if (!(eta > 0.0 && eta <= eta_max)) {
    throw InvalidParameter("ELP.P: eta = " + std::to_string(eta) +
                           " violates 0 < eta <= 1/(3k) = " + std::to_string(eta_max));
  }
  beta_ = beta_for(k, delta, eta);
  if (beta_ > 0.25) {
    throw InvalidParameter("ELP.P: beta = " + std::to_string(beta_) + " violates beta <= 1/4");
  }
}

ElpMix elpp_mixture(std::span<const double> log_weights, const MaxMinSolution& lp, double eta,
                    double beta) {
  if (log_weights.size() != lp.s.size()) throw InvalidParameter("LP size differs from k");
  const double gamma = (1.0 + beta) * eta / lp.value;
  if (gamma > 0.5) {
    throw ConfigurationError("ELP.P exploration rate " + std::to_string(gamma) +
                             " exceeds 1/2");
  }
  auto p = softmax(log_weights);
  std::vector<double> s(lp.s.probs().begin(), lp.s.probs().end());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = (1.0 - gamma) * p[i] + gamma * s[i];
  return {std::move(p), std::move(s), lp.value, gamma};
}

ElpDecision ElpP::act(const FeedbackGraph& g, SplitMix64& rng) {
  if (g.k() != k()) throw InvalidParameter("graph size differs from policy k");
  if (!lp_graph_ || !(*lp_graph_ == g)) {
    lp_ = solve_maxmin_coverage(g);
    lp_graph_ = g;
  }
  auto mix = elpp_mixture(log_weights_, *lp_, eta_, beta_);
  const Action a = sample_inverse_cdf(mix.p, rng.uniform());
  pending_ = Pending{a, mix.p};
  return {Distribution(std::move(mix.p)), a, mix.gamma, lp_->s};
}

void ElpP::update(const RoundFeedback& fb) {
  if (!pending_) throw ProtocolViolation("update called without a preceding act");
  Pending pending = std::move(*pending_);
  std::optional<Action> played = pending.action;
  pending_.reset();
  take_pending(played, fb);
  check_observed(fb, k());

  last_q_ = observation_probs(pending.p, fb.graph);
  std::vector<bool> seen(k(), false);
  std::vector<double> reward(k(), 0.0);
  for (const auto& [i, loss] : fb.observed) {
    seen[i] = true;
    reward[i] = 1.0 - loss;
  }
  for (std::size_t i = 0; i < k(); ++i) {
    assert(last_q_[i] >= (1.0 + beta_) * eta_ * (1.0 - 1e-9));
    log_weights_[i] += eta_ * iw_estimate(reward[i], seen[i], last_q_[i], beta_);
  }
}

}  // namespace fgb
