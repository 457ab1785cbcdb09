#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fgb/graph.hpp"

namespace fgb {

/// Probability vector over k >= 1 actions: entries >= 0 summing to 1 within 1e-9.
class Distribution {
 public:
  static constexpr double kSumTolerance = 1e-9;

  /// Validates and takes ownership; throws InvalidParameter otherwise.
  explicit Distribution(std::vector<double> probs);

  static Distribution uniform(std::size_t k);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  std::vector<double> probs_;
};

/// Losses in [0, 1], one per action.
class LossVector {
 public:
  explicit LossVector(std::vector<double> losses);

  std::size_t size() const noexcept { return losses_.size(); }
  double operator[](std::size_t i) const { return losses_[i]; }
  std::span<const double> values() const noexcept { return losses_; }

  friend bool operator==(const LossVector&, const LossVector&) = default;

 private:
  std::vector<double> losses_;
};

/// q_i = sum of p_j over every j whose observation set contains i
/// (p_i itself plus the in-neighbours of i).
std::vector<double> observation_probs(std::span<const double> p, const FeedbackGraph& g);

/// Sum over i of p_i / q_i; skips actions with p_i == 0.
double exposure(std::span<const double> p, const FeedbackGraph& g);

/// (value * 1{observed} + bias) / q. Throws InvalidParameter unless q in (0, 1].
double iw_estimate(double value, bool observed, double q, double bias = 0.0);

}  // namespace fgb
