#include "fgb/estimators.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "fgb/errors.hpp"

namespace fgb {

Distribution::Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw InvalidParameter("distribution over zero actions");
  double sum = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (!(probs_[i] >= 0.0) || !std::isfinite(probs_[i])) {
      throw InvalidParameter("distribution entry " + std::to_string(i) +
                             " is negative or not finite");
    }
    sum += probs_[i];
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw InvalidParameter("distribution sums to " + std::to_string(sum) + ", not 1");
  }
}

Distribution Distribution::uniform(std::size_t k) {
  if (k == 0) throw InvalidParameter("distribution over zero actions");
  return Distribution(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

LossVector::LossVector(std::vector<double> losses) : losses_(std::move(losses)) {
  for (std::size_t i = 0; i < losses_.size(); ++i) {
    if (!(losses_[i] >= 0.0 && losses_[i] <= 1.0)) {
      throw InvalidParameter("loss of action " + std::to_string(i) + " outside [0, 1]");
    }
  }
}

std::vector<double> observation_probs(std::span<const double> p, const FeedbackGraph& g) {
  if (p.size() != g.k()) {
    throw InvalidParameter("distribution has " + std::to_string(p.size()) +
                           " entries but graph has k = " + std::to_string(g.k()));
  }
  std::vector<double> q(p.size());
  for (Action i = 0; i < g.k(); ++i) {
    double sum = p[i];
    const auto row = g.in_row(i);
    for (std::size_t w = 0; w < row.size(); ++w) {
      for (std::uint64_t bits = row[w]; bits != 0; bits &= bits - 1) {
        sum += p[w * 64 + static_cast<std::size_t>(std::countr_zero(bits))];
      }
    }
    q[i] = sum;
  }
  return q;
}

double exposure(std::span<const double> p, const FeedbackGraph& g) {
  const auto q = observation_probs(p, g);
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) total += p[i] / q[i];
  }
  return total;
}

double iw_estimate(double value, bool observed, double q, double bias) {
  if (!(q > 0.0 && q <= 1.0 + 1e-12)) {
    throw InvalidParameter("observation probability q = " + std::to_string(q) +
                           " outside (0, 1]");
  }
  return ((observed ? value : 0.0) + bias) / q;
}

}  // namespace fgb
