#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fgb/graph.hpp"
#include "fgb/rng.hpp"

namespace fgb {

struct CheckFailure {
  /// The offending instance in graph file format, with the trial's extra
  /// data (distribution, parameters) appended as '#' comment lines.
  std::string instance;
  std::string detail;
};

struct CheckReport {
  std::string suite;
  std::size_t trials = 0;
  std::vector<CheckFailure> failures;
  /// Largest and smallest observed bound - quantity.
  double max_slack = 0.0;
  double min_slack = 0.0;

  bool passed() const noexcept { return failures.empty(); }
};

inline constexpr double kCheckTolerance = 1e-9;

/// Brute-force reference computations, deliberately written without the
/// fast paths they are compared against.
namespace oracle {
/// Plain subset enumeration; k <= 24.
std::size_t independence_number(const FeedbackGraph& g);
/// Smallest set whose closed out-neighbourhoods cover V; k <= 24.
std::size_t domination_number(const FeedbackGraph& g);
/// Largest induced acyclic subgraph, trying subsets from largest to smallest
/// with a topological-sort check; k <= 20.
std::size_t mas_size(const FeedbackGraph& g);
/// Max-min coverage LP value by enumerating basic solutions of
/// max t s.t. sum_{j observes i} s_j >= t, s >= 0, sum s = 1. k <= 10.
double maxmin_lp_value(const FeedbackGraph& g);
}  // namespace oracle

/// Random instance for trial `trial` of a suite: the first trials cycle
/// through clique, empty, total order, star, directed and symmetric cycle at
/// sizes max_k and max_k / 2 + 1; later trials draw k uniformly from
/// [1, max_k] and an Erdos-Renyi digraph with r uniform on {0.1, ..., 0.9}.
FeedbackGraph suite_graph(std::size_t trial, std::size_t max_k, SplitMix64& rng);

/// Q = sum p_i / q_i against mas (exact) for random positive p. max_k <= 12.
CheckReport check_exposure_vs_mas(std::size_t trials, std::size_t max_k, SplitMix64& rng);
/// sum 1 / (1 + indegree) <= 2 alpha ln(1 + k / alpha). max_k <= 16.
CheckReport check_indegree_sum(std::size_t trials, std::size_t max_k, SplitMix64& rng);
/// The greedy dominating set R dominates and
/// |R| <= min(gamma (1 + ln k), ceil(2 alpha ln k) + 1). max_k <= 16.
CheckReport check_greedy_cover(std::size_t trials, std::size_t max_k, SplitMix64& rng);
/// With R greedy, r = |R| and p_i >= beta on R:
/// Q <= 2 alpha ln(1 + (ceil(k^2 / (r beta)) + k) / alpha) + 2r. max_k <= 12.
CheckReport check_weighted_bound(std::size_t trials, std::size_t max_k, SplitMix64& rng);
/// The five second-moment relations for the (p, s, gamma) of one ELP.P act
/// with random weights and parameters, against exact mas. max_k <= 12.
CheckReport check_elp_inequalities(std::size_t trials, std::size_t max_k, SplitMix64& rng);
/// Empirical mean of p_i / q_i over `draws` Erdos-Renyi graphs against
/// (1 - (1 - r)^k) / (r k), within four standard errors. r in (0, 1].
/// For p other than uniform the coordinates differ from this value; only
/// their average matches it, see check_er_exposure.
CheckReport check_er_expectation(std::size_t k, double r, std::size_t draws, SplitMix64& rng);
/// Empirical mean of Q / k = (1/k) sum_i p_i / q_i against the same closed
/// form, within four standard errors. Holds for every p.
CheckReport check_er_exposure(std::size_t k, double r, std::size_t draws, SplitMix64& rng);
/// Solver value against the basic-solution oracle (within 1e-6) and
/// 1 / value <= gamma <= mas. max_k <= 8.
CheckReport check_lp(std::size_t trials, std::size_t max_k, SplitMix64& rng);

}  // namespace fgb
