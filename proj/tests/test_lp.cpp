#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fgb/errors.hpp"
#include "fgb/lp.hpp"
#include "fgb/verify.hpp"

using namespace fgb;

namespace {

FeedbackGraph make(GraphKind kind, std::size_t k) {
  SplitMix64 rng(1);
  return generate(kind, k, rng);
}

}  // namespace

TEST_CASE("closed-form instances") {
  const auto empty = solve_maxmin_coverage(make(graph_kind::Empty{}, 5));
  CHECK(empty.value == doctest::Approx(0.2).epsilon(1e-12));
  for (std::size_t i = 0; i < 5; ++i) CHECK(empty.s[i] == doctest::Approx(0.2).epsilon(1e-12));

  const auto clique = solve_maxmin_coverage(make(graph_kind::Clique{}, 5));
  CHECK(clique.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(clique.s == Distribution::uniform(5));

  for (Action center : {0, 2}) {
    const auto star = solve_maxmin_coverage(make_star(4, center));
    CHECK(star.value == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < 4; ++i) CHECK(star.s[i] == (i == center ? 1.0 : 0.0));
  }

  // Total order: only node k-1 observes node k-1, so mass there covers all.
  const auto order = solve_maxmin_coverage(make(graph_kind::TotalOrder{}, 6));
  CHECK(order.value == doctest::Approx(1.0).epsilon(1e-12));

  // Directed 4-cycle: coverage_i = s_i + s_{i-1}; optimum 1/2.
  const auto cycle = solve_maxmin_coverage(make_cycle(4, false));
  CHECK(cycle.value == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("tolerance validation") {
  const auto g = make(graph_kind::Empty{}, 3);
  CHECK_THROWS_AS(solve_maxmin_coverage(g, 0.0), InvalidParameter);
  CHECK_THROWS_AS(solve_maxmin_coverage(g, 1e-2), InvalidParameter);
  CHECK_NOTHROW(solve_maxmin_coverage(g, 1e-3));
}

TEST_CASE("random digraphs against the basic-solution oracle") {
  SplitMix64 rng(21);
  for (int n = 0; n < 300; ++n) {
    const std::size_t k = 1 + rng.below(8);
    const auto g = generate(graph_kind::ErdosRenyi{0.1 * static_cast<double>(1 + rng.below(9))}, k, rng);
    const auto sol = solve_maxmin_coverage(g);
    CHECK(std::abs(sol.value - oracle::maxmin_lp_value(g)) <= 1e-6);

    const auto cover = observation_probs(sol.s.probs(), g);
    double least = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      CHECK(sol.certificate[i] == doctest::Approx(cover[i]).epsilon(1e-12));
      least = std::min(least, cover[i]);
    }
    CHECK(sol.value == doctest::Approx(least).epsilon(1e-12));
    CHECK(sol.value >= 1.0 / static_cast<double>(k) - 1e-9);
    CHECK(sol.value <= 1.0 + 1e-9);
    CHECK(1.0 / sol.value <= static_cast<double>(oracle::domination_number(g)) + 1e-9);
    CHECK(oracle::domination_number(g) <= oracle::mas_size(g));
  }
}

TEST_CASE("1/value <= mas up to k = 12") {
  SplitMix64 rng(22);
  for (int n = 0; n < 200; ++n) {
    const std::size_t k = 1 + rng.below(12);
    const auto g = generate(graph_kind::ErdosRenyi{rng.uniform()}, k, rng);
    const auto sol = solve_maxmin_coverage(g);
    CHECK(1.0 / sol.value <= static_cast<double>(oracle::domination_number(g)) + 1e-9);
    CHECK(1.0 / sol.value <= static_cast<double>(oracle::mas_size(g)) + 1e-9);
  }
}

TEST_CASE("determinism and larger instances") {
  SplitMix64 rng(23);
  const auto g = generate(graph_kind::ErdosRenyi{0.3}, 40, rng);
  const auto a = solve_maxmin_coverage(g);
  const auto b = solve_maxmin_coverage(g);
  CHECK(a.s == b.s);
  CHECK(a.value == b.value);
  CHECK(a.pivots == b.pivots);

  for (std::size_t k : {64, 130, 512}) {
    for (double r : {0.02, 0.2}) {
      const auto big = generate(graph_kind::ErdosRenyi{r}, k, rng);
      const auto sol = solve_maxmin_coverage(big);
      const double cover_bound = 1.0 / static_cast<double>(greedy_dominating_set(big).size());
      CHECK(sol.value >= cover_bound - 1e-9);
      CHECK(sol.value <= 1.0 + 1e-9);
    }
  }
}
