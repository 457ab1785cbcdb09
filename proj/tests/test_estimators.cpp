#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fgb/errors.hpp"
#include "fgb/estimators.hpp"
#include "fgb/verify.hpp"

using namespace fgb;

namespace {

FeedbackGraph make(GraphKind kind, std::size_t k) {
  SplitMix64 rng(1);
  return generate(kind, k, rng);
}

std::vector<double> random_p(std::size_t k, SplitMix64& rng) {
  std::vector<double> p(k);
  for (auto& v : p) v = 0.01 + rng.uniform();
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& v : p) v /= total;
  return p;
}

}  // namespace

TEST_CASE("Distribution and LossVector validation") {
  CHECK_NOTHROW(Distribution({0.25, 0.75}));
  CHECK_NOTHROW(Distribution({0.5, 0.5 + 5e-10}));
  CHECK_THROWS_AS(Distribution({0.5, 0.6}), InvalidParameter);
  CHECK_THROWS_AS(Distribution({-0.1, 1.1}), InvalidParameter);
  CHECK_THROWS_AS(Distribution({NAN, 1.0}), InvalidParameter);
  CHECK_THROWS_AS(Distribution(std::vector<double>{}), InvalidParameter);
  const auto u = Distribution::uniform(4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(u[i] == 0.25);

  CHECK_NOTHROW(LossVector({0.0, 1.0, 0.5}));
  CHECK_THROWS_AS(LossVector({1.5}), InvalidParameter);
  CHECK_THROWS_AS(LossVector({-0.1}), InvalidParameter);
}

TEST_CASE("observation_probs") {
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
  for (double q : observation_probs(p, make(graph_kind::Clique{}, 4))) {
    CHECK(q == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK(observation_probs(p, make(graph_kind::Empty{}, 4)) == p);

  const std::vector<double> uniform(4, 0.25);
  const auto q = observation_probs(uniform, make(graph_kind::TotalOrder{}, 4));
  CHECK(q == std::vector<double>{1.0, 0.75, 0.5, 0.25});

  CHECK_THROWS_AS(observation_probs(p, make(graph_kind::Empty{}, 3)), InvalidParameter);
}

TEST_CASE("exposure") {
  SplitMix64 rng(2);
  for (int n = 0; n < 20; ++n) {
    const auto p = random_p(6, rng);
    CHECK(exposure(p, make(graph_kind::Clique{}, 6)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(exposure(p, make(graph_kind::Empty{}, 6)) == doctest::Approx(6.0).epsilon(1e-14));
  }
  // q = (1, 1/2, 1/4, 1/8), so Q = 3 * 1/2 + 1.
  const std::vector<double> halving{0.5, 0.25, 0.125, 0.125};
  CHECK(exposure(halving, make(graph_kind::TotalOrder{}, 4)) == 2.5);

  // Zero entries are skipped.
  const std::vector<double> sparse{0.0, 1.0, 0.0};
  CHECK(exposure(sparse, make(graph_kind::Empty{}, 3)) == 1.0);

  // Symmetric 5-cycle, uniform p: each q_i = 3/5, so Q = 5/3 <= alpha = 2.
  const std::vector<double> u5(5, 0.2);
  CHECK(exposure(u5, make_cycle(5, true)) == doctest::Approx(5.0 / 3.0).epsilon(1e-15));

  for (int n = 0; n < 300; ++n) {
    const std::size_t k = 1 + rng.below(10);
    const auto g = generate(graph_kind::ErdosRenyi{0.1 * static_cast<double>(1 + rng.below(9))}, k, rng);
    const auto p = random_p(k, rng);
    const double q = exposure(p, g);
    CHECK(q >= 1.0 - 1e-12);
    CHECK(q <= static_cast<double>(k) + 1e-12);
    CHECK(q <= static_cast<double>(oracle::mas_size(g)) + 1e-9);
    if (g.is_symmetric()) CHECK(q <= static_cast<double>(oracle::independence_number(g)) + 1e-9);
  }
}

TEST_CASE("iw_estimate") {
  CHECK(iw_estimate(0.4, true, 0.5) == doctest::Approx(0.8));
  CHECK(iw_estimate(0.7, false, 0.3) == 0.0);
  CHECK(iw_estimate(0.0, true, 0.5, 0.02) == doctest::Approx(0.04));
  CHECK(iw_estimate(1.0, true, 1.0) == 1.0);
  CHECK_THROWS_AS(iw_estimate(0.5, true, 0.0), InvalidParameter);
  CHECK_THROWS_AS(iw_estimate(0.5, true, -0.1), InvalidParameter);
  CHECK_THROWS_AS(iw_estimate(0.5, true, 1.5), InvalidParameter);
}

TEST_CASE("estimator moments under the learner's randomization") {
  SplitMix64 rng(4);
  for (int n = 0; n < 100; ++n) {
    const std::size_t k = 1 + rng.below(10);
    const auto g = generate(graph_kind::ErdosRenyi{rng.uniform()}, k, rng);
    const auto p = random_p(k, rng);
    std::vector<double> losses(k);
    for (auto& l : losses) l = rng.uniform();
    const auto q = observation_probs(p, g);
    for (std::size_t i = 0; i < k; ++i) {
      double mean = 0.0, second = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const bool seen = j == i || g.has_arc(j, i);
        const double est = iw_estimate(losses[i], seen, q[i]);
        mean += p[j] * est;
        second += p[j] * est * est;
      }
      CHECK(std::abs(mean - losses[i]) <= 1e-12);
      CHECK(second <= 1.0 / q[i] + 1e-12);
    }
  }
}
