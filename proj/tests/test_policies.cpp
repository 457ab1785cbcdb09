#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fgb/errors.hpp"
#include "fgb/policies.hpp"

using namespace fgb;

static_assert(UninformedPolicy<Exp3Set>);
static_assert(UninformedPolicy<Hedge>);
static_assert(UninformedPolicy<Exp3>);
static_assert(InformedPolicy<Exp3Dom>);
static_assert(InformedPolicy<ElpP>);
static_assert(!InformedPolicy<Exp3Set>);
static_assert(!UninformedPolicy<Exp3Dom>);
static_assert(!UninformedPolicy<ElpP>);

namespace {

FeedbackGraph make(GraphKind kind, std::size_t k) {
  SplitMix64 rng(1);
  return generate(kind, k, rng);
}

std::vector<double> random_losses(std::size_t k, SplitMix64& rng) {
  std::vector<double> l(k);
  for (auto& v : l) v = rng.uniform();
  return l;
}

template <typename P>
void feed(P& policy, const FeedbackGraph& g, Action a, const std::vector<double>& losses) {
  const auto obs = observe(g, a, losses);
  policy.update(RoundFeedback{a, obs, g});
}

}  // namespace

TEST_CASE("sampling helpers") {
  const std::vector<double> p{0.2, 0.3, 0.5};
  CHECK(sample_inverse_cdf(p, 0.0) == 0);
  CHECK(sample_inverse_cdf(p, 0.1999) == 0);
  CHECK(sample_inverse_cdf(p, 0.2) == 1);
  CHECK(sample_inverse_cdf(p, 0.5) == 2);
  CHECK(sample_inverse_cdf(p, 0.999999999) == 2);
  const std::vector<double> gap{0.5, 0.0, 0.5};
  CHECK(sample_inverse_cdf(gap, 0.5) == 2);
  const std::vector<double> short_sum{0.5, 0.5 - 1e-12, 0.0};
  CHECK(sample_inverse_cdf(short_sum, 1.0 - 1e-14) == 1);

  const std::vector<double> huge{1000.0, 0.0, -1000.0};
  const auto w = softmax(huge);
  CHECK(w[0] == 1.0);
  CHECK(w[1] == doctest::Approx(std::exp(-1000.0)));
  CHECK(w[2] == 0.0);
}

TEST_CASE("learning-rate tuning") {
  CHECK(exp3set_tuned_eta(10, 2e5) == doctest::Approx(std::sqrt(2 * std::log(10.0) / 2e5)));
  CHECK(exp3set_tuned_eta(10, 1.0) == 1.0);
  CHECK(exp3set_tuned_eta(1, 100.0) == 1.0);
  CHECK_THROWS_AS(exp3set_tuned_eta(10, 0.0), InvalidParameter);

  const double l5 = std::log(500.0), l10 = std::log(10.0);
  const double eta = std::sqrt(std::sqrt(l5 * l10) / 6.0 / 1e6);
  CHECK(elpp_tuned_eta(10, 0.1, 1e6) == doctest::Approx(eta).epsilon(1e-14));
  // Short horizons hit the admissible-region cap.
  CHECK(elpp_tuned_eta(10, 0.1, 10.0) == doctest::Approx(1.0 / 30.0));
  CHECK(elpp_tuned_eta(1, 0.1, 10.0) == doctest::Approx(1.0 / 3.0));
  for (double sum : {1.0, 1e2, 1e4, 1e8}) {
    for (std::size_t k : {2, 3, 10, 50}) {
      const double e = elpp_tuned_eta(k, 0.05, sum);
      CHECK_NOTHROW(ElpP(k, 0.05, e));
    }
  }
}

TEST_CASE("Exp3Set") {
  CHECK_THROWS_AS(Exp3Set(4, 0.0), InvalidParameter);
  CHECK_THROWS_AS(Exp3Set(4, 1.5), InvalidParameter);
  CHECK_THROWS_AS(Exp3Set(0, 0.5), InvalidParameter);

  SplitMix64 rng(1);
  Exp3Set fresh(4, 0.1);
  const auto d = fresh.act(rng);
  for (std::size_t i = 0; i < 4; ++i) CHECK(d.p[i] == 0.25);

  SUBCASE("one clique update") {
    Exp3Set p(2, 0.5);
    const auto g = make(graph_kind::Clique{}, 2);
    const auto a = p.act(rng).action;
    feed(p, g, a, {1.0, 0.0});
    const auto next = p.distribution();
    CHECK(next[0] == doctest::Approx(0.37754066879814546).epsilon(1e-15));
    CHECK(next[1] == doctest::Approx(0.62245933120185454).epsilon(1e-15));
  }

  SUBCASE("only observed actions change") {
    Exp3Set p(4, 0.2);
    const std::vector<Arc> arcs{{0, 1}, {2, 3}};
    const FeedbackGraph g(4, arcs);
    SplitMix64 r(3);
    const auto decision = p.act(r);
    feed(p, g, decision.action, {0.5, 0.5, 0.5, 0.5});
    const auto seen = observation_set(g, decision.action);
    const auto q = observation_probs(decision.p.probs(), g);
    for (std::size_t i = 0; i < 4; ++i) {
      const bool observed = std::find(seen.begin(), seen.end(), i) != seen.end();
      CHECK(p.log_weights()[i] == doctest::Approx(observed ? -0.2 * 0.5 / q[i] : 0.0));
    }
    CHECK(p.rounds() == 1);
  }

  SUBCASE("protocol violations") {
    Exp3Set p(3, 0.1);
    const auto g = make(graph_kind::Empty{}, 3);
    const std::vector<double> losses{0.1, 0.2, 0.3};
    CHECK_THROWS_AS(feed(p, g, 0, losses), ProtocolViolation);
    const auto a = p.act(rng).action;
    CHECK_THROWS_AS(feed(p, g, (a + 1) % 3, losses), ProtocolViolation);

    p.act(rng);
    const auto a2 = p.act(rng).action;
    // The observed pairs must match the observation set of the played action.
    const auto clique = make(graph_kind::Clique{}, 3);
    auto obs = observe(clique, a2, losses);
    obs.pop_back();
    CHECK_THROWS_AS(p.update(RoundFeedback{a2, obs, clique}), ProtocolViolation);
    const auto a3 = p.act(rng).action;
    auto reversed = observe(clique, a3, losses);
    std::reverse(reversed.begin(), reversed.end());
    CHECK_THROWS_AS(p.update(RoundFeedback{a3, reversed, clique}), ProtocolViolation);
    const auto a4 = p.act(rng).action;
    const auto wrong_k = make(graph_kind::Empty{}, 4);
    const std::vector<double> four{0.1, 0.2, 0.3, 0.4};
    CHECK_THROWS_AS(feed(p, wrong_k, a4, four), ProtocolViolation);
    const auto a5 = p.act(rng).action;
    std::vector<Observation> bad{{a5, 1.5}};
    CHECK_THROWS_AS(p.update(RoundFeedback{a5, bad, g}), ProtocolViolation);
  }
}

TEST_CASE("Hedge and Exp3 baselines") {
  SplitMix64 rng(2);
  Hedge h(2, 0.3);
  const auto clique = make(graph_kind::Clique{}, 2);
  feed(h, clique, h.act(rng).action, {1.0, 0.0});
  CHECK(h.log_weights()[0] == doctest::Approx(-0.3));
  CHECK(h.log_weights()[1] == 0.0);
  const auto hp = softmax(h.log_weights());
  CHECK(hp[0] / hp[1] == doctest::Approx(std::exp(-0.3)));

  Hedge partial(2, 0.3);
  const auto a = partial.act(rng).action;
  CHECK_THROWS_AS(feed(partial, make(graph_kind::Empty{}, 2), a, {1.0, 0.0}), ProtocolViolation);

  // Exp3 playing arm 0 from the uniform start with loss 1: estimates (2, 0).
  Exp3 e(2, 0.1);
  SplitMix64 low(0);
  Action played = 2;
  while (played != 0) {
    Exp3 probe(2, 0.1);
    SplitMix64 copy = low;
    played = probe.act(copy).action;
    if (played != 0) low = SplitMix64(low.state() + 1);
  }
  CHECK(e.act(low).action == 0);
  feed(e, make(graph_kind::Empty{}, 2), 0, {1.0, 0.3});
  CHECK(e.last_estimates()[0] == doctest::Approx(2.0));
  CHECK(e.last_estimates()[1] == 0.0);
  CHECK(e.log_weights()[0] == doctest::Approx(-0.2));
}

TEST_CASE("Exp3Set reduces to Hedge on cliques and to Exp3 on empty graphs") {
  const std::size_t k = 6;
  SplitMix64 loss_rng(99);
  std::vector<std::vector<double>> losses;
  for (int t = 0; t < 3000; ++t) losses.push_back(random_losses(k, loss_rng));

  const auto clique = make(graph_kind::Clique{}, k);
  Exp3Set set(k, 0.05);
  Hedge hedge(k, 0.05);
  SplitMix64 r1(5), r2(5);
  for (const auto& l : losses) {
    const auto a = set.act(r1);
    const auto b = hedge.act(r2);
    REQUIRE(a.action == b.action);
    // q = sum of p is 1 only up to rounding on the clique.
    for (std::size_t i = 0; i < k; ++i) REQUIRE(std::abs(a.p[i] - b.p[i]) <= 1e-12);
    feed(set, clique, a.action, l);
    feed(hedge, clique, b.action, l);
  }

  const auto empty = make(graph_kind::Empty{}, k);
  Exp3Set set2(k, 0.05);
  Exp3 exp3(k, 0.05);
  SplitMix64 r3(6), r4(6);
  for (const auto& l : losses) {
    const auto a = set2.act(r3);
    const auto b = exp3.act(r4);
    REQUIRE(a.action == b.action);
    REQUIRE(a.p == b.p);
    feed(set2, empty, a.action, l);
    feed(exp3, empty, b.action, l);
  }
}

TEST_CASE("log-space weights track the multiplicative recurrence") {
  const std::size_t k = 5;
  const double eta = 0.01;
  Exp3Set p(k, eta);
  SplitMix64 rng(8);
  std::vector<long double> reference(k, 0.0L);
  for (int t = 0; t < 100000; ++t) {
    const auto g = generate(graph_kind::ErdosRenyi{0.6}, k, rng);
    const auto losses = random_losses(k, rng);
    const auto d = p.act(rng);
    const auto q = observation_probs(d.p.probs(), g);
    for (Action i : observation_set(g, d.action)) {
      reference[i] -= static_cast<long double>(eta) * losses[i] / q[i];
    }
    feed(p, g, d.action, losses);
  }
  for (std::size_t i = 0; i < k; ++i) {
    const double rel = std::abs(std::expm1(p.log_weights()[i] - static_cast<double>(reference[i])));
    CHECK(rel <= 1e-10);
  }
}

TEST_CASE("Exp3Dom construction") {
  CHECK(Exp3Dom::band_count(8) == 4);
  CHECK(Exp3Dom::band_count(7) == 3);
  CHECK(Exp3Dom::band_count(1) == 1);
  CHECK(Exp3Dom::band_of(1) == 0);
  CHECK(Exp3Dom::band_of(5) == 2);
  CHECK(Exp3Dom::band_of(8) == 3);
  CHECK_THROWS_AS(Exp3Dom::band_of(0), InvalidParameter);

  // sqrt(ln 8) = 1.442 at level 0 is clamped.
  const auto d = Exp3Dom::with_doubling(8);
  CHECK(d.bands().size() == 4);
  CHECK(d.bands()[0].gamma == 1.0);
  CHECK(Exp3Dom::doubling_gamma(8, 0, 2) == doctest::Approx(std::sqrt(std::log(8.0) / 4.0)));
  CHECK(Exp3Dom::doubling_gamma(8, 1, 5) == doctest::Approx(std::sqrt(2 * std::log(8.0) / 32.0)));
  CHECK(Exp3Dom::doubling_gamma(1, 0, 9) == 1.0);

  CHECK_THROWS_AS(Exp3Dom::with_fixed_gammas(8, {0.0, 0.5, 0.5, 0.5}), InvalidParameter);
  CHECK_THROWS_AS(Exp3Dom::with_fixed_gammas(8, {0.5, 0.5, 0.5}), InvalidParameter);
  CHECK_THROWS_AS(Exp3Dom::with_fixed_gammas(8, {1.5, 0.5, 0.5, 0.5}), InvalidParameter);
}

TEST_CASE("Exp3Dom act") {
  SplitMix64 rng(4);
  auto clique = Exp3Dom::with_fixed_gammas(2, {0.1, 0.1});
  const auto d = clique.act(make(graph_kind::Clique{}, 2), rng);
  CHECK(d.band == 0);
  CHECK(d.dominating_set == std::vector<Action>{0});
  CHECK(d.p[0] == doctest::Approx(0.55).epsilon(1e-15));
  CHECK(d.p[1] == doctest::Approx(0.45).epsilon(1e-15));

  auto order = Exp3Dom::with_fixed_gammas(6, {0.2, 0.3, 0.4});
  const auto o = order.act(make(graph_kind::TotalOrder{}, 6), rng);
  CHECK(o.band == 0);
  CHECK(o.dominating_set == std::vector<Action>{5});
  CHECK(o.p[5] == doctest::Approx(0.8 / 6 + 0.2));
  CHECK(o.p[0] == doctest::Approx(0.8 / 6));

  auto empty = Exp3Dom::with_fixed_gammas(6, {0.2, 0.3, 0.4});
  const auto e = empty.act(make(graph_kind::Empty{}, 6), rng);
  CHECK(e.band == 2);
  CHECK(e.p[0] == doctest::Approx(1.0 / 6));
}

TEST_CASE("Exp3Dom update touches one band") {
  const std::size_t k = 8;
  auto policy = Exp3Dom::with_fixed_gammas(k, {0.3, 0.3, 0.3, 0.3});
  SplitMix64 rng(10);
  for (int t = 0; t < 500; ++t) {
    const auto g = generate(graph_kind::ErdosRenyi{rng.uniform()}, k, rng);
    const auto losses = random_losses(k, rng);
    std::vector<std::vector<double>> before;
    for (const auto& b : policy.bands()) before.push_back(b.log_weights);
    std::vector<std::size_t> updates;
    for (const auto& b : policy.bands()) updates.push_back(b.updates);

    const auto d = policy.act(g, rng);
    CHECK(is_dominating(g, d.dominating_set));
    const double share = policy.bands()[d.band].gamma / static_cast<double>(d.dominating_set.size());
    for (Action r : d.dominating_set) CHECK(d.p[r] >= share - 1e-15);
    feed(policy, g, d.action, losses);

    std::size_t changed = 0;
    for (std::size_t b = 0; b < policy.bands().size(); ++b) {
      const bool touched = policy.bands()[b].updates != updates[b];
      changed += touched;
      if (!touched) CHECK(policy.bands()[b].log_weights == before[b]);
    }
    CHECK(changed == 1);

    // Unobserved actions keep their weight.
    const auto seen = observation_set(g, d.action);
    for (std::size_t i = 0; i < k; ++i) {
      if (std::find(seen.begin(), seen.end(), i) == seen.end()) {
        CHECK(policy.bands()[d.band].log_weights[i] == before[d.band][i]);
      }
    }
  }
}

TEST_CASE("Exp3Dom doubling schedule on cliques") {
  // Q = 1 on a clique, so the band-0 accumulator grows by 1.5 per round and
  // level r lasts ceil(2^r / 1.5) rounds.
  const std::size_t k = 4;
  auto policy = Exp3Dom::with_doubling(k);
  const auto g = make(graph_kind::Clique{}, k);
  SplitMix64 rng(12);
  std::vector<unsigned> expected_level;
  for (unsigned r = 0; expected_level.size() < 300; ++r) {
    const auto rounds = static_cast<std::size_t>(std::ceil(std::ldexp(1.0, static_cast<int>(r)) / 1.5));
    for (std::size_t n = 0; n < rounds; ++n) expected_level.push_back(r);
  }
  for (std::size_t t = 0; t < 300; ++t) {
    const auto& band = policy.bands()[0];
    REQUIRE(band.level == expected_level[t]);
    CHECK(band.gamma == Exp3Dom::doubling_gamma(k, 0, band.level));
    CHECK(band.accumulator <= std::ldexp(1.0, static_cast<int>(band.level)));
    const auto d = policy.act(g, rng);
    feed(policy, g, d.action, {0.1, 0.9, 0.5, 0.5});
  }
  CHECK(policy.bands()[1].updates == 0);
  CHECK(policy.bands()[2].updates == 0);
  CHECK(policy.bands()[0].restarts == policy.bands()[0].level);
}

TEST_CASE("ElpP construction") {
  CHECK(ElpP::beta_for(10, 0.1, 0.01) == doctest::Approx(0.032857084498391021).epsilon(1e-14));
  CHECK(ElpP::beta_for(1, 0.1, 0.2) == 0.0);
  CHECK_NOTHROW(ElpP(10, 0.1, 1.0 / 30.0 * 0.5));
  CHECK_THROWS_AS(ElpP(10, 0.1, 1.0 / 30.0 + 1e-9), InvalidParameter);
  CHECK_THROWS_AS(ElpP(10, 0.0, 0.01), InvalidParameter);
  CHECK_THROWS_AS(ElpP(10, 1.0, 0.01), InvalidParameter);
  CHECK_THROWS_AS(ElpP(2, 0.1, 1.0 / 6.0), InvalidParameter);  // beta about 0.86
  const ElpP p(10, 0.1, 0.01);
  CHECK(p.beta() == ElpP::beta_for(10, 0.1, 0.01));
}

TEST_CASE("ElpP act") {
  SplitMix64 rng(6);
  ElpP empty(10, 0.1, 0.01);
  const auto d = empty.act(make(graph_kind::Empty{}, 10), rng);
  CHECK(d.gamma == doctest::Approx(0.10328570844983910).epsilon(1e-13));
  for (std::size_t i = 0; i < 10; ++i) CHECK(d.p[i] == doctest::Approx(0.1).epsilon(1e-14));

  ElpP clique(5, 0.1, 0.02);
  const auto c = clique.act(make(graph_kind::Clique{}, 5), rng);
  CHECK(c.gamma == doctest::Approx((1 + clique.beta()) * 0.02).epsilon(1e-14));

  // Mixing at the first round with uniform weights.
  ElpP star(4, 0.2, 0.05);
  const auto s = star.act(make_star(4, 1), rng);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(s.p[i] == doctest::Approx((1 - s.gamma) / 4 + s.gamma * s.s[i]).epsilon(1e-14));
    CHECK(s.p[i] >= s.gamma * s.s[i] - 1e-15);
  }
  CHECK(s.s[1] == 1.0);

  MaxMinSolution tiny{Distribution::uniform(2), 0.01, {0.01, 0.01}, 0};
  const std::vector<double> w{0.0, 0.0};
  CHECK_THROWS_AS(elpp_mixture(w, tiny, 0.1, 0.0), ConfigurationError);
}

TEST_CASE("ElpP update") {
  SplitMix64 rng(7);
  const double eta = 0.01, delta = 0.1;
  ElpP clique(2, delta, eta);
  const double beta = clique.beta();
  const auto d = clique.act(make(graph_kind::Clique{}, 2), rng);
  feed(clique, make(graph_kind::Clique{}, 2), d.action, {1.0, 0.25});
  CHECK(clique.log_weights()[0] == doctest::Approx(eta * (0.0 + beta)).epsilon(1e-14));
  CHECK(clique.log_weights()[1] == doctest::Approx(eta * (0.75 + beta)).epsilon(1e-14));

  // On an empty graph the unplayed action gets the bias term only.
  ElpP empty(2, delta, eta);
  const auto e = empty.act(make(graph_kind::Empty{}, 2), rng);
  feed(empty, make(graph_kind::Empty{}, 2), e.action, {0.5, 0.5});
  const Action other = 1 - e.action;
  CHECK(empty.log_weights()[other] == doctest::Approx(eta * beta / e.p[other]).epsilon(1e-14));
  CHECK(empty.log_weights()[e.action] ==
        doctest::Approx(eta * (0.5 + beta) / e.p[e.action]).epsilon(1e-14));

  // Observed with loss 1 and q = 1/2: eta * (0 + beta) / q.
  CHECK(0.01 * iw_estimate(0.0, true, 0.5, 0.02) == doctest::Approx(0.0004).epsilon(1e-14));
}

TEST_CASE("ElpP keeps every q above (1 + beta) eta") {
  const std::size_t k = 8;
  const double eta = elpp_tuned_eta(k, 0.1, 8.0 * 2000);
  ElpP p(k, 0.1, eta);
  SplitMix64 rng(11);
  for (int t = 0; t < 2000; ++t) {
    const auto g = generate(graph_kind::ErdosRenyi{0.3}, k, rng);
    const auto d = p.act(g, rng);
    CHECK(d.gamma <= 0.5);
    feed(p, g, d.action, random_losses(k, rng));
    for (double q : p.last_q()) REQUIRE(q >= (1 + p.beta()) * eta * (1 - 1e-12));
    double largest = 0.0;
    for (double q : p.last_q()) largest = std::max(largest, eta * (1.0 + p.beta()) / q);
    CHECK(largest <= 1.0 + 1e-12);
  }
}
