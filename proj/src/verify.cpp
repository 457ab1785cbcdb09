#include "fgb/verify.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fgb/errors.hpp"
#include "fgb/estimators.hpp"
#include "fgb/lp.hpp"
#include "fgb/policies.hpp"
#include "text_util.hpp"

namespace fgb {
namespace oracle {
namespace {

using Mask = std::uint32_t;

void require_small(const FeedbackGraph& g, std::size_t cap, const char* what) {
  if (g.k() > cap) {
    throw CapacityExceeded(std::string(what) + " oracle supports k <= " + std::to_string(cap));
  }
}

// masks[i] holds the nodes j with (j -> i) when `incoming`, else (i -> j).
std::vector<Mask> arc_masks(const FeedbackGraph& g, bool incoming) {
  std::vector<Mask> masks(g.k(), 0);
  for (std::size_t i = 0; i < g.k(); ++i) {
    for (std::size_t j = 0; j < g.k(); ++j) {
      if (i != j && (incoming ? g.has_arc(j, i) : g.has_arc(i, j))) masks[i] |= Mask{1} << j;
    }
  }
  return masks;
}

}  // namespace

std::size_t independence_number(const FeedbackGraph& g) {
  require_small(g, 24, "independence");
  const auto out = arc_masks(g, false);
  const auto in = arc_masks(g, true);
  const std::size_t k = g.k();
  int best = 0;
  for (Mask s = 0; s < (Mask{1} << k); ++s) {
    const int size = std::popcount(s);
    if (size <= best) continue;
    bool independent = true;
    for (std::size_t i = 0; i < k && independent; ++i) {
      if ((s >> i & 1) && ((out[i] | in[i]) & s)) independent = false;
    }
    if (independent) best = size;
  }
  return static_cast<std::size_t>(best);
}

std::size_t domination_number(const FeedbackGraph& g) {
  require_small(g, 24, "domination");
  const auto out = arc_masks(g, false);
  const std::size_t k = g.k();
  const Mask full = (Mask{1} << k) - 1;
  std::vector<Mask> covered(std::size_t{1} << k, 0);
  int best = static_cast<int>(k);
  for (Mask s = 1; s <= full; ++s) {
    const int low = std::countr_zero(s);
    covered[s] = covered[s & (s - 1)] | out[low] | (Mask{1} << low);
    if (covered[s] == full) best = std::min(best, std::popcount(s));
  }
  return static_cast<std::size_t>(best);
}

std::size_t mas_size(const FeedbackGraph& g) {
  require_small(g, 20, "mas");
  const auto in = arc_masks(g, true);
  const std::size_t k = g.k();
  auto acyclic = [&](Mask s) {
    Mask remaining = s;
    bool progress = true;
    while (remaining && progress) {
      progress = false;
      for (std::size_t i = 0; i < k; ++i) {
        if ((remaining >> i & 1) && !(in[i] & remaining)) {
          remaining &= ~(Mask{1} << i);
          progress = true;
        }
      }
    }
    return remaining == 0;
  };
  std::vector<std::vector<Mask>> by_size(k + 1);
  for (Mask s = 0; s < (Mask{1} << k); ++s) by_size[std::popcount(s)].push_back(s);
  for (std::size_t size = k; size > 0; --size) {
    for (Mask s : by_size[size]) {
      if (acyclic(s)) return size;
    }
  }
  return 0;
}

double maxmin_lp_value(const FeedbackGraph& g) {
  require_small(g, 10, "LP");
  const std::size_t k = g.k();
  const std::size_t n = k + 1;  // s_0..s_{k-1}, t
  // Inequality rows a . x >= 0: coverage_i - t for i < k, then s_j.
  std::vector<std::vector<double>> rows(2 * k, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i || g.has_arc(j, i)) rows[i][j] = 1.0;
    }
    rows[i][k] = -1.0;
    rows[k + i][i] = 1.0;
  }

  double best = -1.0;
  std::vector<std::size_t> pick(k);
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    // Active set: k chosen inequalities at equality plus sum s = 1.
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t c = 0; c < n; ++c) a[r][c] = rows[pick[r]][c];
    }
    for (std::size_t c = 0; c < k; ++c) a[k][c] = 1.0;
    a[k][n] = 1.0;

    bool singular = false;
    for (std::size_t col = 0; col < n && !singular; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < n; ++r) {
        if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
      }
      if (std::abs(a[piv][col]) < 1e-10) {
        singular = true;
        break;
      }
      std::swap(a[piv], a[col]);
      for (std::size_t r = 0; r < n; ++r) {
        if (r == col) continue;
        const double f = a[r][col] / a[col][col];
        if (f == 0.0) continue;
        for (std::size_t c = col; c <= n; ++c) a[r][c] -= f * a[col][c];
      }
    }
    if (!singular) {
      std::vector<double> x(n);
      for (std::size_t r = 0; r < n; ++r) x[r] = a[r][n] / a[r][r];
      bool feasible = true;
      for (const auto& row : rows) {
        double v = 0.0;
        for (std::size_t c = 0; c < n; ++c) v += row[c] * x[c];
        if (v < -1e-9) feasible = false;
      }
      if (feasible) best = std::max(best, x[k]);
    }

    // Next k-combination of 2k rows in lexicographic order.
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == k + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  if (best < 0.0) throw SolverFailure("LP oracle found no feasible vertex");
  return best;
}

}  // namespace oracle

namespace {

std::vector<double> random_positive_distribution(std::size_t k, SplitMix64& rng) {
  std::vector<double> p(k);
  if (rng.bernoulli(0.25)) {
    // Geometric masses on a random order, the shape that makes exposure large.
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = k; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t r = 0; r < k; ++r) p[order[r]] = std::ldexp(1.0, -static_cast<int>(r + 1));
  } else {
    const double spread = 8.0 * rng.uniform();
    for (auto& v : p) v = std::exp(spread * rng.uniform());
  }
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& v : p) v /= total;
  return p;
}

std::string describe(const FeedbackGraph& g, std::initializer_list<std::pair<const char*, std::span<const double>>> extras) {
  std::string text = to_graph_text(g);
  for (const auto& [name, values] : extras) {
    text += "# ";
    text += name;
    for (double v : values) text += " " + detail::format_double(v);
    text += '\n';
  }
  return text;
}

class SlackLog {
 public:
  explicit SlackLog(CheckReport& report) : report_(report) {}

  // Records bound - quantity; a failure when below -kCheckTolerance.
  bool record(double bound, double quantity, const std::string& what,
              const std::function<std::string()>& instance) {
    const double slack = bound - quantity;
    if (first_) {
      report_.max_slack = report_.min_slack = slack;
      first_ = false;
    } else {
      report_.max_slack = std::max(report_.max_slack, slack);
      report_.min_slack = std::min(report_.min_slack, slack);
    }
    if (slack >= -kCheckTolerance) return true;
    std::ostringstream detail;
    detail.precision(17);
    detail << what << ": quantity " << quantity << " exceeds bound " << bound;
    report_.failures.push_back({instance(), detail.str()});
    return false;
  }

 private:
  CheckReport& report_;
  bool first_ = true;
};

void require_max_k(std::size_t max_k, std::size_t cap, const char* suite) {
  if (max_k == 0 || max_k > cap) {
    throw InvalidParameter(std::string(suite) + " suite needs 1 <= max_k <= " + std::to_string(cap));
  }
}

// q computed straight from arcs, independent of observation_probs.
std::vector<double> closed_in_mass(const FeedbackGraph& g, std::span<const double> p) {
  std::vector<double> q(g.k(), 0.0);
  for (std::size_t i = 0; i < g.k(); ++i) {
    for (std::size_t j = 0; j < g.k(); ++j) {
      if (j == i || g.has_arc(j, i)) q[i] += p[j];
    }
  }
  return q;
}

}  // namespace

FeedbackGraph suite_graph(std::size_t trial, std::size_t max_k, SplitMix64& rng) {
  constexpr std::size_t kFamilies = 6;
  if (trial < 2 * kFamilies) {
    const std::size_t k = trial < kFamilies ? max_k : max_k / 2 + 1;
    switch (trial % kFamilies) {
      case 0: return generate(graph_kind::Clique{}, k, rng);
      case 1: return generate(graph_kind::Empty{}, k, rng);
      case 2: return generate(graph_kind::TotalOrder{}, k, rng);
      case 3: return make_star(k, 0);
      case 4: return make_cycle(k, false);
      default: return make_cycle(k, true);
    }
  }
  const std::size_t k = 1 + rng.below(max_k);
  const double r = static_cast<double>(1 + rng.below(9)) / 10.0;
  return generate(graph_kind::ErdosRenyi{r}, k, rng);
}

CheckReport check_exposure_vs_mas(std::size_t trials, std::size_t max_k, SplitMix64& rng) {
  require_max_k(max_k, 12, "exposure");
  CheckReport report{"exposure", trials, {}, 0.0, 0.0};
  SlackLog log(report);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto g = suite_graph(t, max_k, rng);
    const auto p = random_positive_distribution(g.k(), rng);
    const auto bound = static_cast<double>(oracle::mas_size(g));
    log.record(bound, exposure(p, g), "exposure vs mas",
               [&] { return describe(g, {{"p", p}}); });
  }
  return report;
}

CheckReport check_indegree_sum(std::size_t trials, std::size_t max_k, SplitMix64& rng) {
  require_max_k(max_k, 16, "indegree");
  CheckReport report{"indegree", trials, {}, 0.0, 0.0};
  SlackLog log(report);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto g = suite_graph(t, max_k, rng);
    double sum = 0.0;
    for (std::size_t i = 0; i < g.k(); ++i) sum += 1.0 / (1.0 + static_cast<double>(g.in_degree(i)));
    const auto alpha = static_cast<double>(oracle::independence_number(g));
    const double bound = 2.0 * alpha * std::log(1.0 + static_cast<double>(g.k()) / alpha);
    log.record(bound, sum, "indegree sum", [&] { return describe(g, {}); });
  }
  return report;
}

CheckReport check_greedy_cover(std::size_t trials, std::size_t max_k, SplitMix64& rng) {
  require_max_k(max_k, 16, "cover");
  CheckReport report{"cover", trials, {}, 0.0, 0.0};
  SlackLog log(report);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto g = suite_graph(t, max_k, rng);
    const auto cover = greedy_dominating_set(g);
    // Domination is checked against the arcs directly.
    std::vector<bool> seen(g.k(), false);
    for (Action a : cover) {
      seen[a] = true;
      for (std::size_t j = 0; j < g.k(); ++j) {
        if (g.has_arc(a, j)) seen[j] = true;
      }
    }
    if (std::count(seen.begin(), seen.end(), false) != 0) {
      report.failures.push_back({describe(g, {}), "greedy set does not dominate"});
    }
    const double k = static_cast<double>(g.k());
    const auto gamma = static_cast<double>(oracle::domination_number(g));
    const auto alpha = static_cast<double>(oracle::independence_number(g));
    const double bound =
        std::min(gamma * (1.0 + std::log(k)), std::ceil(2.0 * alpha * std::log(k)) + 1.0);
    log.record(bound, static_cast<double>(cover.size()), "greedy cover size",
               [&] { return describe(g, {}); });
  }
  return report;
}

CheckReport check_weighted_bound(std::size_t trials, std::size_t max_k, SplitMix64& rng) {
  require_max_k(max_k, 12, "weighted");
  CheckReport report{"weighted", trials, {}, 0.0, 0.0};
  SlackLog log(report);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto g = suite_graph(t, max_k, rng);
    const std::size_t k = g.k();
    const auto cover = greedy_dominating_set(g);
    const double r = static_cast<double>(cover.size());
    // beta in (0, 1/(2r)]; 1 - uniform() lies in (0, 1].
    const double beta = (1.0 - rng.uniform()) / (2.0 * r);
    // beta on every cover node, the remaining mass spread by a random positive distribution.
    const auto rest = random_positive_distribution(k, rng);
    std::vector<double> p(k, 0.0);
    for (Action a : cover) p[a] = beta;
    const double spare = 1.0 - r * beta;
    for (std::size_t i = 0; i < k; ++i) p[i] += spare * rest[i];

    const auto alpha = static_cast<double>(oracle::independence_number(g));
    const double kd = static_cast<double>(k);
    const double bound =
        2.0 * alpha * std::log(1.0 + (std::ceil(kd * kd / (r * beta)) + kd) / alpha) + 2.0 * r;
    const std::vector<double> extra{beta};
    log.record(bound, exposure(p, g), "weighted exposure",
               [&] { return describe(g, {{"p", p}, {"beta", extra}}); });
  }
  return report;
}

CheckReport check_elp_inequalities(std::size_t trials, std::size_t max_k, SplitMix64& rng) {
  require_max_k(max_k, 12, "elp");
  CheckReport report{"elp", trials, {}, 0.0, 0.0};
  SlackLog log(report);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto g = suite_graph(t, max_k, rng);
    const std::size_t k = g.k();
    const double scale = 10.0 * rng.uniform();
    std::vector<double> log_weights(k);
    for (auto& w : log_weights) w = scale * (2.0 * rng.uniform() - 1.0);
    const double delta = 0.01 + 0.49 * rng.uniform();
    // eta in (0, 1/(3k)], shrunk until beta <= 1/4 and gamma <= 1/2 hold.
    double eta = (1.0 - rng.uniform()) / (3.0 * static_cast<double>(k));
    const auto lp = solve_maxmin_coverage(g);
    double beta = ElpP::beta_for(k, delta, eta);
    while (beta > 0.25 || (1.0 + beta) * eta / lp.value > 0.5) {
      eta /= 2.0;
      beta = ElpP::beta_for(k, delta, eta);
    }
    const auto mix = elpp_mixture(log_weights, lp, eta, beta);
    const auto& p = mix.p;
    const double gamma = mix.gamma;
    const auto q = closed_in_mass(g, p);
    const auto mas = static_cast<double>(oracle::mas_size(g));

    double item1 = 0.0, item2 = 0.0, item3 = 0.0, item4 = 0.0, item5 = 0.0;
    for (std::size_t i = 0; i < k; ++i) item1 += p[i] / (q[i] * q[i]);
    for (std::size_t i = 0; i < k; ++i) {
      double first = 0.0, second = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        if (j != i && !g.has_arc(i, j)) continue;
        first += p[j] / q[j];
        second += p[j] / (q[j] * q[j]);
      }
      item2 += p[i] * first;
      item3 += p[i] * second;
      item4 += p[i] * first * first;
      item5 += p[i] * second * second;
    }
    const std::vector<double> params{eta, beta, delta, gamma};
    auto instance = [&] { return describe(g, {{"p", p}, {"s", mix.s}, {"eta beta delta gamma", params}}); };
    log.record(mas * mas / gamma, item1, "item 1", instance);
    if (std::abs(item2 - 1.0) > kCheckTolerance) {
      std::ostringstream detail;
      detail.precision(17);
      detail << "item 2: " << item2 << " differs from 1";
      report.failures.push_back({instance(), detail.str()});
    }
    log.record(mas, item3, "item 3", instance);
    log.record(mas, item4, "item 4", instance);
    log.record(mas * mas * mas / gamma, item5, "item 5", instance);
  }
  return report;
}

CheckReport check_er_expectation(std::size_t k, double r, std::size_t draws, SplitMix64& rng) {
  if (!(r > 0.0 && r <= 1.0)) throw InvalidParameter("er suite needs r in (0, 1]");
  if (k == 0 || draws < 2) throw InvalidParameter("er suite needs k >= 1 and draws >= 2");
  CheckReport report{"er", draws, {}, 0.0, 0.0};
  const auto p = random_positive_distribution(k, rng);
  std::vector<double> sum(k, 0.0), sum_sq(k, 0.0);
  for (std::size_t d = 0; d < draws; ++d) {
    const auto g = generate(graph_kind::ErdosRenyi{r}, k, rng);
    const auto q = observation_probs(p, g);
    for (std::size_t i = 0; i < k; ++i) {
      const double x = p[i] / q[i];
      sum[i] += x;
      sum_sq[i] += x * x;
    }
  }
  const double kd = static_cast<double>(k);
  const double n = static_cast<double>(draws);
  const double target = (1.0 - std::pow(1.0 - r, kd)) / (r * kd);
  SlackLog log(report);
  for (std::size_t i = 0; i < k; ++i) {
    const double mean = sum[i] / n;
    const double var = std::max(0.0, (sum_sq[i] - n * mean * mean) / (n - 1.0));
    const double se = std::sqrt(var / n);
    const std::vector<double> extra{r, static_cast<double>(draws), static_cast<double>(i), mean, target};
    log.record(4.0 * se, std::abs(mean - target), "coordinate " + std::to_string(i),
               [&] {
                 return describe(FeedbackGraph(k), {{"p", p}, {"r draws coordinate mean target", extra}});
               });
  }
  return report;
}

CheckReport check_er_exposure(std::size_t k, double r, std::size_t draws, SplitMix64& rng) {
  if (!(r > 0.0 && r <= 1.0)) throw InvalidParameter("er suite needs r in (0, 1]");
  if (k == 0 || draws < 2) throw InvalidParameter("er suite needs k >= 1 and draws >= 2");
  CheckReport report{"er-exposure", draws, {}, 0.0, 0.0};
  const auto p = random_positive_distribution(k, rng);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t d = 0; d < draws; ++d) {
    const auto g = generate(graph_kind::ErdosRenyi{r}, k, rng);
    const double x = exposure(p, g) / static_cast<double>(k);
    sum += x;
    sum_sq += x * x;
  }
  const double kd = static_cast<double>(k);
  const double n = static_cast<double>(draws);
  const double target = (1.0 - std::pow(1.0 - r, kd)) / (r * kd);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  const std::vector<double> extra{r, static_cast<double>(draws), mean, target};
  SlackLog log(report);
  log.record(4.0 * std::sqrt(var / n), std::abs(mean - target), "mean exposure / k", [&] {
    return describe(FeedbackGraph(k), {{"p", p}, {"r draws mean target", extra}});
  });
  return report;
}

CheckReport check_lp(std::size_t trials, std::size_t max_k, SplitMix64& rng) {
  require_max_k(max_k, 8, "lp");
  CheckReport report{"lp", trials, {}, 0.0, 0.0};
  SlackLog log(report);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto g = suite_graph(t, max_k, rng);
    const auto solution = solve_maxmin_coverage(g);
    const double reference = oracle::maxmin_lp_value(g);
    const auto gamma = static_cast<double>(oracle::domination_number(g));
    const auto mas = static_cast<double>(oracle::mas_size(g));
    auto instance = [&] { return describe(g, {{"s", solution.s.probs()}}); };
    if (std::abs(solution.value - reference) > 1e-6) {
      std::ostringstream detail;
      detail.precision(17);
      detail << "LP value " << solution.value << " differs from oracle " << reference;
      report.failures.push_back({instance(), detail.str()});
    }
    log.record(gamma, 1.0 / solution.value, "1/value vs gamma", instance);
    if (gamma > mas) report.failures.push_back({instance(), "gamma exceeds mas"});
  }
  return report;
}

}  // namespace fgb
