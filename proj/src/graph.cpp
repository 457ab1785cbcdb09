#include "fgb/graph.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fgb/errors.hpp"
#include "text_util.hpp"

namespace fgb {
namespace {

constexpr std::size_t kWordBits = 64;

std::size_t words_for(std::size_t k) { return (k + kWordBits - 1) / kWordBits; }

void set_bit(std::span<std::uint64_t> row, std::size_t j) {
  row[j / kWordBits] |= std::uint64_t{1} << (j % kWordBits);
}

bool test_bit(std::span<const std::uint64_t> row, std::size_t j) {
  return (row[j / kWordBits] >> (j % kWordBits)) & 1U;
}

std::size_t popcount(std::span<const std::uint64_t> row) {
  std::size_t n = 0;
  for (auto w : row) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

template <typename F>
void for_each_bit(std::span<const std::uint64_t> row, F&& f) {
  for (std::size_t w = 0; w < row.size(); ++w) {
    std::uint64_t bits = row[w];
    while (bits != 0) {
      const auto b = static_cast<std::size_t>(std::countr_zero(bits));
      f(w * kWordBits + b);
      bits &= bits - 1;
    }
  }
}

void require_k(std::size_t k) {
  if (k == 0) throw InvalidParameter("graph needs at least one action (k = 0)");
}

void require_cap(std::size_t k, std::size_t cap, const char* what) {
  if (k > cap) {
    throw CapacityExceeded(std::string(what) + ": k = " + std::to_string(k) +
                           " exceeds cap " + std::to_string(cap));
  }
}

// Single-word skeleton adjacency for k <= 64.
std::vector<std::uint64_t> skeleton_masks(const FeedbackGraph& g) {
  std::vector<std::uint64_t> adj(g.k());
  for (Action i = 0; i < g.k(); ++i) adj[i] = g.out_row(i)[0] | g.in_row(i)[0];
  return adj;
}

std::uint64_t bit(std::size_t i) { return std::uint64_t{1} << i; }

std::size_t clique_cover_bound(std::uint64_t cand, const std::vector<std::uint64_t>& adj) {
  std::size_t cliques = 0;
  while (cand != 0) {
    const auto v = static_cast<std::size_t>(std::countr_zero(cand));
    std::uint64_t clique = bit(v);
    std::uint64_t ext = cand & adj[v];
    while (ext != 0) {
      const auto u = static_cast<std::size_t>(std::countr_zero(ext));
      clique |= bit(u);
      ext &= adj[u];
    }
    cand &= ~clique;
    ++cliques;
  }
  return cliques;
}

struct MisSearch {
  const std::vector<std::uint64_t>& adj;
  std::uint64_t best_set = 0;
  std::size_t best = 0;

  void run(std::uint64_t cand, std::uint64_t current, std::size_t size) {
    while (true) {
      if (cand == 0) {
        if (size > best) {
          best = size;
          best_set = current;
        }
        return;
      }
      if (size + static_cast<std::size_t>(std::popcount(cand)) <= best) return;
      // Nodes of degree <= 1 inside cand belong to some maximum set.
      std::size_t min_v = 0, max_v = 0;
      int min_deg = 65, max_deg = -1;
      for (std::uint64_t c = cand; c != 0; c &= c - 1) {
        const auto v = static_cast<std::size_t>(std::countr_zero(c));
        const int d = std::popcount(adj[v] & cand);
        if (d < min_deg) min_deg = d, min_v = v;
        if (d > max_deg) max_deg = d, max_v = v;
      }
      if (min_deg <= 1) {
        cand &= ~(adj[min_v] | bit(min_v));
        current |= bit(min_v);
        ++size;
        continue;
      }
      if (size + clique_cover_bound(cand, adj) <= best) return;
      run(cand & ~(adj[max_v] | bit(max_v)), current | bit(max_v), size + 1);
      cand &= ~bit(max_v);
    }
  }
};

}  // namespace

FeedbackGraph::FeedbackGraph(std::size_t k)
    : k_(k), words_(words_for(k)), out_(k * words_for(k), 0), in_(k * words_for(k), 0) {
  require_k(k);
}

FeedbackGraph::FeedbackGraph(std::size_t k, std::span<const Arc> arcs) : FeedbackGraph(k) {
  for (const auto& [from, to] : arcs) {
    if (from >= k || to >= k) {
      throw InvalidParameter("arc (" + std::to_string(from) + ", " + std::to_string(to) +
                             ") out of range for k = " + std::to_string(k));
    }
    if (from == to) {
      throw InvalidParameter("self-arc on " + std::to_string(from) +
                             " (self-observation is implicit)");
    }
    std::span<std::uint64_t> out_row{out_.data() + from * words_, words_};
    if (test_bit(out_row, to)) {
      throw InvalidParameter("duplicate arc (" + std::to_string(from) + ", " +
                             std::to_string(to) + ")");
    }
    set_bit(out_row, to);
    set_bit(std::span<std::uint64_t>{in_.data() + to * words_, words_}, from);
    ++arc_count_;
  }
}

bool FeedbackGraph::has_arc(Action from, Action to) const {
  if (from >= k_ || to >= k_) throw InvalidParameter("action index out of range");
  return test_bit(out_row(from), to);
}

std::size_t FeedbackGraph::out_degree(Action i) const { return popcount(out_row(i)); }
std::size_t FeedbackGraph::in_degree(Action i) const { return popcount(in_row(i)); }

std::vector<Arc> FeedbackGraph::arcs() const {
  std::vector<Arc> result;
  result.reserve(arc_count_);
  for (Action i = 0; i < k_; ++i) {
    for_each_bit(out_row(i), [&](std::size_t j) { result.emplace_back(i, j); });
  }
  return result;
}

bool FeedbackGraph::is_symmetric() const { return out_ == in_; }

FeedbackGraph generate(const GraphKind& kind, std::size_t k, SplitMix64& rng) {
  require_k(k);
  std::vector<Arc> arcs;
  if (std::holds_alternative<graph_kind::Clique>(kind)) {
    for (Action i = 0; i < k; ++i)
      for (Action j = 0; j < k; ++j)
        if (i != j) arcs.emplace_back(i, j);
  } else if (std::holds_alternative<graph_kind::Empty>(kind)) {
  } else if (std::holds_alternative<graph_kind::TotalOrder>(kind)) {
    for (Action j = 0; j < k; ++j)
      for (Action i = 0; i < j; ++i) arcs.emplace_back(j, i);
  } else if (const auto* er = std::get_if<graph_kind::ErdosRenyi>(&kind)) {
    if (!(er->r >= 0.0 && er->r <= 1.0)) {
      throw InvalidParameter("Erdos-Renyi density r must lie in [0, 1]");
    }
    for (Action i = 0; i < k; ++i)
      for (Action j = 0; j < k; ++j)
        if (i != j && rng.uniform() < er->r) arcs.emplace_back(i, j);
  } else if (const auto* sym = std::get_if<graph_kind::Symmetric>(&kind)) {
    for (const auto& [a, b] : sym->edges) {
      arcs.emplace_back(a, b);
      arcs.emplace_back(b, a);
    }
  } else {
    arcs = std::get<graph_kind::Explicit>(kind).arcs;
  }
  return FeedbackGraph(k, arcs);
}

FeedbackGraph make_star(std::size_t k, Action center) {
  require_k(k);
  if (center >= k) throw InvalidParameter("star center out of range");
  std::vector<Arc> arcs;
  for (Action j = 0; j < k; ++j)
    if (j != center) arcs.emplace_back(center, j);
  return FeedbackGraph(k, arcs);
}

FeedbackGraph make_cycle(std::size_t k, bool symmetric) {
  require_k(k);
  std::vector<Arc> arcs;
  if (k >= 2) {
    for (Action i = 0; i < k; ++i) {
      const Action j = (i + 1) % k;
      arcs.emplace_back(i, j);
      if (symmetric && k > 2) arcs.emplace_back(j, i);
    }
  }
  return FeedbackGraph(k, arcs);
}

std::vector<Action> observation_set(const FeedbackGraph& g, Action i) {
  if (i >= g.k()) {
    throw InvalidParameter("action " + std::to_string(i) + " out of range for k = " +
                           std::to_string(g.k()));
  }
  std::vector<Action> result;
  bool self_done = false;
  for_each_bit(g.out_row(i), [&](std::size_t j) {
    if (!self_done && j > i) {
      result.push_back(i);
      self_done = true;
    }
    result.push_back(j);
  });
  if (!self_done) result.push_back(i);
  return result;
}

std::vector<Action> greedy_dominating_set(const FeedbackGraph& g) {
  const std::size_t k = g.k();
  const std::size_t words = g.words();
  std::vector<std::uint64_t> uncovered(words, ~std::uint64_t{0});
  if (k % kWordBits != 0) uncovered.back() = (std::uint64_t{1} << (k % kWordBits)) - 1;

  std::vector<Action> chosen;
  std::size_t remaining = k;
  while (remaining > 0) {
    Action best = 0;
    std::size_t best_gain = 0;
    for (Action i = 0; i < k; ++i) {
      const auto row = g.out_row(i);
      std::size_t gain = test_bit(uncovered, i) ? 1 : 0;
      for (std::size_t w = 0; w < words; ++w)
        gain += static_cast<std::size_t>(std::popcount(row[w] & uncovered[w]));
      if (gain > best_gain) {
        best_gain = gain;
        best = i;
      }
    }
    const auto row = g.out_row(best);
    for (std::size_t w = 0; w < words; ++w) uncovered[w] &= ~row[w];
    uncovered[best / kWordBits] &= ~(std::uint64_t{1} << (best % kWordBits));
    remaining -= best_gain;
    chosen.push_back(best);
  }
  return chosen;
}

bool is_dominating(const FeedbackGraph& g, std::span<const Action> set) {
  std::vector<bool> covered(g.k(), false);
  for (Action r : set) {
    if (r >= g.k()) throw InvalidParameter("action index out of range");
    covered[r] = true;
    for_each_bit(g.out_row(r), [&](std::size_t j) { covered[j] = true; });
  }
  return std::all_of(covered.begin(), covered.end(), [](bool c) { return c; });
}

std::vector<Action> maximum_independent_set(const FeedbackGraph& g, std::size_t cap) {
  require_cap(g.k(), std::min(cap, kIndependenceCap), "independence number");
  const auto adj = skeleton_masks(g);
  MisSearch search{adj};
  const std::uint64_t all = g.k() == 64 ? ~std::uint64_t{0} : bit(g.k()) - 1;
  search.run(all, 0, 0);
  std::vector<Action> result;
  for (std::uint64_t s = search.best_set; s != 0; s &= s - 1)
    result.push_back(static_cast<Action>(std::countr_zero(s)));
  return result;
}

std::size_t independence_number(const FeedbackGraph& g, std::size_t cap) {
  return maximum_independent_set(g, cap).size();
}

std::size_t greedy_clique_cover_size(const FeedbackGraph& g) {
  const std::size_t k = g.k();
  const std::size_t words = g.words();
  std::vector<std::uint64_t> skeleton(k * words);
  for (Action i = 0; i < k; ++i)
    for (std::size_t w = 0; w < words; ++w)
      skeleton[i * words + w] = g.out_row(i)[w] | g.in_row(i)[w];

  std::vector<bool> used(k, false);
  std::size_t cliques = 0;
  for (Action v = 0; v < k; ++v) {
    if (used[v]) continue;
    used[v] = true;
    ++cliques;
    std::vector<Action> members{v};
    for (Action u = v + 1; u < k; ++u) {
      if (used[u]) continue;
      const bool joins = std::all_of(members.begin(), members.end(), [&](Action m) {
        return test_bit(std::span<const std::uint64_t>{skeleton.data() + m * words, words}, u);
      });
      if (joins) {
        used[u] = true;
        members.push_back(u);
      }
    }
  }
  return cliques;
}

BoundedCount independence_number_or_bound(const FeedbackGraph& g, std::size_t cap) {
  if (g.k() <= std::min(cap, kIndependenceCap)) return {independence_number(g, cap), true};
  return {greedy_clique_cover_size(g), false};
}

std::size_t domination_number(const FeedbackGraph& g, std::size_t cap) {
  const std::size_t k = g.k();
  require_cap(k, std::min(cap, kDominationCap), "domination number");
  std::vector<std::uint64_t> closed(k);
  for (Action i = 0; i < k; ++i) closed[i] = g.out_row(i)[0] | bit(i);
  const std::uint64_t all = bit(k) - 1;
  for (std::size_t size = 1; size <= k; ++size) {
    // Gosper's hack over all k-bit masks with `size` bits set.
    std::uint64_t mask = bit(size) - 1;
    while (mask <= all) {
      std::uint64_t covered = 0;
      for (std::uint64_t m = mask; m != 0; m &= m - 1)
        covered |= closed[static_cast<std::size_t>(std::countr_zero(m))];
      if (covered == all) return size;
      const std::uint64_t c = mask & (0 - mask);
      const std::uint64_t r = mask + c;
      mask = (((r ^ mask) >> 2) / c) | r;
    }
  }
  return k;
}

std::size_t mas_size(const FeedbackGraph& g, MasMode mode) {
  const std::size_t k = g.k();
  if (mode == MasMode::kExact) {
    require_cap(k, kMasExactCap, "exact maximum acyclic subgraph");
    std::vector<std::uint64_t> in(k);
    for (Action i = 0; i < k; ++i) in[i] = g.in_row(i)[0];
    // acyclic[S] iff some v in S has no in-arc from S and S \ {v} is acyclic.
    const std::size_t subsets = std::size_t{1} << k;
    std::vector<std::uint8_t> acyclic(subsets, 0);
    acyclic[0] = 1;
    std::size_t best = 0;
    for (std::uint64_t s = 1; s < subsets; ++s) {
      for (std::uint64_t m = s; m != 0; m &= m - 1) {
        const auto v = static_cast<std::size_t>(std::countr_zero(m));
        if ((in[v] & s) == 0 && acyclic[s & ~bit(v)]) {
          acyclic[s] = 1;
          best = std::max(best, static_cast<std::size_t>(std::popcount(s)));
          break;
        }
      }
    }
    return best;
  }

  const std::size_t words = g.words();
  std::vector<std::uint64_t> alive(words, ~std::uint64_t{0});
  if (k % kWordBits != 0) alive.back() = (std::uint64_t{1} << (k % kWordBits)) - 1;
  std::size_t kept = 0;
  std::size_t remaining = k;
  while (remaining > 0) {
    Action pick = 0;
    std::size_t pick_deg = k + 1;
    for_each_bit(alive, [&](std::size_t i) {
      std::size_t d = 0;
      const auto row = g.in_row(i);
      for (std::size_t w = 0; w < words; ++w)
        d += static_cast<std::size_t>(std::popcount(row[w] & alive[w]));
      if (d < pick_deg) {
        pick_deg = d;
        pick = i;
      }
    });
    const auto row = g.in_row(pick);
    for (std::size_t w = 0; w < words; ++w) alive[w] &= ~row[w];
    alive[pick / kWordBits] &= ~(std::uint64_t{1} << (pick % kWordBits));
    remaining -= pick_deg + 1;
    ++kept;
  }
  return kept;
}

FeedbackGraph read_graph(std::istream& in) {
  std::string line;
  std::optional<std::size_t> k;
  std::vector<Arc> arcs;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank_or_comment(line)) continue;
    try {
      if (!k) {
        k = detail::parse_header(line, "K");
        continue;
      }
      const auto tokens = detail::split_ws(detail::trim(line));
      if (tokens.size() != 2) throw InvalidParameter("expected 'i j'");
      arcs.emplace_back(detail::parse_number<Action>(tokens[0], "arc tail"),
                        detail::parse_number<Action>(tokens[1], "arc head"));
    } catch (const InvalidParameter& e) {
      throw InvalidParameter("graph line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!k) throw InvalidParameter("graph input has no 'K <int>' header");
  return FeedbackGraph(*k, arcs);
}

FeedbackGraph read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open graph file '" + path + "'");
  try {
    return read_graph(in);
  } catch (const InvalidParameter& e) {
    throw InvalidParameter(path + ": " + e.what());
  }
}

void write_graph(std::ostream& out, const FeedbackGraph& g) {
  out << "K " << g.k() << '\n';
  for (const auto& [i, j] : g.arcs()) out << i << ' ' << j << '\n';
}

std::string to_graph_text(const FeedbackGraph& g) {
  std::ostringstream os;
  write_graph(os, g);
  return os.str();
}

}  // namespace fgb
