#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fgb/rng.hpp"

namespace fgb {

using Action = std::size_t;
using Arc = std::pair<Action, Action>;

/// Directed feedback graph over k actions.
///
/// Arc (i, j) means playing i reveals the loss of j. Self-observation is
/// implicit and never stored: the observation set of i is {i} plus its
/// out-neighbours. Adjacency is held as dense bit rows (one row of
/// ceil(k/64) words per node, both directions), so in-neighbourhood sums are
/// word scans. Immutable once built.
class FeedbackGraph {
 public:
  /// Edgeless graph on k >= 1 nodes.
  explicit FeedbackGraph(std::size_t k);
  /// Throws InvalidParameter on k == 0, out-of-range endpoints, self-arcs or
  /// duplicate arcs.
  FeedbackGraph(std::size_t k, std::span<const Arc> arcs);

  std::size_t k() const noexcept { return k_; }
  std::size_t words() const noexcept { return words_; }
  std::size_t arc_count() const noexcept { return arc_count_; }

  bool has_arc(Action from, Action to) const;

  std::span<const std::uint64_t> out_row(Action i) const {
    return {out_.data() + i * words_, words_};
  }
  std::span<const std::uint64_t> in_row(Action i) const {
    return {in_.data() + i * words_, words_};
  }

  std::size_t out_degree(Action i) const;
  std::size_t in_degree(Action i) const;

  /// Arcs in lexicographic order.
  std::vector<Arc> arcs() const;

  /// True when every arc has its reverse (the undirected case).
  bool is_symmetric() const;

  friend bool operator==(const FeedbackGraph&, const FeedbackGraph&) = default;

 private:
  std::size_t k_;
  std::size_t words_;
  std::size_t arc_count_ = 0;
  std::vector<std::uint64_t> out_;
  std::vector<std::uint64_t> in_;
};

namespace graph_kind {
struct Clique {};
struct Empty {};
// Arc (j, i) for every j > i: the highest index observes everything.
struct TotalOrder {};
// Each ordered pair i != j independently with probability r.
struct ErdosRenyi {
  double r = 0.5;
};
// Undirected edges, stored once, expanded to both arcs.
struct Symmetric {
  std::vector<std::pair<Action, Action>> edges;
};
struct Explicit {
  std::vector<Arc> arcs;
};
}  // namespace graph_kind

using GraphKind = std::variant<graph_kind::Clique, graph_kind::Empty, graph_kind::TotalOrder,
                               graph_kind::ErdosRenyi, graph_kind::Symmetric,
                               graph_kind::Explicit>;

/// Builds a graph of the given kind. Only ErdosRenyi draws from `rng`: one
/// uniform per ordered pair, row-major over (i, j) with i != j.
FeedbackGraph generate(const GraphKind& kind, std::size_t k, SplitMix64& rng);

// Structured families used by tests and the verification ensemble.
FeedbackGraph make_star(std::size_t k, Action center);
FeedbackGraph make_cycle(std::size_t k, bool symmetric);

/// {i} together with the out-neighbours of i, ascending.
std::vector<Action> observation_set(const FeedbackGraph& g, Action i);

/// Greedy set cover over the observation sets: repeatedly take the action
/// covering the most uncovered actions, lowest index on ties. Returned in
/// selection order.
std::vector<Action> greedy_dominating_set(const FeedbackGraph& g);

/// True when every node is in `set` or has an in-neighbour in `set`.
bool is_dominating(const FeedbackGraph& g, std::span<const Action> set);

inline constexpr std::size_t kIndependenceCap = 64;
inline constexpr std::size_t kDominationCap = 20;
inline constexpr std::size_t kMasExactCap = 20;

/// A maximum independent set of the undirected skeleton, found by branch and
/// bound. Throws CapacityExceeded when k > cap (cap itself is at most 64).
std::vector<Action> maximum_independent_set(const FeedbackGraph& g,
                                            std::size_t cap = kIndependenceCap);

/// Exact independence number of the undirected skeleton.
std::size_t independence_number(const FeedbackGraph& g, std::size_t cap = kIndependenceCap);

struct BoundedCount {
  std::size_t value = 0;
  bool exact = false;
};

/// Exact alpha when k <= cap, otherwise the size of a greedy clique cover of
/// the skeleton (an upper bound on alpha) flagged as approximate.
BoundedCount independence_number_or_bound(const FeedbackGraph& g,
                                          std::size_t cap = kIndependenceCap);

/// Number of cliques in a greedy clique partition of the skeleton.
std::size_t greedy_clique_cover_size(const FeedbackGraph& g);

/// Exact domination number by subset enumeration in increasing size.
std::size_t domination_number(const FeedbackGraph& g, std::size_t cap = kDominationCap);

enum class MasMode { kExact, kPeel };

/// Maximum acyclic (induced) subgraph size. kExact runs a subset dynamic
/// program and needs k <= 20. kPeel repeatedly keeps the node of smallest
/// remaining in-degree and deletes its in-neighbours, which yields an acyclic
/// set and hence a lower bound.
std::size_t mas_size(const FeedbackGraph& g, MasMode mode);

// Graph file format: "K <int>" then one "i j" arc per line; '#' lines ignored.
FeedbackGraph read_graph(std::istream& in);
FeedbackGraph read_graph_file(const std::string& path);
void write_graph(std::ostream& out, const FeedbackGraph& g);
std::string to_graph_text(const FeedbackGraph& g);

}  // namespace fgb
