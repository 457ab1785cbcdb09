// fgbsim: simulations, graph statistics and verification suites.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fgb/environments.hpp"
#include "fgb/errors.hpp"
#include "fgb/graph.hpp"
#include "fgb/harness.hpp"
#include "fgb/verify.hpp"

#ifndef FGB_VERSION
#define FGB_VERSION "unknown"
#endif

namespace {

int simulate(const std::string& config_path, std::size_t threads, const std::string& output) {
  auto config = fgb::load_config(config_path);
  if (threads > 0) config.threads = threads;
  if (!output.empty()) config.output = output;

  // Setup warnings are a property of the environment spec; report them once.
  const auto probe = fgb::make_env(config.environment, fgb::derive_seed(config.seed, 0));
  for (const auto& w : probe->warnings()) std::cerr << "warning: " << w << '\n';

  const auto trace = fgb::run_many(config);
  if (config.output.empty() || config.output == "-") {
    fgb::emit_csv(trace.points, std::cout);
  } else {
    fgb::emit_csv(trace.points, config.output);
  }
  return 0;
}

int graph_stats(const std::string& path) {
  const auto g = fgb::read_graph_file(path);
  std::cout << "k " << g.k() << '\n';
  std::cout << "arcs " << g.arc_count() << '\n';
  std::cout << "symmetric " << (g.is_symmetric() ? "yes" : "no") << '\n';
  const auto alpha = fgb::independence_number_or_bound(g);
  std::cout << "alpha " << (alpha.exact ? "" : "<= ") << alpha.value
            << (alpha.exact ? " (exact)" : " (clique cover bound)") << '\n';
  if (g.k() <= fgb::kMasExactCap) {
    std::cout << "mas " << fgb::mas_size(g, fgb::MasMode::kExact) << " (exact)\n";
  } else {
    std::cout << "mas >= " << fgb::mas_size(g, fgb::MasMode::kPeel) << " (peel)\n";
  }
  std::cout << "greedy_dominating_set " << fgb::greedy_dominating_set(g).size() << '\n';
  return 0;
}

bool report(const fgb::CheckReport& r) {
  std::cout << "suite " << r.suite << ": trials " << r.trials << ", failures " << r.failures.size()
            << ", slack min " << r.min_slack << " max " << r.max_slack << ", "
            << (r.passed() ? "PASS" : "FAIL") << '\n';
  constexpr std::size_t kShown = 3;
  for (std::size_t i = 0; i < r.failures.size() && i < kShown; ++i) {
    std::cerr << "counterexample (" << r.failures[i].detail << "):\n" << r.failures[i].instance;
  }
  if (r.failures.size() > kShown) {
    std::cerr << "... " << r.failures.size() - kShown << " more failures\n";
  }
  return r.passed();
}

int verify(const std::string& suite, std::size_t trials, std::size_t max_k, std::uint64_t seed,
           double r) {
  static const std::vector<std::string> kSuites{"exposure", "indegree", "cover", "weighted",
                                                "elp",      "lp",       "er",    "er-exposure"};
  bool ok = true;
  std::size_t index = 0;
  for (const auto& name : kSuites) {
    // Each suite draws from its own substream so `all` matches the single runs.
    fgb::SplitMix64 rng(fgb::derive_seed(seed, index++));
    if (suite != "all" && suite != name) continue;
    fgb::CheckReport result;
    if (name == "exposure") result = fgb::check_exposure_vs_mas(trials, max_k, rng);
    if (name == "indegree") result = fgb::check_indegree_sum(trials, max_k, rng);
    if (name == "cover") result = fgb::check_greedy_cover(trials, max_k, rng);
    if (name == "weighted") result = fgb::check_weighted_bound(trials, max_k, rng);
    if (name == "elp") result = fgb::check_elp_inequalities(trials, max_k, rng);
    if (name == "lp") result = fgb::check_lp(trials, max_k, rng);
    if (name == "er") result = fgb::check_er_expectation(max_k, r, trials, rng);
    if (name == "er-exposure") result = fgb::check_er_exposure(max_k, r, trials, rng);
    ok = report(result) && ok;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online learning with feedback graphs: simulation and verification"};
  app.set_version_flag("--version", std::string(FGB_VERSION));
  app.require_subcommand(1);

  std::string config_path, output;
  std::size_t threads = 0;
  auto* sim = app.add_subcommand("simulate", "Run an experiment config and write the regret CSV");
  sim->add_option("--config", config_path, "JSON experiment config")->required();
  sim->add_option("--threads", threads, "Worker threads (overrides the config)");
  sim->add_option("--output", output, "CSV path, '-' for stdout (overrides the config)");

  std::string graph_path;
  auto* stats = app.add_subcommand("graph-stats", "Print statistics of a graph file");
  stats->add_option("--input", graph_path, "Graph file")->required();

  std::string suite = "all";
  std::size_t trials = 1000, max_k = 8;
  std::uint64_t seed = 1;
  double r = 0.5;
  auto* ver = app.add_subcommand("verify", "Run property suites; exit code 0 iff all pass");
  ver->add_option("--suite", suite, "Suite name")
      ->check(CLI::IsMember({"exposure", "indegree", "cover", "weighted", "elp", "lp", "er",
                             "er-exposure", "all"}));
  ver->add_option("--trials", trials, "Trials (graph draws for er)");
  ver->add_option("--max-k", max_k, "Largest k (the k of the er suite)");
  ver->add_option("--seed", seed, "Master seed");
  ver->add_option("--r", r, "Arc probability for the er suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return simulate(config_path, threads, output);
    if (*stats) return graph_stats(graph_path);
    return verify(suite, trials, max_k, seed, r);
  } catch (const fgb::ConfigurationError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const fgb::InvalidParameter& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
