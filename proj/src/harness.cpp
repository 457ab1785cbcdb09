#include "fgb/harness.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fgb/errors.hpp"
#include "text_util.hpp"

namespace fgb {
namespace {

using nlohmann::json;

// Config parsing helpers. Every lookup reports the JSON path on failure.

[[noreturn]] void config_fail(const std::string& where, const std::string& what) {
  throw ConfigurationError("config " + where + ": " + what);
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object()) config_fail(where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) config_fail(where, "missing key '" + key + "'");
  return *it;
}

template <typename T>
T as(const json& value, const std::string& where) {
  try {
    if constexpr (std::is_unsigned_v<T>) {
      if (!value.is_number_unsigned()) config_fail(where, "expected a non-negative integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!value.is_number()) config_fail(where, "expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!value.is_string()) config_fail(where, "expected a string");
    }
    return value.get<T>();
  } catch (const json::exception& e) {
    config_fail(where, e.what());
  }
}

template <typename T>
std::optional<T> optional_field(const json& obj, const std::string& key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return as<T>(*it, where + "." + key);
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) config_fail(where, "unknown key '" + key + "'");
  }
}

std::vector<double> number_list(const json& value, const std::string& where) {
  if (!value.is_array()) config_fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    out.push_back(as<double>(value[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<std::pair<Action, Action>> pair_list(const json& value, const std::string& where) {
  if (!value.is_array()) config_fail(where, "expected an array of [i, j] pairs");
  std::vector<std::pair<Action, Action>> out;
  for (std::size_t n = 0; n < value.size(); ++n) {
    const auto at = where + "[" + std::to_string(n) + "]";
    const auto& p = value[n];
    if (!p.is_array() || p.size() != 2) config_fail(at, "expected [i, j]");
    out.emplace_back(as<std::size_t>(p[0], at), as<std::size_t>(p[1], at));
  }
  return out;
}

GraphKind parse_graph(const json& obj, const std::string& where) {
  const auto kind = as<std::string>(require(obj, "kind", where), where + ".kind");
  if (kind == "clique") {
    check_keys(obj, {"kind"}, where);
    return graph_kind::Clique{};
  }
  if (kind == "empty") {
    check_keys(obj, {"kind"}, where);
    return graph_kind::Empty{};
  }
  if (kind == "total_order") {
    check_keys(obj, {"kind"}, where);
    return graph_kind::TotalOrder{};
  }
  if (kind == "erdos_renyi") {
    check_keys(obj, {"kind", "r"}, where);
    return graph_kind::ErdosRenyi{as<double>(require(obj, "r", where), where + ".r")};
  }
  if (kind == "symmetric") {
    check_keys(obj, {"kind", "edges"}, where);
    return graph_kind::Symmetric{pair_list(require(obj, "edges", where), where + ".edges")};
  }
  if (kind == "explicit") {
    check_keys(obj, {"kind", "arcs"}, where);
    return graph_kind::Explicit{pair_list(require(obj, "arcs", where), where + ".arcs")};
  }
  if (kind == "file") {
    check_keys(obj, {"kind", "path"}, where);
    const auto path = as<std::string>(require(obj, "path", where), where + ".path");
    try {
      return graph_kind::Explicit{read_graph_file(path).arcs()};
    } catch (const InvalidParameter& e) {
      config_fail(where, e.what());
    }
  }
  config_fail(where + ".kind", "unknown graph kind '" + kind + "'");
}

EnvironmentSpec parse_environment(const json& obj, const std::string& where) {
  const auto kind = as<std::string>(require(obj, "kind", where), where + ".kind");
  if (kind == "bernoulli_gap") {
    check_keys(obj, {"kind", "means", "graph"}, where);
    env_kind::BernoulliGap spec;
    spec.means = number_list(require(obj, "means", where), where + ".means");
    if (obj.contains("graph")) spec.graph = parse_graph(obj["graph"], where + ".graph");
    return spec;
  }
  if (kind == "lower_bound") {
    check_keys(obj, {"kind", "k", "graph", "horizon", "epsilon"}, where);
    env_kind::LowerBound spec;
    spec.k = as<std::size_t>(require(obj, "k", where), where + ".k");
    if (obj.contains("graph")) spec.graph = parse_graph(obj["graph"], where + ".graph");
    // The adversary's horizon defaults to the run's horizon; filled in by parse_config.
    if (auto h = optional_field<std::size_t>(obj, "horizon", where)) spec.horizon = *h;
    spec.epsilon = optional_field<double>(obj, "epsilon", where);
    return spec;
  }
  if (kind == "erdos_renyi_process") {
    check_keys(obj, {"kind", "r", "means"}, where);
    return env_kind::ErdosRenyiProcess{
        as<double>(require(obj, "r", where), where + ".r"),
        number_list(require(obj, "means", where), where + ".means")};
  }
  if (kind == "replay") {
    check_keys(obj, {"kind", "path"}, where);
    return env_kind::Replay{as<std::string>(require(obj, "path", where), where + ".path")};
  }
  config_fail(where + ".kind", "unknown environment kind '" + kind + "'");
}

PolicySpec parse_policy(const json& obj, const std::string& where) {
  check_keys(obj, {"name", "eta", "round_bound", "gammas", "delta"}, where);
  PolicySpec spec;
  try {
    spec.name = parse_policy_name(as<std::string>(require(obj, "name", where), where + ".name"));
  } catch (const InvalidParameter& e) {
    config_fail(where + ".name", e.what());
  }
  spec.eta = optional_field<double>(obj, "eta", where);
  spec.round_bound = optional_field<double>(obj, "round_bound", where);
  if (obj.contains("gammas") && !obj["gammas"].is_null()) {
    spec.gammas = number_list(obj["gammas"], where + ".gammas");
  }
  if (auto d = optional_field<double>(obj, "delta", where)) spec.delta = *d;
  return spec;
}

}  // namespace

PolicyName parse_policy_name(const std::string& name) {
  if (name == "exp3set") return PolicyName::kExp3Set;
  if (name == "exp3dom") return PolicyName::kExp3Dom;
  if (name == "elpp") return PolicyName::kElpP;
  if (name == "hedge") return PolicyName::kHedge;
  if (name == "exp3") return PolicyName::kExp3;
  throw InvalidParameter("unknown policy '" + name + "'");
}

std::string to_string(PolicyName name) {
  switch (name) {
    case PolicyName::kExp3Set: return "exp3set";
    case PolicyName::kExp3Dom: return "exp3dom";
    case PolicyName::kElpP: return "elpp";
    case PolicyName::kHedge: return "hedge";
    case PolicyName::kExp3: return "exp3";
  }
  return "?";
}

std::size_t environment_k(const EnvironmentSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::size_t {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, env_kind::LowerBound>) {
          return s.k;
        } else if constexpr (std::is_same_v<S, env_kind::Replay>) {
          return make_env(s, 0)->k();
        } else {
          return s.means.size();
        }
      },
      spec);
}

double tuning_bound(const PolicySpec& spec, const EnvironmentSpec& env) {
  if (spec.round_bound) return *spec.round_bound;
  if (spec.name == PolicyName::kHedge) return 1.0;
  const std::size_t k = environment_k(env);
  if (spec.name != PolicyName::kExp3Set && spec.name != PolicyName::kElpP) {
    return static_cast<double>(k);
  }
  const GraphKind* kind = nullptr;
  if (const auto* e = std::get_if<env_kind::BernoulliGap>(&env)) kind = &e->graph;
  if (const auto* e = std::get_if<env_kind::LowerBound>(&env)) kind = &e->graph;
  if (kind == nullptr || std::holds_alternative<graph_kind::ErdosRenyi>(*kind) || k == 0) {
    return static_cast<double>(k);
  }
  SplitMix64 unused(0);
  const auto g = generate(*kind, k, unused);
  if (g.is_symmetric() && k <= kIndependenceCap) {
    return static_cast<double>(independence_number(g));
  }
  if (k <= kMasExactCap) return static_cast<double>(mas_size(g, MasMode::kExact));
  return static_cast<double>(k);
}

AnyPolicy make_policy(const PolicySpec& spec, std::size_t k, std::size_t horizon,
                      double m) {
  if (horizon == 0) throw ConfigurationError("horizon must be at least 1");
  if (!(m > 0.0)) throw ConfigurationError("round_bound must be positive");
  const double sum_bound = m * static_cast<double>(horizon);
  if (spec.name != PolicyName::kExp3Dom && spec.gammas) {
    throw ConfigurationError("gammas only apply to exp3dom");
  }
  try {
    switch (spec.name) {
      case PolicyName::kExp3Set:
        return Exp3Set(k, spec.eta.value_or(exp3set_tuned_eta(k, sum_bound)));
      case PolicyName::kHedge:
        return Hedge(k, spec.eta.value_or(exp3set_tuned_eta(k, sum_bound)));
      case PolicyName::kExp3:
        return Exp3(k, spec.eta.value_or(exp3set_tuned_eta(k, sum_bound)));
      case PolicyName::kElpP:
        return ElpP(k, spec.delta, spec.eta.value_or(elpp_tuned_eta(k, spec.delta, sum_bound)));
      case PolicyName::kExp3Dom:
        if (spec.eta) throw ConfigurationError("exp3dom has no eta; set gammas instead");
        return spec.gammas ? Exp3Dom::with_fixed_gammas(k, *spec.gammas)
                           : Exp3Dom::with_doubling(k);
    }
  } catch (const InvalidParameter& e) {
    throw ConfigurationError(to_string(spec.name) + ": " + e.what());
  }
  throw ConfigurationError("unknown policy");
}

RunTrace run_one(const PolicySpec& policy_spec, const EnvironmentSpec& env_spec,
                 std::size_t horizon, std::uint64_t seed, std::size_t stride) {
  if (horizon == 0) throw ConfigurationError("horizon must be at least 1");
  if (stride == 0) throw ConfigurationError("stride must be at least 1");
  auto env = make_env(env_spec, derive_seed(seed, 0));
  if (const auto h = env->horizon(); h && *h < horizon) {
    throw ConfigurationError("environment provides " + std::to_string(*h) +
                             " rounds, horizon is " + std::to_string(horizon));
  }
  auto policy = make_policy(policy_spec, env->k(), horizon, tuning_bound(policy_spec, env_spec));
  SplitMix64 rng(derive_seed(seed, 1));
  return std::visit(
      [&](auto& p) {
        if (p.k() != env->k()) throw ConfigurationError("policy k differs from environment k");
        return run_protocol(p, *env, horizon, rng, stride);
      },
      policy);
}

std::vector<AggregatePoint> aggregate(const std::vector<RunTrace>& runs) {
  std::vector<AggregatePoint> out;
  if (runs.empty()) return out;
  const std::size_t points = runs.front().points.size();
  for (const auto& r : runs) {
    if (r.points.size() != points) throw InvalidParameter("runs record different rounds");
  }
  const double n = static_cast<double>(runs.size());
  for (std::size_t j = 0; j < points; ++j) {
    double regret = 0.0, player = 0.0, best = 0.0;
    for (const auto& r : runs) {
      regret += r.points[j].regret;
      player += r.points[j].player_loss;
      best += r.points[j].best_arm_loss;
    }
    const double mean = regret / n;
    double ss = 0.0;
    for (const auto& r : runs) ss += (r.points[j].regret - mean) * (r.points[j].regret - mean);
    const double sd = runs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    out.push_back({runs.front().points[j].round, mean, sd, player / n, best / n});
  }
  return out;
}

RegretTrace run_many(const ExperimentConfig& config) {
  if (config.repetitions == 0) throw ConfigurationError("repetitions must be at least 1");
  if (config.threads == 0) throw ConfigurationError("threads must be at least 1");
  std::vector<RunTrace> runs(config.repetitions);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= config.repetitions) return;
      try {
        runs[i] = run_one(config.policy, config.environment, config.horizon,
                          derive_seed(config.seed, i), config.stride);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(config.repetitions);
      }
    }
  };

  const std::size_t threads = std::min(config.threads, config.repetitions);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  RegretTrace trace;
  trace.points = aggregate(runs);
  trace.runs = std::move(runs);
  return trace;
}

void emit_csv(const std::vector<AggregatePoint>& points, std::ostream& out) {
  out << "round,mean_regret,std_regret,mean_player_loss,best_arm_loss\n";
  for (const auto& p : points) {
    out << p.round << ',' << detail::format_double(p.mean_regret) << ','
        << detail::format_double(p.std_regret) << ',' << detail::format_double(p.mean_player_loss)
        << ',' << detail::format_double(p.best_arm_loss) << '\n';
  }
}

void emit_csv(const std::vector<AggregatePoint>& points, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  emit_csv(points, out);
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<AggregatePoint> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      detail::trim(line) != "round,mean_regret,std_regret,mean_player_loss,best_arm_loss") {
    throw InvalidParameter("CSV header missing or malformed");
  }
  std::vector<AggregatePoint> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = detail::trim(line);
    if (row.empty()) continue;
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = row.find(',', start);
      cells.push_back(row.substr(start, comma == std::string_view::npos ? comma : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 5) {
      throw InvalidParameter("CSV line " + std::to_string(line_no) + ": expected 5 columns");
    }
    out.push_back({detail::parse_number<std::size_t>(cells[0], "round"),
                   detail::parse_number<double>(cells[1], "mean_regret"),
                   detail::parse_number<double>(cells[2], "std_regret"),
                   detail::parse_number<double>(cells[3], "mean_player_loss"),
                   detail::parse_number<double>(cells[4], "best_arm_loss")});
  }
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigurationError(std::string("config is not valid JSON: ") + e.what());
  }
  const std::string where = "$";
  if (!root.is_object()) config_fail(where, "expected an object");
  check_keys(root,
             {"policy", "environment", "horizon", "repetitions", "seed", "output", "stride",
              "threads"},
             where);

  ExperimentConfig config;
  config.policy = parse_policy(require(root, "policy", where), "$.policy");
  config.environment = parse_environment(require(root, "environment", where), "$.environment");
  config.horizon = as<std::size_t>(require(root, "horizon", where), "$.horizon");
  if (config.horizon == 0) config_fail("$.horizon", "must be at least 1");
  if (auto r = optional_field<std::size_t>(root, "repetitions", where)) config.repetitions = *r;
  if (config.repetitions == 0) config_fail("$.repetitions", "must be at least 1");
  if (auto s = optional_field<std::uint64_t>(root, "seed", where)) config.seed = *s;
  if (auto o = optional_field<std::string>(root, "output", where)) config.output = *o;
  if (auto s = optional_field<std::size_t>(root, "stride", where)) config.stride = *s;
  if (config.stride == 0) config_fail("$.stride", "must be at least 1");
  if (auto t = optional_field<std::size_t>(root, "threads", where)) config.threads = *t;
  if (config.threads == 0) config_fail("$.threads", "must be at least 1");

  if (auto* lb = std::get_if<env_kind::LowerBound>(&config.environment); lb && lb->horizon == 0) {
    lb->horizon = config.horizon;
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str());
  } catch (const ConfigurationError& e) {
    throw ConfigurationError(path + ": " + e.what());
  }
}

}  // namespace fgb
