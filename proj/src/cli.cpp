#include "atlforge/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "atlforge/encoding.hpp"
#include "json_util.hpp"

namespace atlforge::cli {

using detail::child_path;
using detail::json;
using detail::require;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("$", std::string("malformed JSON: ") + e.what());
  }
}

double get_positive_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  double v = j.get<double>();
  if (!(v > 0)) throw SchemaError(path, "must be positive");
  return v;
}

Budgets budgets_from_json(const json& j, const std::string& path) {
  detail::reject_unknown(j, path, {"time_seconds", "conflicts"});
  Budgets b;
  if (j.contains("time_seconds")) b.time_seconds = get_positive_number(j["time_seconds"], child_path(path, "time_seconds"));
  if (j.contains("conflicts")) b.conflicts = static_cast<std::uint64_t>(detail::get_int(j["conflicts"], child_path(path, "conflicts"), 1));
  return b;
}

}  // namespace

Problem load_problem(std::string_view text) {
  const json j = parse_json(text);
  detail::reject_unknown(j, "", {"semantics", "agents", "propositions", "formula", "search", "budgets"});

  Problem p;
  int max_l = 0, max_a = 0;
  if (j.contains("search")) {
    const auto& s = j["search"];
    detail::reject_unknown(s, "search", {"mode", "max_local_states", "max_actions", "max_total_states"});
    auto mode = detail::get_string(require(s, "search", "mode"), "search.mode");
    if (mode == "fixed")
      p.mode = SearchMode::Fixed;
    else if (mode == "minimize")
      p.mode = SearchMode::Minimize;
    else
      throw SchemaError("search.mode", "expected \"fixed\" or \"minimize\"");
    if (s.contains("max_local_states")) max_l = detail::get_int(s["max_local_states"], "search.max_local_states", 1);
    if (s.contains("max_actions")) max_a = detail::get_int(s["max_actions"], "search.max_actions", 1);
    if (s.contains("max_total_states"))
      p.max_total_states = static_cast<std::size_t>(detail::get_int(s["max_total_states"], "search.max_total_states", 1));
  }

  json sig = json::object();
  for (const char* key : {"semantics", "agents", "propositions"})
    if (j.contains(key)) sig[key] = j[key];
  require(j, "", "semantics");
  require(j, "", "agents");
  require(j, "", "propositions");
  const bool fixed = p.mode == SearchMode::Fixed;
  p.signature = detail::signature_from_json(sig, "", fixed);
  for (std::size_t i = 0; i < p.signature.agents.size(); ++i) {
    auto& a = p.signature.agents[i];
    const auto path = child_path(std::string("agents"), i);
    if (a.local_states == 0) {
      if (!max_l) throw SchemaError(child_path(path, "local_states"), "missing required field (or set search.max_local_states)");
      a.local_states = max_l;
    }
    if (a.actions == 0) {
      if (!max_a) throw SchemaError(child_path(path, "actions"), "missing required field (or set search.max_actions)");
      a.actions = max_a;
    }
  }

  p.formula = detail::get_string(require(j, "", "formula"), "formula");
  try {
    parse(p.formula, p.signature);
  } catch (const ParseError& e) {
    throw SchemaError("formula", e.what());
  }
  if (j.contains("budgets")) p.budgets = budgets_from_json(j["budgets"], "budgets");
  return p;
}

int exit_code(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Sat:
      return kSat;
    case VerdictStatus::UnsatWithinBounds:
      return kUnsat;
    case VerdictStatus::Unknown:
      return kUnknown;
  }
  return kUnknown;
}

std::string verdict_to_json(const Verdict& v, const Problem& p) {
  json out;
  out["status"] = std::string(to_string(v.status));
  if (v.signature) out["signature"] = detail::signature_to_json(*v.signature);
  if (v.model) {
    json m = detail::model_to_json(*v.model);
    m.erase("signature");
    out["model"] = m;
  }
  if (v.model && p.signature.semantics == Semantics::Imperfect) {
    json w = json::object();
    for (const auto& x : v.witnesses) w[x.formula] = json::parse(imperfect::strategy_to_json(x.strategy, *v.signature));
    out["witness_strategies"] = w;
  }
  json attempts = json::array();
  for (const auto& a : v.stats.attempts)
    attempts.push_back(json{{"signature", a.shape},
                            {"status", std::string(to_string(a.status))},
                            {"wall_ms", a.wall_ms},
                            {"conflicts", a.conflicts}});
  const auto& t = v.stats.theory;
  out["stats"] = json{{"wall_ms", v.stats.wall_ms},
                      {"sat_conflicts", v.stats.sat_conflicts},
                      {"theory_checks", t.partial_checks + t.exact_checks},
                      {"theory_conflicts", t.conflicts()},
                      {"signatures_tried", v.stats.signatures_tried},
                      {"attempts", attempts}};
  return out.dump(2);
}

namespace {

struct BenchConfig {
  Semantics semantics = Semantics::Perfect;
  int agents = 2;
  int propositions = 2;
  int actions = 2;
  std::vector<int> local_states{2};
  int instances = 8;
  int k = 1;
  int c = 0;
  int groups = 1;
  std::uint64_t seed = 1;
  Budgets budgets;
};

BenchConfig load_bench(std::string_view text) {
  const json j = parse_json(text);
  detail::reject_unknown(j, "", {"semantics", "agents", "propositions", "actions", "local_states", "instances", "k", "c",
                                 "groups", "seed", "budgets"});
  BenchConfig b;
  auto opt_int = [&](const char* key, int& dst, int min) {
    if (j.contains(key)) dst = detail::get_int(j[key], key, min);
  };
  if (j.contains("semantics")) {
    auto s = detail::get_string(j["semantics"], "semantics");
    if (s != "perfect" && s != "imperfect") throw SchemaError("semantics", "expected \"perfect\" or \"imperfect\"");
    b.semantics = semantics_from_string(s);
  }
  opt_int("agents", b.agents, 1);
  opt_int("propositions", b.propositions, 1);
  opt_int("actions", b.actions, 1);
  opt_int("instances", b.instances, 1);
  opt_int("k", b.k, 0);
  opt_int("c", b.c, 0);
  opt_int("groups", b.groups, 1);
  if (j.contains("seed")) b.seed = static_cast<std::uint64_t>(detail::get_int(j["seed"], "seed", 0));
  if (j.contains("local_states")) {
    const auto& ls = j["local_states"];
    b.local_states.clear();
    if (ls.is_array()) {
      if (ls.empty()) throw SchemaError("local_states", "expected at least one bound");
      for (std::size_t i = 0; i < ls.size(); ++i) b.local_states.push_back(detail::get_int(ls[i], child_path(std::string("local_states"), i), 1));
    } else {
      b.local_states.push_back(detail::get_int(ls, "local_states", 1));
    }
  }
  if (j.contains("budgets")) b.budgets = budgets_from_json(j["budgets"], "budgets");
  return b;
}

std::string format_seconds(double s) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(6);
  os << s;
  return os.str();
}

int cmd_bench(const std::string& file, const std::string& csv_path, int repeat, unsigned jobs, std::ostream& out,
              std::ostream& err) {
  const BenchConfig cfg = load_bench(read_file(file));
  const Signature base = generator_signature(cfg.agents, cfg.propositions, cfg.semantics);

  std::ostringstream csv;
  csv << "Id,K,C,time_seconds";
  if (cfg.semantics == Semantics::Imperfect)
    for (int l : cfg.local_states) csv << ",L=" << l;
  csv << ",status\n";

  json rows = json::array();
  for (int id = 1; id <= cfg.instances; ++id) {
    GeneratorParams gp{cfg.groups, cfg.k, cfg.c, cfg.propositions, cfg.agents, cfg.seed + static_cast<std::uint64_t>(id - 1)};
    const Formula f = generate(gp);
    const auto m = metrics(f);
    std::vector<double> medians;
    std::vector<std::string> statuses;
    for (int l : cfg.local_states) {
      Problem p;
      p.signature = base;
      for (auto& a : p.signature.agents) {
        a.local_states = l;
        a.actions = cfg.actions;
      }
      p.formula = print(f, base);
      p.budgets = cfg.budgets;
      std::vector<double> times;
      VerdictStatus status = VerdictStatus::Unknown;
      for (int r = 0; r < repeat; ++r) {
        Verdict v = synthesize(p, {jobs, {}, true});
        status = v.status;
        times.push_back(v.stats.wall_ms / 1000.0);
      }
      std::sort(times.begin(), times.end());
      medians.push_back(times[times.size() / 2]);
      statuses.emplace_back(to_string(status));
      err << "bench: instance " << id << " L=" << l << " " << statuses.back() << " " << format_seconds(medians.back())
          << "s\n";
    }
    csv << id << ',' << m.k << ',' << m.c << ',' << format_seconds(medians.front());
    if (cfg.semantics == Semantics::Imperfect)
      for (double t : medians) csv << ',' << format_seconds(t);
    std::string joined;
    for (const auto& s : statuses) joined += (joined.empty() ? "" : "/") + s;
    csv << ',' << joined << '\n';
    rows.push_back(json{{"id", id}, {"K", m.k}, {"C", m.c}, {"formula", print(f, base)}, {"status", statuses}});
  }
  if (csv_path.empty()) {
    out << csv.str();
  } else {
    write_file(csv_path, csv.str());
    out << json{{"csv", csv_path}, {"rows", rows}}.dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bounded satisfiability and model synthesis for ATL", "atl-forge"};
  app.require_subcommand(1);

  std::string file, dot_path, varmap_path, csv_path;
  unsigned jobs = 1;
  int repeat = 1;
  GeneratorParams gp;
  std::string gen_semantics = "perfect";

  auto* solve = app.add_subcommand("solve", "decide a problem file and synthesize a model");
  solve->add_option("file", file, "problem JSON")->required();
  solve->add_option("--dot", dot_path, "write the synthesized model as Graphviz DOT");
  solve->add_option("--varmap", varmap_path, "write the SAT variable map of the last signature");
  solve->add_option("--jobs", jobs, "signatures solved in parallel")->check(CLI::PositiveNumber);

  auto* orc = app.add_subcommand("oracle", "decide a problem file by exhaustive enumeration");
  orc->add_option("file", file, "problem JSON")->required();
  orc->add_option("--dot", dot_path, "write the model found as Graphviz DOT");

  auto* gen = app.add_subcommand("gen", "print a random formula with exact metrics");
  gen->add_option("--k", gp.target_k, "strategic modalities")->required()->check(CLI::NonNegativeNumber);
  gen->add_option("--c", gp.target_c, "Boolean connectives")->required()->check(CLI::NonNegativeNumber);
  gen->add_option("--groups", gp.groups, "distinct coalitions")->check(CLI::PositiveNumber);
  gen->add_option("--props", gp.propositions, "propositions")->check(CLI::PositiveNumber);
  gen->add_option("--agents", gp.agents, "agents")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gp.seed, "random seed");

  auto* bench = app.add_subcommand("bench", "time generated instances and emit CSV");
  bench->add_option("file", file, "bench configuration JSON")->required();
  bench->add_option("--csv", csv_path, "write the table here instead of standard output");
  bench->add_option("--repeat", repeat, "repetitions per cell (median reported)")->check(CLI::PositiveNumber);
  bench->add_option("--jobs", jobs, "signatures solved in parallel")->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  try {
    if (*gen) {
      const Formula f = generate(gp);
      const Signature sig = generator_signature(gp.agents, gp.propositions);
      const auto m = metrics(f);
      json agents = json::array();
      for (const auto& a : sig.agents) agents.push_back(a.name);
      out << json{{"formula", print(f, sig)}, {"K", m.k}, {"C", m.c}, {"agents", agents}, {"propositions", sig.propositions}}.dump(2)
          << '\n';
      return 0;
    }
    if (*bench) return cmd_bench(file, csv_path, repeat, jobs, out, err);

    const Problem p = load_problem(read_file(file));
    const Verdict v = *orc ? oracle(p) : synthesize(p, {jobs, {}, true});
    if (v.model) verify_model(*v.model, parse(p.formula, p.signature));
    if (!dot_path.empty() && v.model) write_file(dot_path, export_dot(expand(*v.model)));
    if (!varmap_path.empty()) {
      const Signature& sig = v.signature ? *v.signature : schedule(p).back();
      write_file(varmap_path, VarCatalogue(sig).dump());
    }
    out << verdict_to_json(v, p) << '\n';
    return exit_code(v.status);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kInputError;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace atlforge::cli
