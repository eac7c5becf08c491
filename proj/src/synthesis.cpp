#include "atlforge/synthesis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <numeric>
#include <set>

#include "atlforge/checker_perfect.hpp"
#include "atlforge/encoding.hpp"
#include "atlforge/lemmas.hpp"
#include "atlforge/sat.hpp"

namespace atlforge {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool holds(const GlobalModel& gm, const Formula& f) {
  if (gm.signature().semantics == Semantics::Imperfect) return imperfect::check_ir(gm, f, gm.initial_state());
  return perfect::check(gm, f, gm.initial_state());
}

/// All vectors v with 1 <= v[i] <= max[i], lexicographic.
std::vector<std::vector<int>> boxes(const std::vector<int>& max) {
  std::vector<std::vector<int>> out;
  std::vector<int> v(max.size(), 1);
  for (;;) {
    out.push_back(v);
    std::size_t i = v.size();
    for (;;) {
      if (i == 0) return out;
      --i;
      if (v[i] < max[i]) {
        ++v[i];
        break;
      }
      v[i] = 1;
    }
  }
}

}  // namespace

std::string_view to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Sat:
      return "sat";
    case VerdictStatus::UnsatWithinBounds:
      return "unsat_within_bounds";
    case VerdictStatus::Unknown:
      return "unknown";
  }
  return "unknown";
}

void check_problem(const Problem& p) {
  p.signature.check();
  if (p.budgets.time_seconds && !(*p.budgets.time_seconds > 0)) throw ProblemError("budgets.time_seconds must be positive");
  if (p.max_total_states && *p.max_total_states == 0) throw ProblemError("search.max_total_states must be positive");
  if (p.mode == SearchMode::Fixed && p.max_total_states && p.signature.global_state_count() > *p.max_total_states)
    throw ProblemError("signature exceeds search.max_total_states");
  parse(p.formula, p.signature);
}

std::vector<Signature> schedule(const Problem& p) {
  if (p.mode == SearchMode::Fixed) return {p.signature};
  std::vector<int> max_l, max_a;
  for (const auto& a : p.signature.agents) {
    max_l.push_back(a.local_states);
    max_a.push_back(a.actions);
  }
  struct Entry {
    std::size_t total;
    std::vector<int> locals;
    std::vector<int> actions;
  };
  std::vector<Entry> entries;
  const auto action_vectors = boxes(max_a);
  for (const auto& locals : boxes(max_l)) {
    std::size_t total = 1;
    for (int l : locals) total *= static_cast<std::size_t>(l);
    if (p.max_total_states && total > *p.max_total_states) continue;
    for (const auto& acts : action_vectors) entries.push_back({total, locals, acts});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
    return std::tie(x.total, x.locals, x.actions) < std::tie(y.total, y.locals, y.actions);
  });
  std::vector<Signature> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    Signature s = p.signature;
    for (std::size_t i = 0; i < s.agents.size(); ++i) {
      s.agents[i].local_states = e.locals[i];
      s.agents[i].actions = e.actions[i];
    }
    out.push_back(std::move(s));
  }
  return out;
}

void verify_model(const ModelSpec& spec, const Formula& f) {
  auto violations = validate(spec);
  if (!violations.empty()) throw std::logic_error("synthesized model is invalid: " + violations.front().message);
  if (!holds(expand(spec), f)) throw std::logic_error("synthesized model fails the exact check");
}

std::vector<Witness> witness_strategies(const GlobalModel& gm, const Formula& f) {
  std::vector<Witness> out;
  if (gm.signature().semantics != Semantics::Imperfect) return out;
  std::set<std::string> seen;
  for (const auto& g : postorder(f)) {
    if (g.kind() != FormulaKind::Enforce) continue;
    std::string text = print(g, gm.signature());
    if (!seen.insert(text).second) continue;
    if (auto s = imperfect::witness(gm, g, gm.initial_state())) out.push_back({std::move(text), std::move(*s)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// solver sessions

namespace {

struct Outcome {
  sat::Status status = sat::Status::Unknown;
  std::optional<ModelSpec> model;
  sat::SolverStats sat_stats;
  theory::TheoryStats theory_stats;
  double wall_ms = 0;
};

Outcome solve_signature(const Signature& sig, const Formula& f, const Budgets& budgets,
                        std::optional<Clock::time_point> deadline, const SynthesisOptions& options) {
  const auto t0 = Clock::now();
  Outcome out;
  Encoding enc = build_encoding(sig);
  if (options.lemmas && sig.semantics == Semantics::Perfect) add_fixpoint_lemmas(enc.catalogue, f, enc.cnf);
  sat::Solver solver;
  solver.add_cnf(enc.cnf);
  theory::AtlTheory th(enc.catalogue, f, options.theory);
  std::vector<bool> visible(static_cast<std::size_t>(solver.num_vars()), false);
  std::fill(visible.begin(), visible.begin() + static_cast<std::ptrdiff_t>(enc.catalogue.size()), true);
  solver.set_theory(&th, std::move(visible));

  sat::Limits limits;
  if (budgets.conflicts) limits.max_conflicts = *budgets.conflicts;
  limits.deadline = deadline;
  out.status = solver.solve(limits);
  if (out.status == sat::Status::Sat) {
    out.model = decode(enc.catalogue, solver.model());
    verify_model(*out.model, f);
  }
  out.sat_stats = solver.stats();
  out.theory_stats = th.stats();
  out.wall_ms = ms_since(t0);
  return out;
}

VerdictStatus status_of(sat::Status s) {
  switch (s) {
    case sat::Status::Sat:
      return VerdictStatus::Sat;
    case sat::Status::Unsat:
      return VerdictStatus::UnsatWithinBounds;
    case sat::Status::Unknown:
      return VerdictStatus::Unknown;
  }
  return VerdictStatus::Unknown;
}

}  // namespace

Verdict synthesize(const Problem& p, const SynthesisOptions& options) {
  const auto t0 = Clock::now();
  check_problem(p);
  const Formula f = parse(p.formula, p.signature);
  const auto candidates = schedule(p);
  std::optional<Clock::time_point> deadline;
  if (p.budgets.time_seconds)
    deadline = t0 + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(*p.budgets.time_seconds));

  Verdict v;
  bool unknown = false;
  const std::size_t jobs = std::max(1U, options.jobs);
  for (std::size_t start = 0; start < candidates.size() && !v.model; start += jobs) {
    if (deadline && Clock::now() >= *deadline) {
      unknown = true;
      break;
    }
    const std::size_t end = std::min(candidates.size(), start + jobs);
    std::vector<Outcome> batch;
    if (end - start == 1) {
      batch.push_back(solve_signature(candidates[start], f, p.budgets, deadline, options));
    } else {
      std::vector<std::future<Outcome>> futures;
      for (std::size_t k = start; k < end; ++k)
        futures.push_back(std::async(std::launch::async, solve_signature, std::cref(candidates[k]), std::cref(f),
                                     std::cref(p.budgets), deadline, std::cref(options)));
      for (auto& fu : futures) batch.push_back(fu.get());
    }
    // Outcomes are folded in schedule order, so the first Sat wins no
    // matter which session finished first.
    for (std::size_t k = 0; k < batch.size(); ++k) {
      auto& o = batch[k];
      const auto& sig = candidates[start + k];
      v.stats.attempts.push_back({sig.shape(), status_of(o.status), o.wall_ms, o.sat_stats.conflicts});
      v.stats.sat_conflicts += o.sat_stats.conflicts;
      v.stats.theory += o.theory_stats;
      ++v.stats.signatures_tried;
      if (o.status == sat::Status::Unknown) unknown = true;
      if (o.status == sat::Status::Sat) {
        v.signature = sig;
        v.model = std::move(o.model);
        break;
      }
    }
  }

  if (v.model) {
    v.status = VerdictStatus::Sat;
    v.witnesses = witness_strategies(expand(*v.model), f);
  } else {
    v.status = unknown ? VerdictStatus::Unknown : VerdictStatus::UnsatWithinBounds;
  }
  v.stats.wall_ms = ms_since(t0);
  return v;
}

// ---------------------------------------------------------------------------
// brute-force oracle

namespace {

/// Per-proposition state classes that observability forces to agree.
std::vector<std::vector<std::size_t>> valuation_classes(const Signature& sig, int prop) {
  const auto idx = state_index(sig);
  const std::size_t n = idx.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  if (sig.semantics == Semantics::Imperfect) {
    for (std::size_t i = 0; i < sig.agents.size(); ++i) {
      const auto& obs = sig.agents[i].observable;
      if (std::find(obs.begin(), obs.end(), prop) == obs.end()) continue;
      for (std::size_t g = 0; g < n; ++g)
        for (std::size_t h = g + 1; h < n; ++h)
          if (idx.component(g, i) == idx.component(h, i)) parent[find(h)] = find(g);
    }
  }
  std::vector<std::vector<std::size_t>> classes;
  std::vector<std::size_t> slot(n, n);
  for (std::size_t g = 0; g < n; ++g) {
    std::size_t r = find(g);
    if (slot[r] == n) {
      slot[r] = classes.size();
      classes.emplace_back();
    }
    classes[slot[r]].push_back(g);
  }
  return classes;
}

std::vector<int> formula_props(const Formula& f) {
  std::set<int> s;
  for (const auto& g : postorder(f))
    if (g.kind() == FormulaKind::Atom) s.insert(g.prop());
  return {s.begin(), s.end()};
}

/// Odometer over protocol masks, one per (agent, local state).
class ProtocolEnumerator {
 public:
  explicit ProtocolEnumerator(const Signature& sig) : sig_(sig) {
    for (std::size_t i = 0; i < sig.agents.size(); ++i)
      for (int l = 0; l < sig.agents[i].local_states; ++l) slots_.emplace_back(i, l);
    masks_.assign(slots_.size(), 1);
  }

  bool done() const { return done_; }
  unsigned mask(std::size_t agent, int l) const {
    std::size_t k = 0;
    for (std::size_t i = 0; i < agent; ++i) k += static_cast<std::size_t>(sig_.agents[i].local_states);
    return masks_[k + static_cast<std::size_t>(l)];
  }
  void advance() {
    for (std::size_t k = slots_.size(); k-- > 0;) {
      const unsigned full = (1U << sig_.agents[slots_[k].first].actions) - 1;
      if (masks_[k] < full) {
        ++masks_[k];
        return;
      }
      masks_[k] = 1;
    }
    done_ = true;
  }

 private:
  const Signature& sig_;
  std::vector<std::pair<std::size_t, int>> slots_;
  std::vector<unsigned> masks_;
  bool done_ = false;
};

struct Entry {
  std::size_t agent;
  int local;
  std::size_t joint;
};

/// Transition entries that some enabled joint action can reach; the rest
/// never influence the semantics and stay at local state 0.
std::vector<Entry> relevant_entries(const Signature& sig, const ProtocolEnumerator& pe) {
  const auto joints = joint_action_index(sig);
  const std::size_t n = sig.agents.size();
  std::vector<unsigned> any(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (int l = 0; l < sig.agents[i].local_states; ++l) any[i] |= pe.mask(i, l);
  std::vector<Entry> out;
  for (std::size_t i = 0; i < n; ++i) {
    for (int l = 0; l < sig.agents[i].local_states; ++l) {
      for (std::size_t ja = 0; ja < joints.size(); ++ja) {
        bool ok = pe.mask(i, l) >> joints.component(ja, i) & 1U;
        for (std::size_t j = 0; ok && j < n; ++j)
          if (j != i) ok = any[j] >> joints.component(ja, j) & 1U;
        if (ok) out.push_back({i, l, ja});
      }
    }
  }
  return out;
}

double protocol_count(const Signature& sig) {
  double c = 1;
  for (const auto& a : sig.agents) c *= std::pow(std::exp2(a.actions) - 1, a.local_states);
  return c;
}

}  // namespace

std::uint64_t oracle_space(const Signature& sig, const Formula& f) {
  constexpr double kCap = 1.8e19;
  double bits = 0;
  for (int p : formula_props(f)) bits += static_cast<double>(valuation_classes(sig, p).size());
  const double vals = std::exp2(bits);
  if (protocol_count(sig) * vals > kCap) return UINT64_MAX;
  double total = 0;
  for (ProtocolEnumerator pe(sig); !pe.done(); pe.advance()) {
    double t = 1;
    for (const auto& e : relevant_entries(sig, pe)) t *= sig.agents[e.agent].local_states;
    total += t * vals;
    if (total > kCap) return UINT64_MAX;
  }
  return static_cast<std::uint64_t>(total);
}

namespace {

std::optional<ModelSpec> oracle_signature(const Signature& sig, const Formula& f) {
  const std::size_t n = sig.agents.size();
  const std::size_t states = sig.global_state_count();
  const std::size_t joints = sig.joint_action_count();
  const auto props = formula_props(f);
  std::vector<std::vector<std::vector<std::size_t>>> classes;
  std::size_t bits = 0;
  for (int p : props) {
    classes.push_back(valuation_classes(sig, p));
    bits += classes.back().size();
  }

  ModelSpec spec;
  spec.signature = sig;
  spec.templates.resize(n);
  spec.valuation.assign(sig.propositions.size(), std::vector<bool>(states, false));
  for (ProtocolEnumerator pe(sig); !pe.done(); pe.advance()) {
    for (std::size_t i = 0; i < n; ++i) {
      auto& t = spec.templates[i];
      const int ls = sig.agents[i].local_states;
      t.protocol.assign(static_cast<std::size_t>(ls), {});
      t.transition.assign(static_cast<std::size_t>(ls), std::vector<int>(joints, 0));
      for (int l = 0; l < ls; ++l)
        for (int a = 0; a < sig.agents[i].actions; ++a)
          if (pe.mask(i, l) >> a & 1U) t.protocol[static_cast<std::size_t>(l)].push_back(a);
    }
    const auto entries = relevant_entries(sig, pe);
    for (;;) {
      GlobalModel gm = expand(spec);
      for (std::uint64_t code = 0; code < (std::uint64_t{1} << bits); ++code) {
        std::size_t bit = 0;
        for (std::size_t k = 0; k < props.size(); ++k) {
          StateSet s(states);
          for (const auto& cls : classes[k]) {
            if (code >> bit++ & 1U)
              for (auto g : cls) s.insert(g);
          }
          gm.set_valuation(props[k], std::move(s));
        }
        if (holds(gm, f)) {
          for (int p : props) {
            const auto& s = gm.valuation(p);
            for (std::size_t g = 0; g < states; ++g) spec.valuation[static_cast<std::size_t>(p)][g] = s.contains(g);
          }
          return spec;
        }
      }
      // Next transition table.
      bool advanced = false;
      for (std::size_t k = entries.size(); k-- > 0 && !advanced;) {
        const auto& e = entries[k];
        int& cell = spec.templates[e.agent].transition[static_cast<std::size_t>(e.local)][e.joint];
        if (cell + 1 < sig.agents[e.agent].local_states) {
          ++cell;
          advanced = true;
        } else {
          cell = 0;
        }
      }
      if (!advanced) break;
    }
  }
  return std::nullopt;
}

}  // namespace

Verdict oracle(const Problem& p, const OracleOptions& options) {
  const auto t0 = Clock::now();
  check_problem(p);
  const Formula f = parse(p.formula, p.signature);
  const auto candidates = schedule(p);
  for (const auto& sig : candidates) {
    const auto space = oracle_space(sig, f);
    if (space > options.guard)
      throw OracleGuardError("signature " + sig.shape() + " has " +
                             (space == UINT64_MAX ? std::string("too many") : std::to_string(space)) +
                             " candidate models, over the guard of " + std::to_string(options.guard));
  }
  Verdict v;
  for (const auto& sig : candidates) {
    const auto a0 = Clock::now();
    auto model = oracle_signature(sig, f);
    ++v.stats.signatures_tried;
    v.stats.attempts.push_back({sig.shape(), model ? VerdictStatus::Sat : VerdictStatus::UnsatWithinBounds, ms_since(a0), 0});
    if (model) {
      v.status = VerdictStatus::Sat;
      v.signature = sig;
      v.model = std::move(model);
      v.witnesses = witness_strategies(expand(*v.model), f);
      v.stats.wall_ms = ms_since(t0);
      return v;
    }
  }
  v.status = VerdictStatus::UnsatWithinBounds;
  v.stats.wall_ms = ms_since(t0);
  return v;
}

// ---------------------------------------------------------------------------
// full-observability embedding

Signature full_observability_embedding(const Signature& sig) {
  Signature out = sig;
  out.semantics = Semantics::Imperfect;
  const int states = static_cast<int>(sig.global_state_count());
  for (auto& a : out.agents) {
    a.local_states = states;
    a.observable.clear();
  }
  return out;
}

ModelSpec embed_model(const ModelSpec& spec) {
  const GlobalModel gm = expand(spec);
  ModelSpec out;
  out.signature = full_observability_embedding(spec.signature);
  const std::size_t states = gm.state_count();
  for (std::size_t i = 0; i < gm.agent_count(); ++i) {
    AgentTemplate t;
    for (std::size_t g = 0; g < states; ++g) {
      t.protocol.push_back(gm.protocol(i, gm.local(g, i)));
      std::vector<int> row;
      for (std::size_t ja = 0; ja < gm.joint_action_count(); ++ja) row.push_back(static_cast<int>(gm.succ(g, ja)));
      t.transition.push_back(std::move(row));
    }
    out.templates.push_back(std::move(t));
  }
  // Tuples are read through agent 0's component; only the diagonal is reachable.
  const auto idx = state_index(out.signature);
  for (std::size_t p = 0; p < spec.valuation.size(); ++p) {
    std::vector<bool> row(idx.size());
    for (std::size_t t = 0; t < idx.size(); ++t) row[t] = spec.valuation[p][static_cast<std::size_t>(idx.component(t, 0))];
    out.valuation.push_back(std::move(row));
  }
  return out;
}

}  // namespace atlforge
