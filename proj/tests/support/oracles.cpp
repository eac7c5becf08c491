#include "oracles.hpp"

#include <functional>
#include <stdexcept>

namespace atlforge::testing {

namespace {

using Graph = std::vector<std::vector<std::size_t>>;

// choice[g][i] = action of coalition member i at global state g.
Graph outcome_graph(const GlobalModel& gm, Coalition coal, const std::vector<std::vector<int>>& choice) {
  Graph out(gm.state_count());
  for (std::size_t g = 0; g < gm.state_count(); ++g) {
    for (auto ja : gm.enabled(g)) {
      bool follows = true;
      for (std::size_t i = 0; i < gm.agent_count(); ++i)
        if ((coal >> i & 1U) && gm.action(ja, i) != choice[g][i]) follows = false;
      if (follows) out[g].push_back(gm.succ(g, ja));
    }
  }
  return out;
}

std::vector<bool> reachable(const Graph& graph, std::size_t s) {
  std::vector<bool> seen(graph.size(), false);
  std::vector<std::size_t> stack{s};
  seen[s] = true;
  while (!stack.empty()) {
    auto g = stack.back();
    stack.pop_back();
    for (auto t : graph[g])
      if (!seen[t]) {
        seen[t] = true;
        stack.push_back(t);
      }
  }
  return seen;
}

bool all_paths_until(const Graph& graph, std::size_t s, const StateSet& hold, const StateSet& goal) {
  // Explore the states a path can visit before reaching goal; every one must
  // satisfy hold and none may lie on a cycle.
  enum Mark { White, Grey, Black };
  std::vector<Mark> mark(graph.size(), White);
  std::function<bool(std::size_t)> dfs = [&](std::size_t g) {
    if (goal.contains(g)) return true;
    if (!hold.contains(g)) return false;
    if (mark[g] == Grey) return false;
    if (mark[g] == Black) return true;
    mark[g] = Grey;
    for (auto t : graph[g])
      if (!dfs(t)) return false;
    mark[g] = Black;
    return true;
  };
  return dfs(s);
}

}  // namespace

namespace {

StateSet extension_impl(const GlobalModel& gm, const Formula& f, bool uniform);

// Temporal operands of a strategic formula with F rewritten as true U.
std::pair<StateSet, StateSet> operands(const GlobalModel& gm, const Formula& f, bool uniform) {
  const std::size_t n = gm.state_count();
  StateSet left = extension_impl(gm, f.left(), uniform);
  StateSet right = f.has_right() ? extension_impl(gm, f.right(), uniform) : StateSet(n);
  if (f.temporal() == TemporalOp::Eventually) return {StateSet::full(n), left};
  return {left, right};
}

bool holds_on_outcomes(const Graph& graph, TemporalOp op, const StateSet& left, const StateSet& right,
                       std::size_t s) {
  bool ok = true;
  switch (op) {
    case TemporalOp::Next:
      for (auto t : graph[s]) ok = ok && left.contains(t);
      break;
    case TemporalOp::Always: {
      auto seen = reachable(graph, s);
      for (std::size_t t = 0; t < graph.size(); ++t) ok = ok && (!seen[t] || left.contains(t));
      break;
    }
    case TemporalOp::Until:
    case TemporalOp::Eventually:
      ok = all_paths_until(graph, s, left, right);
      break;
  }
  return ok;
}

StateSet extension_impl(const GlobalModel& gm, const Formula& f, bool uniform) {
  const std::size_t n = gm.state_count();
  switch (f.kind()) {
    case FormulaKind::True:
      return StateSet::full(n);
    case FormulaKind::Atom:
      return gm.valuation(f.prop());
    case FormulaKind::Not:
      return extension_impl(gm, f.left(), uniform).complement();
    case FormulaKind::And:
      return extension_impl(gm, f.left(), uniform) & extension_impl(gm, f.right(), uniform);
    case FormulaKind::Or:
      return extension_impl(gm, f.left(), uniform) | extension_impl(gm, f.right(), uniform);
    case FormulaKind::Implies:
      return extension_impl(gm, f.left(), uniform).complement() | extension_impl(gm, f.right(), uniform);
    case FormulaKind::Enforce:
      break;
  }
  const Coalition coal = f.coalition();
  const auto [left, right] = operands(gm, f, uniform);

  // Odometer over decision slots, each ranging over the member's protocol:
  // (global state, member) for perfect information, (member, local state)
  // for uniform strategies.
  struct Slot {
    std::size_t member;
    int local;
    std::size_t state;
  };
  std::vector<Slot> slots;
  if (uniform) {
    for (std::size_t i = 0; i < gm.agent_count(); ++i)
      if (coal >> i & 1U)
        for (int l = 0; l < gm.signature().agents[i].local_states; ++l) slots.push_back({i, l, 0});
  } else {
    for (std::size_t g = 0; g < n; ++g)
      for (std::size_t i = 0; i < gm.agent_count(); ++i)
        if (coal >> i & 1U) slots.push_back({i, gm.local(g, i), g});
  }
  std::vector<std::size_t> digit(slots.size(), 0);
  std::vector<std::vector<int>> choice(n, std::vector<int>(gm.agent_count(), -1));

  StateSet out(n);
  for (;;) {
    for (std::size_t k = 0; k < slots.size(); ++k) {
      const auto& sl = slots[k];
      const int a = gm.protocol(sl.member, sl.local)[digit[k]];
      if (uniform) {
        for (std::size_t g = 0; g < n; ++g)
          if (gm.local(g, sl.member) == sl.local) choice[g][sl.member] = a;
      } else {
        choice[sl.state][sl.member] = a;
      }
    }
    const Graph graph = outcome_graph(gm, coal, choice);
    for (std::size_t s = 0; s < n; ++s)
      if (!out.contains(s) && holds_on_outcomes(graph, f.temporal(), left, right, s)) out.insert(s);
    std::size_t k = 0;
    for (; k < slots.size(); ++k) {
      const auto& sl = slots[k];
      if (++digit[k] < gm.protocol(sl.member, sl.local).size()) break;
      digit[k] = 0;
    }
    if (k == slots.size()) break;
  }
  return out;
}

}  // namespace

StateSet path_extension(const GlobalModel& gm, const Formula& f) { return extension_impl(gm, f, false); }

StateSet uniform_path_extension(const GlobalModel& gm, const Formula& f) { return extension_impl(gm, f, true); }

bool strategy_enforces(const GlobalModel& gm, const Formula& strategic, const std::vector<int>& members,
                       const std::vector<std::vector<int>>& actions, std::size_t state) {
  std::vector<std::vector<int>> choice(gm.state_count(), std::vector<int>(gm.agent_count(), -1));
  for (std::size_t g = 0; g < gm.state_count(); ++g)
    for (std::size_t k = 0; k < members.size(); ++k) {
      const auto i = static_cast<std::size_t>(members[k]);
      choice[g][i] = actions[k][static_cast<std::size_t>(gm.local(g, i))];
    }
  const auto [left, right] = operands(gm, strategic, true);
  return holds_on_outcomes(outcome_graph(gm, strategic.coalition(), choice), strategic.temporal(), left, right, state);
}

StateSet ctl_next(const GlobalModel& gm, const StateSet& target, bool universal) {
  StateSet out(gm.state_count());
  for (std::size_t g = 0; g < gm.state_count(); ++g) {
    bool all = true, some = false;
    for (auto ja : gm.enabled(g)) {
      bool in = target.contains(gm.succ(g, ja));
      all = all && in;
      some = some || in;
    }
    if (universal ? all : some) out.insert(g);
  }
  return out;
}

StateSet ctl_always(const GlobalModel& gm, const StateSet& body, bool universal) {
  StateSet z = body;
  for (;;) {
    StateSet next = body & ctl_next(gm, z, universal);
    if (next == z) return z;
    z = next;
  }
}

StateSet ctl_until(const GlobalModel& gm, const StateSet& hold, const StateSet& goal, bool universal) {
  StateSet z = goal;
  for (;;) {
    StateSet next = goal | (hold & ctl_next(gm, z, universal));
    if (next == z) return z;
    z = next;
  }
}

bool brute_force_sat(const sat::Cnf& cnf) {
  if (cnf.num_vars > 24) throw std::invalid_argument("too many variables for brute force");
  const std::uint64_t total = std::uint64_t{1} << cnf.num_vars;
  for (std::uint64_t bits = 0; bits < total; ++bits) {
    bool all = true;
    for (const auto& c : cnf.clauses) {
      bool sat = false;
      for (auto l : c)
        if (((bits >> l.var()) & 1U) != (l.negative() ? 1U : 0U)) {
          sat = true;
          break;
        }
      if (!sat) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

}  // namespace atlforge::testing
