#include "atlforge/checker_perfect.hpp"

#include <algorithm>

#include "eval_common.hpp"

namespace atlforge::perfect {

StateSet pre(const GlobalModel& gm, Coalition coalition, const StateSet& target) {
  const std::size_t n = gm.agent_count();
  StateSet out(gm.state_count());
  if (target.empty()) return out;

  // Key = the coalition's components of a joint action, mixed radix.
  std::vector<std::size_t> mult(n, 0);
  std::size_t keys = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(coalition >> i & 1U)) continue;
    mult[i] = keys;
    keys *= static_cast<std::size_t>(gm.signature().agents[i].actions);
  }
  std::vector<char> seen(keys), good(keys);

  for (std::size_t g = 0; g < gm.state_count(); ++g) {
    std::fill(seen.begin(), seen.end(), 0);
    std::fill(good.begin(), good.end(), 1);
    for (auto ja : gm.enabled(g)) {
      std::size_t key = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (mult[i]) key += static_cast<std::size_t>(gm.action(ja, i)) * mult[i];
      seen[key] = 1;
      if (!target.contains(gm.succ(g, ja))) good[key] = 0;
    }
    for (std::size_t k = 0; k < keys; ++k) {
      if (seen[k] && good[k]) {
        out.insert(g);
        break;
      }
    }
  }
  return out;
}

namespace {

struct Engine {
  const GlobalModel& gm;
  FixpointStats* stats;

  void record(std::size_t iterations) {
    if (stats) stats->max_iterations = std::max(stats->max_iterations, iterations);
  }

  StateSet always(Coalition c, const StateSet& body) {
    StateSet z = body;
    std::size_t it = 0;
    for (;;) {
      ++it;
      StateSet next = body & pre(gm, c, z);
      if (next == z) break;
      z = std::move(next);
    }
    record(it);
    return z;
  }

  StateSet until(Coalition c, const StateSet& hold, const StateSet& goal) {
    StateSet z(gm.state_count());
    std::size_t it = 0;
    for (;;) {
      ++it;
      StateSet next = goal | (hold & pre(gm, c, z));
      if (next == z) break;
      z = std::move(next);
    }
    record(it);
    return z;
  }

  StateSet operator()(const Formula& g, const StateSet& left, const StateSet* right) {
    switch (g.temporal()) {
      case TemporalOp::Next:
        return pre(gm, g.coalition(), left);
      case TemporalOp::Always:
        return always(g.coalition(), left);
      case TemporalOp::Until:
        return until(g.coalition(), left, *right);
      case TemporalOp::Eventually:
        return until(g.coalition(), StateSet::full(gm.state_count()), left);
    }
    return {};
  }
};

}  // namespace

std::vector<std::pair<Formula, StateSet>> extensions(const GlobalModel& gm, const Formula& f, FixpointStats* stats) {
  return detail::evaluate_bottom_up(gm, f, Engine{gm, stats});
}

StateSet extension(const GlobalModel& gm, const Formula& f, FixpointStats* stats) {
  return extensions(gm, f, stats).back().second;
}

bool check(const GlobalModel& gm, const Formula& f, std::size_t state) { return extension(gm, f).contains(state); }

std::string dump_extensions(const GlobalModel& gm, const Formula& f) {
  std::string out;
  for (const auto& [g, s] : extensions(gm, f)) out += print(g, gm.signature()) + "\t" + s.to_string() + "\n";
  return out;
}

}  // namespace atlforge::perfect
