#include "atlforge/checker_imperfect.hpp"

#include <json.hpp>

#include "eval_common.hpp"

namespace atlforge::imperfect {

StrategyEnumerator::StrategyEnumerator(const GlobalModel& gm, Coalition coalition) : gm_(&gm) {
  for (std::size_t i = 0; i < gm.agent_count(); ++i) {
    if (!(coalition >> i & 1U)) continue;
    const int ls = gm.signature().agents[i].local_states;
    current_.agents.push_back(static_cast<int>(i));
    std::vector<int> acts;
    for (int l = 0; l < ls; ++l) {
      const auto& prot = gm.protocol(i, l);
      acts.push_back(prot.front());
      count_ *= prot.size();
    }
    current_.actions.push_back(std::move(acts));
    cursor_.emplace_back(static_cast<std::size_t>(ls), 0);
  }
}

void StrategyEnumerator::advance() {
  // Odometer: the last (agent, local state) position moves fastest.
  for (std::size_t k = cursor_.size(); k-- > 0;) {
    const auto agent = static_cast<std::size_t>(current_.agents[k]);
    for (std::size_t l = cursor_[k].size(); l-- > 0;) {
      const auto& prot = gm_->protocol(agent, static_cast<int>(l));
      if (++cursor_[k][l] < prot.size()) {
        current_.actions[k][l] = prot[cursor_[k][l]];
        return;
      }
      cursor_[k][l] = 0;
      current_.actions[k][l] = prot.front();
    }
  }
  done_ = true;
}

std::vector<UniformStrategy> strategies(const GlobalModel& gm, Coalition coalition) {
  std::vector<UniformStrategy> out;
  for (StrategyEnumerator e(gm, coalition); !e.done(); e.advance()) out.push_back(e.current());
  return out;
}

bool conforms(const GlobalModel& gm, const UniformStrategy& s, std::size_t g, std::size_t ja) {
  for (std::size_t k = 0; k < s.agents.size(); ++k) {
    const auto agent = static_cast<std::size_t>(s.agents[k]);
    if (gm.action(ja, agent) != s.actions[k][static_cast<std::size_t>(gm.local(g, agent))]) return false;
  }
  return true;
}

ModelView prune(const GlobalModel& gm, const UniformStrategy& s) {
  ModelView v;
  v.gm_ = &gm;
  v.enabled_.resize(gm.state_count());
  for (std::size_t g = 0; g < gm.state_count(); ++g)
    for (auto ja : gm.enabled(g))
      if (conforms(gm, s, g, ja)) v.enabled_[g].push_back(ja);
  return v;
}

StateSet all_next(const ModelView& v, const StateSet& target) {
  StateSet out(v.state_count());
  for (std::size_t g = 0; g < v.state_count(); ++g) {
    bool all = true;
    for (auto ja : v.enabled(g)) {
      if (!target.contains(v.succ(g, ja))) {
        all = false;
        break;
      }
    }
    if (all) out.insert(g);
  }
  return out;
}

StateSet all_always(const ModelView& v, const StateSet& body) {
  StateSet z = body;
  for (;;) {
    StateSet next = body & all_next(v, z);
    if (next == z) return z;
    z = std::move(next);
  }
}

StateSet all_until(const ModelView& v, const StateSet& hold, const StateSet& goal) {
  StateSet z(v.state_count());
  for (;;) {
    StateSet next = goal | (hold & all_next(v, z));
    if (next == z) return z;
    z = std::move(next);
  }
}

namespace {

StateSet outcome_set(const ModelView& v, const Formula& g, const StateSet& left, const StateSet* right) {
  switch (g.temporal()) {
    case TemporalOp::Next:
      return all_next(v, left);
    case TemporalOp::Always:
      return all_always(v, left);
    case TemporalOp::Until:
      return all_until(v, left, *right);
    case TemporalOp::Eventually:
      return all_until(v, StateSet::full(v.state_count()), left);
  }
  return {};
}

struct Engine {
  const GlobalModel& gm;

  StateSet operator()(const Formula& g, const StateSet& left, const StateSet* right) const {
    StateSet result(gm.state_count());
    for (StrategyEnumerator e(gm, g.coalition()); !e.done(); e.advance()) {
      result |= outcome_set(prune(gm, e.current()), g, left, right);
      if (result.count() == gm.state_count()) break;
    }
    return result;
  }
};

}  // namespace

std::vector<std::pair<Formula, StateSet>> extensions(const GlobalModel& gm, const Formula& f) {
  return detail::evaluate_bottom_up(gm, f, Engine{gm});
}

StateSet extension(const GlobalModel& gm, const Formula& f) { return extensions(gm, f).back().second; }

bool check_ir(const GlobalModel& gm, const Formula& f, std::size_t state) { return extension(gm, f).contains(state); }

std::optional<UniformStrategy> witness(const GlobalModel& gm, const Formula& strategic, std::size_t state) {
  if (strategic.kind() != FormulaKind::Enforce) return std::nullopt;
  StateSet left = extension(gm, strategic.left());
  std::optional<StateSet> right;
  if (strategic.has_right()) right = extension(gm, strategic.right());
  for (StrategyEnumerator e(gm, strategic.coalition()); !e.done(); e.advance()) {
    auto s = outcome_set(prune(gm, e.current()), strategic, left, right ? &*right : nullptr);
    if (s.contains(state)) return e.current();
  }
  return std::nullopt;
}

std::string strategy_to_json(const UniformStrategy& s, const Signature& sig) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t k = 0; k < s.agents.size(); ++k) {
    nlohmann::json m = nlohmann::json::object();
    for (std::size_t l = 0; l < s.actions[k].size(); ++l) m[std::to_string(l)] = s.actions[k][l];
    j[sig.agents[static_cast<std::size_t>(s.agents[k])].name] = m;
  }
  return j.dump();
}

}  // namespace atlforge::imperfect
