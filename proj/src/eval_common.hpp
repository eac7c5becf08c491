#pragma once

// Bottom-up evaluation skeleton shared by the explicit checkers.

#include <unordered_map>
#include <utility>
#include <vector>

#include "atlforge/formula.hpp"
#include "atlforge/model.hpp"
#include "atlforge/state_set.hpp"

namespace atlforge::detail {

/// Evaluates Boolean structure by set algebra and delegates strategic nodes
/// to `strategic(node, left_set, right_set_or_null)`.
template <class Strategic>
std::vector<std::pair<Formula, StateSet>> evaluate_bottom_up(const GlobalModel& gm, const Formula& f,
                                                             Strategic&& strategic) {
  const std::size_t n = gm.state_count();
  std::vector<std::pair<Formula, StateSet>> out;
  std::unordered_map<const Formula::Node*, std::size_t> slot;
  auto get = [&](const Formula& g) -> const StateSet& { return out[slot.at(g.id())].second; };

  for (const auto& g : postorder(f)) {
    StateSet s;
    switch (g.kind()) {
      case FormulaKind::True:
        s = StateSet::full(n);
        break;
      case FormulaKind::Atom:
        s = gm.valuation(g.prop());
        break;
      case FormulaKind::Not:
        s = get(g.left()).complement();
        break;
      case FormulaKind::And:
        s = get(g.left()) & get(g.right());
        break;
      case FormulaKind::Or:
        s = get(g.left()) | get(g.right());
        break;
      case FormulaKind::Implies:
        s = get(g.left()).complement() | get(g.right());
        break;
      case FormulaKind::Enforce:
        s = strategic(g, get(g.left()), g.has_right() ? &get(g.right()) : nullptr);
        break;
    }
    slot.emplace(g.id(), out.size());
    out.emplace_back(g, std::move(s));
  }
  return out;
}

}  // namespace atlforge::detail
