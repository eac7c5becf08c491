#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "atlforge/formula.hpp"
#include "atlforge/model.hpp"
#include "atlforge/state_set.hpp"

/// Memoryless imperfect-information (uniform) ATL with objective outcomes:
/// strategies map each coalition member's local state to an action, and
/// paths start at the evaluated state only.
namespace atlforge::imperfect {

struct UniformStrategy {
  /// Coalition members, ascending agent index.
  std::vector<int> agents;
  /// actions[k][l] is agent agents[k]'s action at its local state l.
  std::vector<std::vector<int>> actions;

  friend bool operator==(const UniformStrategy&, const UniformStrategy&) = default;
};

/// Lexicographic enumeration over (agent, local state, action index).
class StrategyEnumerator {
 public:
  StrategyEnumerator(const GlobalModel& gm, Coalition coalition);

  bool done() const { return done_; }
  const UniformStrategy& current() const { return current_; }
  void advance();

  /// Number of strategies the enumeration yields.
  std::size_t count() const { return count_; }

 private:
  const GlobalModel* gm_;
  UniformStrategy current_;
  std::vector<std::vector<std::size_t>> cursor_;
  std::size_t count_ = 1;
  bool done_ = false;
};

std::vector<UniformStrategy> strategies(const GlobalModel& gm, Coalition coalition);

/// Whether joint action ja at g agrees with the strategy.
bool conforms(const GlobalModel& gm, const UniformStrategy& s, std::size_t g, std::size_t ja);

/// The model restricted to joint actions that follow a strategy.
class ModelView {
 public:
  const GlobalModel& model() const { return *gm_; }
  const std::vector<std::uint32_t>& enabled(std::size_t g) const { return enabled_[g]; }
  std::size_t succ(std::size_t g, std::size_t ja) const { return gm_->succ(g, ja); }
  std::size_t state_count() const { return gm_->state_count(); }

  friend ModelView prune(const GlobalModel& gm, const UniformStrategy& s);

 private:
  const GlobalModel* gm_ = nullptr;
  std::vector<std::vector<std::uint32_t>> enabled_;
};

ModelView prune(const GlobalModel& gm, const UniformStrategy& s);

/// Universal-path operators on a view: AX, AG and AU.
StateSet all_next(const ModelView& v, const StateSet& target);
StateSet all_always(const ModelView& v, const StateSet& body);
StateSet all_until(const ModelView& v, const StateSet& hold, const StateSet& goal);

/// Extension of every subformula, children before parents.
std::vector<std::pair<Formula, StateSet>> extensions(const GlobalModel& gm, const Formula& f);
StateSet extension(const GlobalModel& gm, const Formula& f);
bool check_ir(const GlobalModel& gm, const Formula& f, std::size_t state);

/// Lexicographically least strategy witnessing a strategic formula at a
/// state, or nullopt when the formula fails there.
std::optional<UniformStrategy> witness(const GlobalModel& gm, const Formula& strategic, std::size_t state);

/// {"agent": {"local state": action, ...}, ...}
std::string strategy_to_json(const UniformStrategy& s, const Signature& sig);

}  // namespace atlforge::imperfect
