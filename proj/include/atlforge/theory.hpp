#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "atlforge/encoding.hpp"
#include "atlforge/formula.hpp"
#include "atlforge/sat.hpp"
#include "atlforge/state_set.hpp"

namespace atlforge::theory {

/// Three-valued view of the catalogue variables.
///
/// Derived tables: per (agent, local state) the actions assigned enabled
/// ("sure") and those not assigned disabled ("possible"); per (global state,
/// joint action) the global successors consistent with the assignment.
class PartialModel {
 public:
  PartialModel(const VarCatalogue& cat, std::span<const sat::Value> values);

  const VarCatalogue& catalogue() const { return *cat_; }
  sat::Value value(sat::Var v) const { return values_[static_cast<std::size_t>(v)]; }
  bool total() const;

  std::size_t state_count() const { return cat_->states().size(); }
  std::size_t joint_count() const { return cat_->joint_actions().size(); }

  const std::vector<int>& sure_actions(std::size_t agent, int local) const { return sure_[agent][static_cast<std::size_t>(local)]; }
  const std::vector<int>& possible_actions(std::size_t agent, int local) const {
    return possible_[agent][static_cast<std::size_t>(local)];
  }
  const StateSet& successors(std::size_t g, std::size_t ja) const { return succ_[g * joint_count() + ja]; }
  const StateSet& atom_lo(int prop) const { return atom_lo_[static_cast<std::size_t>(prop)]; }
  const StateSet& atom_hi(int prop) const { return atom_hi_[static_cast<std::size_t>(prop)]; }

 private:
  const VarCatalogue* cat_;
  std::vector<sat::Value> values_;
  std::vector<std::vector<std::vector<int>>> sure_;
  std::vector<std::vector<std::vector<int>>> possible_;
  std::vector<StateSet> succ_;
  std::vector<StateSet> atom_lo_;
  std::vector<StateSet> atom_hi_;
};

/// lo under-approximates and hi over-approximates the extension in every
/// completion of a partial model.
struct Interval {
  StateSet lo;
  StateSet hi;
};

struct IntervalResult {
  std::vector<std::pair<Formula, Interval>> nodes;  // children first
  const Interval& root() const { return nodes.back().second; }
};

/// Compositional bounds for every subformula. Perfect semantics uses
/// per-state choices; imperfect semantics unions over uniform strategies.
IntervalResult interval_eval(const PartialModel& pm, const Formula& f, Semantics semantics);
inline IntervalResult interval_eval(const PartialModel& pm, const Formula& f) {
  return interval_eval(pm, f, pm.catalogue().signature().semantics);
}

struct TheoryOptions {
  bool minimize = true;
  /// Interval re-evaluations allowed per conflict explanation.
  std::size_t minimize_budget = 200;
};

struct TheoryStats {
  std::uint64_t partial_checks = 0;
  std::uint64_t partial_conflicts = 0;
  std::uint64_t exact_checks = 0;
  std::uint64_t exact_conflicts = 0;
  std::uint64_t literals_before = 0;
  std::uint64_t literals_after = 0;

  std::uint64_t conflicts() const { return partial_conflicts + exact_conflicts; }
  /// Mean fraction of the assigned literals kept in explanations.
  double shrink_ratio() const {
    return literals_before ? static_cast<double>(literals_after) / static_cast<double>(literals_before) : 1.0;
  }
  TheoryStats& operator+=(const TheoryStats& o);
};

/// The ATL theory hooked into the SAT engine: interval filtering on
/// partial assignments, exact model checking on total ones.
class AtlTheory : public sat::TheoryHook {
 public:
  AtlTheory(const VarCatalogue& cat, Formula f, TheoryOptions options = {});

  sat::TheoryVerdict on_partial(std::span<const sat::Value> assignment) override;
  sat::TheoryVerdict on_complete(std::span<const sat::Value> assignment) override;

  /// Negation of a subset of the assigned catalogue literals such that no
  /// valid completion of the subset satisfies the formula at the initial
  /// state, as certified by interval evaluation. Falls back to all assigned
  /// literals when the interval cannot certify the failure.
  sat::Clause conflict_clause(std::span<const sat::Value> assignment);

  /// Whether the interval rules out the formula at the initial state.
  bool refutes(std::span<const sat::Value> assignment) const;

  /// Exact check of a total assignment under the configured semantics.
  bool holds_exactly(std::span<const sat::Value> assignment) const;

  const TheoryStats& stats() const { return stats_; }
  const Formula& formula() const { return formula_; }

 private:
  const VarCatalogue& cat_;
  Formula formula_;
  TheoryOptions options_;
  TheoryStats stats_;
};

}  // namespace atlforge::theory
