#pragma once

#include <cstddef>
#include <vector>

#include "atlforge/formula.hpp"
#include "atlforge/model.hpp"
#include "atlforge/sat.hpp"

/// Reference implementations that share no code with the library's engines.
namespace atlforge::testing {

/// Perfect-information extension by enumerating every memoryless coalition
/// strategy (one action per member and global state) and inspecting the
/// outcome graph directly: reachability for G, cycle search for U.
StateSet path_extension(const GlobalModel& gm, const Formula& f);

/// Objective uniform-strategy extension by the same outcome-graph search,
/// enumerating one action per member and local state.
StateSet uniform_path_extension(const GlobalModel& gm, const Formula& f);

/// Whether a fixed uniform strategy (actions[k][l] for members[k] at local
/// state l) makes every outcome from state satisfy the strategic formula.
bool strategy_enforces(const GlobalModel& gm, const Formula& strategic, const std::vector<int>& members,
                       const std::vector<std::vector<int>>& actions, std::size_t state);

/// CTL quantifiers over enabled joint actions: universal for <<>>, existential
/// for the grand coalition.
StateSet ctl_always(const GlobalModel& gm, const StateSet& body, bool universal);
StateSet ctl_until(const GlobalModel& gm, const StateSet& hold, const StateSet& goal, bool universal);
StateSet ctl_next(const GlobalModel& gm, const StateSet& target, bool universal);

/// Exhaustive satisfiability for small CNFs.
bool brute_force_sat(const sat::Cnf& cnf);

}  // namespace atlforge::testing
