#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "atlforge/formula.hpp"
#include "atlforge/model.hpp"
#include "atlforge/state_set.hpp"

/// Memoryless perfect-information ATL by fixed points on the explicit model.
namespace atlforge::perfect {

/// States where the coalition has a joint action forcing every successor
/// into target, whatever the other agents do.
StateSet pre(const GlobalModel& gm, Coalition coalition, const StateSet& target);

struct FixpointStats {
  /// Largest number of operator applications any single fixed point needed.
  std::size_t max_iterations = 0;
};

/// Extension of every subformula, children before parents.
std::vector<std::pair<Formula, StateSet>> extensions(const GlobalModel& gm, const Formula& f,
                                                     FixpointStats* stats = nullptr);

StateSet extension(const GlobalModel& gm, const Formula& f, FixpointStats* stats = nullptr);

bool check(const GlobalModel& gm, const Formula& f, std::size_t state);

/// One line per subformula: "<formula>\t{states}".
std::string dump_extensions(const GlobalModel& gm, const Formula& f);

}  // namespace atlforge::perfect
