#pragma once

#include <cstddef>

#include "atlforge/encoding.hpp"
#include "atlforge/formula.hpp"
#include "atlforge/sat.hpp"

namespace atlforge {

struct LemmaStats {
  std::size_t variables = 0;
  std::size_t clauses = 0;
};

/// Adds clauses over auxiliary variables stating that the formula holds at
/// the initial state under perfect-information semantics.
///
/// Each subformula gets one variable per global state, constrained only in
/// the directions its polarity needs: a positive occurrence implies truth
/// (least fixpoints through rank variables, greatest ones through
/// post-fixpoints), a negative one is implied by truth. Every model of the
/// formula therefore extends to a solution, so adding the lemmas never
/// removes a model; a solution's model satisfies the formula.
LemmaStats add_fixpoint_lemmas(const VarCatalogue& cat, const Formula& f, sat::Cnf& cnf);

}  // namespace atlforge
