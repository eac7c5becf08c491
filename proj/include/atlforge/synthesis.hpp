#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "atlforge/checker_imperfect.hpp"
#include "atlforge/formula.hpp"
#include "atlforge/model.hpp"
#include "atlforge/signature.hpp"
#include "atlforge/theory.hpp"

namespace atlforge {

enum class SearchMode { Fixed, Minimize };

struct Budgets {
  std::optional<double> time_seconds;
  /// Applies to each signature's solver session separately.
  std::optional<std::uint64_t> conflicts;
};

/// In Fixed mode the agents' counts are exact; in Minimize mode they are
/// per-agent maxima and every smaller shape is scheduled.
struct Problem {
  Signature signature;
  std::string formula;
  SearchMode mode = SearchMode::Fixed;
  std::optional<std::size_t> max_total_states;
  Budgets budgets;
};

enum class VerdictStatus { Sat, UnsatWithinBounds, Unknown };
std::string_view to_string(VerdictStatus s);

struct Attempt {
  std::string shape;
  VerdictStatus status = VerdictStatus::Unknown;
  double wall_ms = 0;
  std::uint64_t conflicts = 0;
};

struct SynthesisStats {
  double wall_ms = 0;
  std::uint64_t sat_conflicts = 0;
  std::uint64_t signatures_tried = 0;
  theory::TheoryStats theory;
  std::vector<Attempt> attempts;
};

struct Witness {
  std::string formula;
  imperfect::UniformStrategy strategy;
};

struct Verdict {
  VerdictStatus status = VerdictStatus::Unknown;
  std::optional<Signature> signature;
  std::optional<ModelSpec> model;
  /// Imperfect mode: least uniform strategy for each strategic subformula
  /// true at the initial state.
  std::vector<Witness> witnesses;
  SynthesisStats stats;
};

class ProblemError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws ProblemError (or ParseError/SignatureError) for ill-formed input.
void check_problem(const Problem& p);

/// Candidate signatures in search order: ascending total global states,
/// then local-state vector, then action vector.
std::vector<Signature> schedule(const Problem& p);

struct SynthesisOptions {
  unsigned jobs = 1;
  theory::TheoryOptions theory;
  /// Perfect semantics only: add the fixpoint lemmas of lemmas.hpp.
  bool lemmas = true;
};

Verdict synthesize(const Problem& p, const SynthesisOptions& options = {});

/// Throws std::logic_error unless the model validates and satisfies the
/// formula at the initial state under the signature's semantics.
void verify_model(const ModelSpec& spec, const Formula& f);

std::vector<Witness> witness_strategies(const GlobalModel& gm, const Formula& f);

class OracleGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OracleOptions {
  std::uint64_t guard = std::uint64_t{1} << 24;
};

/// Number of models the oracle enumerates for one signature: protocols,
/// transitions of reachable-by-protocol joint actions, and valuations of
/// the formula's propositions consistent with observability.
std::uint64_t oracle_space(const Signature& sig, const Formula& f);

/// Exhaustive search over the same schedule as synthesize().
Verdict oracle(const Problem& p, const OracleOptions& options = {});

/// Imperfect-semantics signature in which every agent's local state is a
/// global state of `sig`. Observability lists are empty: agents already
/// see the whole state, and a shared proposition would tie together
/// unreachable tuples.
Signature full_observability_embedding(const Signature& sig);

/// A model over the embedding whose reachable part is isomorphic to `spec`.
ModelSpec embed_model(const ModelSpec& spec);

}  // namespace atlforge
