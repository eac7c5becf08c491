#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "atlforge/signature.hpp"

namespace atlforge {

/// Bitmask over agent indices of a Signature.
using Coalition = std::uint32_t;

enum class FormulaKind : std::uint8_t { True, Atom, Not, And, Or, Implies, Enforce };
enum class TemporalOp : std::uint8_t { Next, Always, Until, Eventually };

/// Immutable ATL formula. Copies share structure.
///
/// Enforce nodes carry their temporal operator: Next/Always/Eventually use
/// left() as the body, Until uses left() U right().
class Formula {
 public:
  struct Node {
    FormulaKind kind = FormulaKind::True;
    TemporalOp temporal = TemporalOp::Next;
    int prop = -1;
    Coalition coalition = 0;
    std::shared_ptr<const Node> left;
    std::shared_ptr<const Node> right;
  };

  static Formula truth();
  static Formula atom(int prop);
  static Formula negation(Formula f);
  static Formula conjunction(Formula l, Formula r);
  static Formula disjunction(Formula l, Formula r);
  static Formula implication(Formula l, Formula r);
  static Formula next(Coalition c, Formula f);
  static Formula always(Coalition c, Formula f);
  static Formula eventually(Coalition c, Formula f);
  static Formula until(Coalition c, Formula l, Formula r);

  FormulaKind kind() const { return node_->kind; }
  TemporalOp temporal() const { return node_->temporal; }
  int prop() const { return node_->prop; }
  Coalition coalition() const { return node_->coalition; }
  Formula left() const { return Formula(node_->left); }
  Formula right() const { return Formula(node_->right); }
  bool has_right() const { return node_->right != nullptr; }

  /// Identity of the shared node; stable for the lifetime of the formula.
  const Node* id() const { return node_.get(); }

  /// Structural equality.
  friend bool operator==(const Formula& a, const Formula& b);

 private:
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Formula make(Node n);

  std::shared_ptr<const Node> node_;
};

/// Children first, each distinct node once (shared subterms are visited once).
std::vector<Formula> postorder(const Formula& f);

struct FormulaMetrics {
  int k = 0;  // strategic modalities
  int c = 0;  // Boolean connectives: ! & | ->
  friend bool operator==(const FormulaMetrics&, const FormulaMetrics&) = default;
};

FormulaMetrics metrics(const Formula& f);

/// Largest proposition / agent index referenced, or -1.
int max_proposition(const Formula& f);
Coalition agents_used(const Formula& f);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t position, const std::string& message);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Parses the ASCII concrete syntax:
///
///   formula  := "true" | IDENT | "!" formula | "(" formula BINOP formula ")"
///             | "<<" namelist ">>" temporal
///   BINOP    := "&" | "|" | "->"
///   temporal := "X" formula | "G" formula | "F" formula | "(" formula "U" formula ")"
Formula parse(std::string_view text, const Signature& sig);

/// Canonical, fully parenthesised form; parse(print(f)) == f.
std::string print(const Formula& f, const Signature& sig);

std::string coalition_to_string(Coalition c, const Signature& sig);

struct GeneratorParams {
  int groups = 1;
  int target_k = 1;
  int target_c = 0;
  int propositions = 1;
  int agents = 1;
  std::uint64_t seed = 0;
};

class GeneratorError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Random formula with exactly target_k modalities and target_c connectives.
/// Coalitions come from a pool of min(groups, 2^agents) distinct agent
/// subsets drawn once per formula; every pool member is used.
Formula generate(const GeneratorParams& params);

/// Agents a, b, c, ... and propositions p, q, r, s, p4, p5, ... matching
/// the index space generate() draws from.
Signature generator_signature(int agents, int propositions, Semantics semantics = Semantics::Perfect);

}  // namespace atlforge
