#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "atlforge/model.hpp"
#include "atlforge/sat.hpp"
#include "atlforge/signature.hpp"

namespace atlforge {

enum class VarFamily { Enable, Transition, Valuation, Auxiliary };

struct VarRole {
  VarFamily family;
  int agent = -1;
  int local = -1;
  int action = -1;  // Enable: action; Transition: joint action index
  int target = -1;  // Transition: successor local state
  int prop = -1;
  std::size_t state = 0;
};

class EncodingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Boolean variables describing every model over a signature.
///
/// Ids are laid out family by family (enable, transition, valuation) and are
/// a pure function of the signature. Auxiliary ids of the sequential-counter
/// exactly-one encoding follow the catalogue.
class VarCatalogue {
 public:
  static constexpr std::size_t kDefaultBudget = std::size_t{1} << 20;

  explicit VarCatalogue(Signature sig, std::size_t budget = kDefaultBudget);

  const Signature& signature() const { return sig_; }
  const ProductIndex& states() const { return states_; }
  const ProductIndex& joint_actions() const { return joints_; }

  sat::Var enable_var(int agent, int local, int action) const;
  sat::Var trans_var(int agent, int local, std::size_t joint, int target) const;
  sat::Var val_var(int prop, std::size_t state) const;

  std::size_t enable_count() const { return trans_base_[0] - enable_base_[0]; }
  std::size_t trans_count() const { return val_base_ - trans_base_[0]; }
  std::size_t val_count() const { return size_ - val_base_; }
  /// Enable + transition + valuation variables (the theory-visible ones).
  std::size_t size() const { return size_; }

  VarRole role(sat::Var v) const;
  std::string describe(sat::Var v) const;
  /// "varid<TAB>role" per catalogue variable.
  std::string dump() const;

 private:
  Signature sig_;
  ProductIndex states_;
  ProductIndex joints_;
  std::vector<std::size_t> enable_base_;
  std::vector<std::size_t> trans_base_;
  std::size_t val_base_ = 0;
  std::size_t size_ = 0;
};

struct Encoding {
  VarCatalogue catalogue;
  sat::Cnf cnf;
  /// Widths above this use the sequential counter for exactly-one.
  static constexpr int kPairwiseMaxWidth = 8;
};

/// Catalogue plus structural constraints: protocol non-emptiness,
/// exactly-one successor per (agent, local state, joint action) and, under
/// imperfect information, observability biconditionals.
Encoding build_encoding(const Signature& sig, std::size_t var_budget = VarCatalogue::kDefaultBudget);

/// Reads a model off a total assignment of the structural CNF.
ModelSpec decode(const VarCatalogue& cat, const std::vector<bool>& assignment);

/// The assignment encoding a spec, auxiliary variables included.
std::vector<bool> characteristic_assignment(const Encoding& enc, const ModelSpec& spec);

}  // namespace atlforge
