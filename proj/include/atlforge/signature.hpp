#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace atlforge {

enum class Semantics { Perfect, Imperfect };

std::string_view to_string(Semantics s);
Semantics semantics_from_string(std::string_view s);

struct AgentSignature {
  std::string name;
  int local_states = 1;
  int actions = 1;
  /// Proposition ids this agent observes. Ignored under perfect information.
  std::vector<int> observable;

  friend bool operator==(const AgentSignature&, const AgentSignature&) = default;
};

/// The shape of a bounded model search space.
///
/// Global states and joint actions are both indexed in row-major product
/// order with agent 0 as the most significant digit.
struct Signature {
  std::vector<AgentSignature> agents;
  std::vector<std::string> propositions;
  Semantics semantics = Semantics::Perfect;

  std::size_t agent_count() const { return agents.size(); }
  std::size_t proposition_count() const { return propositions.size(); }

  std::optional<int> agent_index(std::string_view name) const;
  std::optional<int> proposition_index(std::string_view name) const;

  std::size_t global_state_count() const;
  std::size_t joint_action_count() const;

  /// Human-readable problems; empty when the signature is well formed.
  std::vector<std::string> problems() const;
  /// Throws SignatureError listing problems().
  void check() const;

  /// "a:2x2,b:3x1" (local states x actions per agent).
  std::string shape() const;

  friend bool operator==(const Signature&, const Signature&) = default;
};

class SignatureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mixed-radix codec for global states or joint actions.
class ProductIndex {
 public:
  ProductIndex() = default;
  explicit ProductIndex(std::vector<int> radices);

  std::size_t size() const { return size_; }
  std::size_t arity() const { return radices_.size(); }
  int radix(std::size_t i) const { return radices_[i]; }
  std::size_t stride(std::size_t i) const { return strides_[i]; }

  int component(std::size_t index, std::size_t i) const {
    return static_cast<int>((index / strides_[i]) % static_cast<std::size_t>(radices_[i]));
  }
  std::size_t encode(const std::vector<int>& digits) const;
  std::vector<int> decode(std::size_t index) const;

 private:
  std::vector<int> radices_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 1;
};

ProductIndex state_index(const Signature& sig);
ProductIndex joint_action_index(const Signature& sig);

bool is_identifier(std::string_view s);
bool is_reserved_word(std::string_view s);

}  // namespace atlforge
