#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "atlforge/signature.hpp"
#include "atlforge/state_set.hpp"

namespace atlforge {

/// One agent's local behaviour. Local state 0 is initial.
struct AgentTemplate {
  /// protocol[l] = sorted enabled action indices at local state l.
  std::vector<std::vector<int>> protocol;
  /// transition[l][joint_action] = successor local state.
  std::vector<std::vector<int>> transition;

  friend bool operator==(const AgentTemplate&, const AgentTemplate&) = default;
};

struct ModelSpec {
  Signature signature;
  std::vector<AgentTemplate> templates;
  /// valuation[p][g], g in row-major global state order.
  std::vector<std::vector<bool>> valuation;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct Violation {
  enum class Kind { Shape, EmptyProtocol, BadAction, BadTransition, Observability };
  Kind kind;
  std::string message;
};

/// Empty iff every template and valuation invariant holds.
std::vector<Violation> validate(const ModelSpec& spec);

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Explicit concurrent game structure from the synchronous product of the
/// agent templates.
class GlobalModel {
 public:
  const Signature& signature() const { return sig_; }
  std::size_t state_count() const { return states_.size(); }
  std::size_t joint_action_count() const { return joints_.size(); }
  std::size_t agent_count() const { return sig_.agents.size(); }
  std::size_t initial_state() const { return 0; }

  int local(std::size_t g, std::size_t agent) const { return states_.component(g, agent); }
  int action(std::size_t ja, std::size_t agent) const { return joints_.component(ja, agent); }
  const ProductIndex& states() const { return states_; }
  const ProductIndex& joint_actions() const { return joints_; }

  /// Joint actions enabled at g, ascending.
  const std::vector<std::uint32_t>& enabled(std::size_t g) const { return enabled_[g]; }
  bool is_enabled(std::size_t g, std::size_t ja) const;
  std::size_t succ(std::size_t g, std::size_t ja) const { return succ_[g * joints_.size() + ja]; }

  const std::vector<int>& protocol(std::size_t agent, int local_state) const {
    return protocols_[agent][static_cast<std::size_t>(local_state)];
  }

  const StateSet& valuation(int prop) const { return valuation_[static_cast<std::size_t>(prop)]; }
  /// Replaces one proposition's extension; used by exhaustive enumerators
  /// that keep the transition structure fixed.
  void set_valuation(int prop, StateSet s) { valuation_[static_cast<std::size_t>(prop)] = std::move(s); }

  bool indistinguishable(std::size_t agent, std::size_t g1, std::size_t g2) const {
    return local(g1, agent) == local(g2, agent);
  }

  friend GlobalModel expand(const ModelSpec& spec);

 private:
  Signature sig_;
  ProductIndex states_;
  ProductIndex joints_;
  std::vector<std::vector<std::vector<int>>> protocols_;
  std::vector<std::vector<std::uint32_t>> enabled_;
  std::vector<std::uint32_t> succ_;
  std::vector<StateSet> valuation_;
};

/// Throws ModelError when validate() reports violations.
GlobalModel expand(const ModelSpec& spec);

/// Digraph with one node per global state and one edge per enabled joint action.
std::string export_dot(const GlobalModel& gm);

std::string export_json(const ModelSpec& spec);

/// Schema violation or malformed JSON; the message starts with the field path.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string path, const std::string& message);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

ModelSpec import_json(std::string_view text);

}  // namespace atlforge
