#include "atlforge/signature.hpp"

#include <set>

namespace atlforge {

std::string_view to_string(Semantics s) {
  return s == Semantics::Perfect ? "perfect" : "imperfect";
}

Semantics semantics_from_string(std::string_view s) {
  if (s == "perfect") return Semantics::Perfect;
  if (s == "imperfect") return Semantics::Imperfect;
  throw SignatureError("unknown semantics '" + std::string(s) + "'");
}

std::optional<int> Signature::agent_index(std::string_view name) const {
  for (std::size_t i = 0; i < agents.size(); ++i)
    if (agents[i].name == name) return static_cast<int>(i);
  return std::nullopt;
}

std::optional<int> Signature::proposition_index(std::string_view name) const {
  for (std::size_t i = 0; i < propositions.size(); ++i)
    if (propositions[i] == name) return static_cast<int>(i);
  return std::nullopt;
}

std::size_t Signature::global_state_count() const {
  std::size_t n = 1;
  for (const auto& a : agents) n *= static_cast<std::size_t>(a.local_states);
  return n;
}

std::size_t Signature::joint_action_count() const {
  std::size_t n = 1;
  for (const auto& a : agents) n *= static_cast<std::size_t>(a.actions);
  return n;
}

std::vector<std::string> Signature::problems() const {
  std::vector<std::string> out;
  if (agents.empty()) out.push_back("signature declares no agents");
  if (agents.size() > 32) out.push_back("at most 32 agents are supported");
  std::set<std::string> names;
  for (const auto& a : agents) {
    if (!is_identifier(a.name)) out.push_back("agent name '" + a.name + "' is not an identifier");
    if (!names.insert(a.name).second) out.push_back("duplicate agent name '" + a.name + "'");
    if (a.local_states < 1)
      out.push_back("agent '" + a.name + "' needs at least one local state");
    if (a.actions < 1) out.push_back("agent '" + a.name + "' needs at least one action");
    for (int p : a.observable)
      if (p < 0 || static_cast<std::size_t>(p) >= propositions.size())
        out.push_back("agent '" + a.name + "' observes an undeclared proposition");
  }
  std::set<std::string> props;
  for (const auto& p : propositions) {
    if (!is_identifier(p)) out.push_back("proposition name '" + p + "' is not an identifier");
    if (is_reserved_word(p)) out.push_back("proposition name '" + p + "' is reserved");
    if (!props.insert(p).second) out.push_back("duplicate proposition name '" + p + "'");
  }
  return out;
}

void Signature::check() const {
  auto p = problems();
  if (p.empty()) return;
  std::string msg = "invalid signature: " + p.front();
  for (std::size_t i = 1; i < p.size(); ++i) msg += "; " + p[i];
  throw SignatureError(msg);
}

std::string Signature::shape() const {
  std::string s;
  for (const auto& a : agents) {
    if (!s.empty()) s += ',';
    s += a.name + ':' + std::to_string(a.local_states) + 'x' + std::to_string(a.actions);
  }
  return s;
}

ProductIndex::ProductIndex(std::vector<int> radices) : radices_(std::move(radices)) {
  strides_.assign(radices_.size(), 1);
  size_ = 1;
  for (std::size_t k = radices_.size(); k-- > 0;) {
    strides_[k] = size_;
    size_ *= static_cast<std::size_t>(radices_[k]);
  }
}

std::size_t ProductIndex::encode(const std::vector<int>& digits) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < radices_.size(); ++i)
    idx += static_cast<std::size_t>(digits[i]) * strides_[i];
  return idx;
}

std::vector<int> ProductIndex::decode(std::size_t index) const {
  std::vector<int> d(radices_.size());
  for (std::size_t i = 0; i < radices_.size(); ++i) d[i] = component(index, i);
  return d;
}

ProductIndex state_index(const Signature& sig) {
  std::vector<int> r;
  for (const auto& a : sig.agents) r.push_back(a.local_states);
  return ProductIndex(std::move(r));
}

ProductIndex joint_action_index(const Signature& sig) {
  std::vector<int> r;
  for (const auto& a : sig.agents) r.push_back(a.actions);
  return ProductIndex(std::move(r));
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  if (!alpha(s[0])) return false;
  for (char c : s)
    if (!alpha(c) && !(c >= '0' && c <= '9')) return false;
  return true;
}

bool is_reserved_word(std::string_view s) {
  return s == "true" || s == "X" || s == "G" || s == "F" || s == "U";
}

}  // namespace atlforge
