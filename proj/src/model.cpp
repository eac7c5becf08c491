#include "atlforge/model.hpp"

#include <algorithm>
#include <sstream>

#include "json_util.hpp"

namespace atlforge {

namespace {

std::string at_state(const Signature& sig, std::size_t agent, std::size_t l) {
  return "(" + sig.agents[agent].name + ", " + std::to_string(l) + ")";
}

}  // namespace

std::vector<Violation> validate(const ModelSpec& spec) {
  std::vector<Violation> out;
  const auto& sig = spec.signature;
  for (const auto& p : sig.problems()) out.push_back({Violation::Kind::Shape, p});
  if (!out.empty()) return out;

  const std::size_t states = sig.global_state_count();
  const std::size_t joints = sig.joint_action_count();
  if (spec.templates.size() != sig.agents.size()) {
    out.push_back({Violation::Kind::Shape, "expected one template per agent"});
    return out;
  }
  for (std::size_t i = 0; i < sig.agents.size(); ++i) {
    const auto& a = sig.agents[i];
    const auto& t = spec.templates[i];
    const auto ls = static_cast<std::size_t>(a.local_states);
    if (t.protocol.size() != ls || t.transition.size() != ls) {
      out.push_back({Violation::Kind::Shape, "template of agent " + a.name + " does not match its local state count"});
      continue;
    }
    for (std::size_t l = 0; l < ls; ++l) {
      const auto& prot = t.protocol[l];
      if (prot.empty()) out.push_back({Violation::Kind::EmptyProtocol, "empty protocol at " + at_state(sig, i, l)});
      for (std::size_t k = 0; k < prot.size(); ++k) {
        if (prot[k] < 0 || prot[k] >= a.actions)
          out.push_back({Violation::Kind::BadAction, "action " + std::to_string(prot[k]) + " out of range at " + at_state(sig, i, l)});
        else if (k > 0 && prot[k] <= prot[k - 1])
          out.push_back({Violation::Kind::BadAction, "protocol not strictly ascending at " + at_state(sig, i, l)});
      }
      if (t.transition[l].size() != joints) {
        out.push_back({Violation::Kind::Shape, "transition row of " + at_state(sig, i, l) + " needs one entry per joint action"});
        continue;
      }
      for (std::size_t ja = 0; ja < joints; ++ja) {
        int s = t.transition[l][ja];
        if (s < 0 || s >= a.local_states)
          out.push_back({Violation::Kind::BadTransition, "successor " + std::to_string(s) + " out of range at " + at_state(sig, i, l) +
                                                             " under joint action " + std::to_string(ja)});
      }
    }
  }

  if (spec.valuation.size() != sig.propositions.size()) {
    out.push_back({Violation::Kind::Shape, "valuation needs one row per proposition"});
    return out;
  }
  for (std::size_t p = 0; p < sig.propositions.size(); ++p)
    if (spec.valuation[p].size() != states)
      out.push_back({Violation::Kind::Shape, "valuation of " + sig.propositions[p] + " needs one entry per global state"});
  if (!out.empty() || sig.semantics != Semantics::Imperfect) return out;

  const auto idx = state_index(sig);
  for (std::size_t i = 0; i < sig.agents.size(); ++i) {
    for (int p : sig.agents[i].observable) {
      const auto& row = spec.valuation[static_cast<std::size_t>(p)];
      std::vector<int> seen(static_cast<std::size_t>(sig.agents[i].local_states), -1);
      std::vector<std::size_t> witness(seen.size(), 0);
      for (std::size_t g = 0; g < states; ++g) {
        auto l = static_cast<std::size_t>(idx.component(g, i));
        int v = row[g] ? 1 : 0;
        if (seen[l] < 0) {
          seen[l] = v;
          witness[l] = g;
        } else if (seen[l] != v) {
          out.push_back({Violation::Kind::Observability,
                         "proposition " + sig.propositions[static_cast<std::size_t>(p)] + " observable by " + sig.agents[i].name +
                             " differs on states " + std::to_string(witness[l]) + " and " + std::to_string(g) +
                             " which share local state " + std::to_string(l)});
          break;
        }
      }
    }
  }
  return out;
}

bool GlobalModel::is_enabled(std::size_t g, std::size_t ja) const {
  const auto& e = enabled_[g];
  return std::binary_search(e.begin(), e.end(), static_cast<std::uint32_t>(ja));
}

GlobalModel expand(const ModelSpec& spec) {
  auto violations = validate(spec);
  if (!violations.empty()) throw ModelError("invalid model: " + violations.front().message);

  GlobalModel gm;
  gm.sig_ = spec.signature;
  gm.states_ = state_index(spec.signature);
  gm.joints_ = joint_action_index(spec.signature);
  const std::size_t n = gm.sig_.agents.size();
  const std::size_t states = gm.states_.size();
  const std::size_t joints = gm.joints_.size();

  gm.protocols_.resize(n);
  std::vector<std::vector<std::vector<char>>> allowed(n);
  for (std::size_t i = 0; i < n; ++i) {
    gm.protocols_[i] = spec.templates[i].protocol;
    allowed[i].assign(gm.protocols_[i].size(), std::vector<char>(static_cast<std::size_t>(gm.sig_.agents[i].actions), 0));
    for (std::size_t l = 0; l < gm.protocols_[i].size(); ++l)
      for (int a : gm.protocols_[i][l]) allowed[i][l][static_cast<std::size_t>(a)] = 1;
  }

  gm.enabled_.assign(states, {});
  gm.succ_.assign(states * joints, 0);
  for (std::size_t g = 0; g < states; ++g) {
    for (std::size_t ja = 0; ja < joints; ++ja) {
      std::size_t next = 0;
      bool on = true;
      for (std::size_t i = 0; i < n; ++i) {
        auto l = static_cast<std::size_t>(gm.states_.component(g, i));
        auto a = static_cast<std::size_t>(gm.joints_.component(ja, i));
        on = on && allowed[i][l][a];
        next += static_cast<std::size_t>(spec.templates[i].transition[l][ja]) * gm.states_.stride(i);
      }
      gm.succ_[g * joints + ja] = static_cast<std::uint32_t>(next);
      if (on) gm.enabled_[g].push_back(static_cast<std::uint32_t>(ja));
    }
  }

  gm.valuation_.clear();
  for (const auto& row : spec.valuation) {
    StateSet s(states);
    for (std::size_t g = 0; g < states; ++g)
      if (row[g]) s.insert(g);
    gm.valuation_.push_back(std::move(s));
  }
  return gm;
}

namespace {

std::string tuple(const ProductIndex& idx, std::size_t v) {
  std::string s = "(";
  for (std::size_t i = 0; i < idx.arity(); ++i) {
    if (i) s += ',';
    s += std::to_string(idx.component(v, i));
  }
  return s + ")";
}

}  // namespace

std::string export_dot(const GlobalModel& gm) {
  std::ostringstream os;
  const auto& sig = gm.signature();
  os << "digraph model {\n";
  for (std::size_t g = 0; g < gm.state_count(); ++g) {
    std::string label = tuple(gm.states(), g);
    for (std::size_t p = 0; p < sig.propositions.size(); ++p)
      if (gm.valuation(static_cast<int>(p)).contains(g)) label += "\\n" + sig.propositions[p];
    os << "  s" << g << " [label=\"" << label << "\"" << (g == gm.initial_state() ? ", shape=doublecircle" : "") << "];\n";
  }
  for (std::size_t g = 0; g < gm.state_count(); ++g)
    for (auto ja : gm.enabled(g))
      os << "  s" << g << " -> s" << gm.succ(g, ja) << " [label=\"" << tuple(gm.joint_actions(), ja) << "\"];\n";
  os << "}\n";
  return os.str();
}

SchemaError::SchemaError(std::string path, const std::string& message)
    : std::runtime_error(path + ": " + message), path_(std::move(path)) {}

std::string export_json(const ModelSpec& spec) { return detail::model_to_json(spec).dump(2); }

ModelSpec import_json(std::string_view text) {
  detail::json j;
  try {
    j = detail::json::parse(text);
  } catch (const detail::json::parse_error& e) {
    throw SchemaError("$", std::string("malformed JSON: ") + e.what());
  }
  return detail::model_from_json(j, "");
}

}  // namespace atlforge
