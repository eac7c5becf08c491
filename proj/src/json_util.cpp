#include "json_util.hpp"

#include <algorithm>

namespace atlforge::detail {

std::string child_path(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string child_path(const std::string& path, std::size_t index) {
  return path + "[" + std::to_string(index) + "]";
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
}

const json& require(const json& obj, const std::string& path, std::string_view key) {
  require_object(obj, path);
  auto it = obj.find(std::string(key));
  if (it == obj.end()) throw SchemaError(child_path(path, key), "missing required field");
  return *it;
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  require_object(obj, path);
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw SchemaError(child_path(path, it.key()), "unknown field");
  }
}

int get_int(const json& j, const std::string& path, int min_value) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
  auto v = j.get<long long>();
  if (v < min_value) throw SchemaError(path, "must be at least " + std::to_string(min_value));
  if (v > 1'000'000'000) throw SchemaError(path, "value too large");
  return static_cast<int>(v);
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path, "expected a string");
  return j.get<std::string>();
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw SchemaError(path, "expected a boolean");
  return j.get<bool>();
}

json agent_to_json(const Signature& sig, const AgentSignature& a) {
  json obs = json::array();
  for (int p : a.observable) obs.push_back(sig.propositions.at(static_cast<std::size_t>(p)));
  return json{{"name", a.name}, {"local_states", a.local_states}, {"actions", a.actions}, {"observable", obs}};
}

json signature_to_json(const Signature& sig) {
  json agents = json::array();
  for (const auto& a : sig.agents) agents.push_back(agent_to_json(sig, a));
  return json{{"semantics", std::string(to_string(sig.semantics))},
              {"agents", agents},
              {"propositions", sig.propositions}};
}

Signature signature_from_json(const json& j, const std::string& path, bool require_counts) {
  reject_unknown(j, path, {"semantics", "agents", "propositions"});
  Signature sig;
  {
    auto p = child_path(path, "semantics");
    auto s = get_string(require(j, path, "semantics"), p);
    if (s != "perfect" && s != "imperfect") throw SchemaError(p, "expected \"perfect\" or \"imperfect\"");
    sig.semantics = semantics_from_string(s);
  }
  {
    auto p = child_path(path, "propositions");
    const auto& props = require(j, path, "propositions");
    if (!props.is_array()) throw SchemaError(p, "expected an array");
    for (std::size_t i = 0; i < props.size(); ++i) sig.propositions.push_back(get_string(props[i], child_path(p, i)));
  }
  auto ap = child_path(path, "agents");
  const auto& agents = require(j, path, "agents");
  if (!agents.is_array()) throw SchemaError(ap, "expected an array");
  if (agents.empty()) throw SchemaError(ap, "at least one agent is required");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    auto p = child_path(ap, i);
    const auto& a = agents[i];
    reject_unknown(a, p, {"name", "local_states", "actions", "observable"});
    AgentSignature as;
    as.name = get_string(require(a, p, "name"), child_path(p, "name"));
    as.local_states = 0;
    as.actions = 0;
    if (require_counts || a.contains("local_states"))
      as.local_states = get_int(require(a, p, "local_states"), child_path(p, "local_states"), 1);
    if (require_counts || a.contains("actions"))
      as.actions = get_int(require(a, p, "actions"), child_path(p, "actions"), 1);
    if (a.contains("observable")) {
      auto op = child_path(p, "observable");
      const auto& obs = a["observable"];
      if (!obs.is_array()) throw SchemaError(op, "expected an array");
      for (std::size_t k = 0; k < obs.size(); ++k) {
        auto name = get_string(obs[k], child_path(op, k));
        auto idx = sig.proposition_index(name);
        if (!idx) throw SchemaError(child_path(op, k), "undeclared proposition '" + name + "'");
        as.observable.push_back(*idx);
      }
    }
    sig.agents.push_back(std::move(as));
  }
  auto problems = sig.problems();
  // Counts are validated by the caller when they are optional.
  std::erase_if(problems, [&](const std::string& s) {
    return !require_counts && (s.find("at least one local state") != std::string::npos ||
                               s.find("at least one action") != std::string::npos);
  });
  if (!problems.empty()) throw SchemaError(path.empty() ? "signature" : path, problems.front());
  return sig;
}

json model_to_json(const ModelSpec& spec) {
  json templates = json::array();
  for (const auto& t : spec.templates) templates.push_back(json{{"protocol", t.protocol}, {"transition", t.transition}});
  json val = json::object();
  for (std::size_t p = 0; p < spec.signature.propositions.size(); ++p) {
    json arr = json::array();
    for (bool b : spec.valuation[p]) arr.push_back(b);
    val[spec.signature.propositions[p]] = arr;
  }
  return json{{"signature", signature_to_json(spec.signature)}, {"templates", templates}, {"valuation", val}};
}

namespace {

std::vector<int> int_array(const json& j, const std::string& path, std::size_t expected_size, bool fixed_size) {
  if (!j.is_array()) throw SchemaError(path, "expected an array");
  if (fixed_size && j.size() != expected_size)
    throw SchemaError(path, "expected " + std::to_string(expected_size) + " entries, found " + std::to_string(j.size()));
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_int(j[i], child_path(path, i), 0));
  return out;
}

}  // namespace

ModelSpec model_from_json(const json& j, const std::string& path) {
  reject_unknown(j, path, {"signature", "templates", "valuation"});
  ModelSpec spec;
  spec.signature = signature_from_json(require(j, path, "signature"), child_path(path, "signature"));
  const auto& sig = spec.signature;
  const std::size_t states = sig.global_state_count();
  const std::size_t joints = sig.joint_action_count();

  auto tp = child_path(path, "templates");
  const auto& templates = require(j, path, "templates");
  if (!templates.is_array()) throw SchemaError(tp, "expected an array");
  if (templates.size() != sig.agents.size())
    throw SchemaError(tp, "expected one template per agent (" + std::to_string(sig.agents.size()) + ")");
  for (std::size_t i = 0; i < templates.size(); ++i) {
    auto p = child_path(tp, i);
    reject_unknown(templates[i], p, {"protocol", "transition"});
    const auto& a = sig.agents[i];
    AgentTemplate t;
    auto pp = child_path(p, "protocol");
    const auto& prot = require(templates[i], p, "protocol");
    if (!prot.is_array() || prot.size() != static_cast<std::size_t>(a.local_states))
      throw SchemaError(pp, "expected an array of " + std::to_string(a.local_states) + " action lists");
    for (std::size_t l = 0; l < prot.size(); ++l) t.protocol.push_back(int_array(prot[l], child_path(pp, l), 0, false));
    auto trp = child_path(p, "transition");
    const auto& tr = require(templates[i], p, "transition");
    if (!tr.is_array() || tr.size() != static_cast<std::size_t>(a.local_states))
      throw SchemaError(trp, "expected an array of " + std::to_string(a.local_states) + " rows");
    for (std::size_t l = 0; l < tr.size(); ++l) t.transition.push_back(int_array(tr[l], child_path(trp, l), joints, true));
    spec.templates.push_back(std::move(t));
  }

  auto vp = child_path(path, "valuation");
  const auto& val = require(j, path, "valuation");
  require_object(val, vp);
  for (auto it = val.begin(); it != val.end(); ++it)
    if (!sig.proposition_index(it.key())) throw SchemaError(child_path(vp, it.key()), "undeclared proposition");
  for (const auto& name : sig.propositions) {
    const auto& arr = require(val, vp, name);
    auto ap = child_path(vp, name);
    if (!arr.is_array() || arr.size() != states)
      throw SchemaError(ap, "expected an array of " + std::to_string(states) + " booleans");
    std::vector<bool> bits;
    for (std::size_t g = 0; g < states; ++g) bits.push_back(get_bool(arr[g], child_path(ap, g)));
    spec.valuation.push_back(std::move(bits));
  }
  return spec;
}

}  // namespace atlforge::detail
