#pragma once

// Shared JSON schema helpers. Not part of the installed interface.

#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "atlforge/model.hpp"
#include "atlforge/signature.hpp"

namespace atlforge::detail {

using json = nlohmann::json;

std::string child_path(const std::string& path, std::string_view key);
std::string child_path(const std::string& path, std::size_t index);

const json& require(const json& obj, const std::string& path, std::string_view key);
void require_object(const json& j, const std::string& path);
void reject_unknown(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed);

int get_int(const json& j, const std::string& path, int min_value);
std::string get_string(const json& j, const std::string& path);
bool get_bool(const json& j, const std::string& path);

json signature_to_json(const Signature& sig);
/// Reads {semantics, agents, propositions}. With require_counts=false the
/// agents' local_states/actions may be omitted (left at 0).
Signature signature_from_json(const json& j, const std::string& path, bool require_counts = true);
json agent_to_json(const Signature& sig, const AgentSignature& a);

json model_to_json(const ModelSpec& spec);
ModelSpec model_from_json(const json& j, const std::string& path);

}  // namespace atlforge::detail
