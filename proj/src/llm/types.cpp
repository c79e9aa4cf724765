#include "drpo/llm/types.hpp"

#include "drpo/errors.hpp"

namespace drpo::llm {

std::string_view to_string(Role role)
{
  switch (role) {
  case Role::base: return "base";
  case Role::optimizer: return "optimizer";
  case Role::evaluator: return "evaluator";
  }
  return "unknown";
}

std::string_view to_string(Speaker speaker)
{
  switch (speaker) {
  case Speaker::system: return "system";
  case Speaker::user: return "user";
  case Speaker::assistant: return "assistant";
  }
  return "unknown";
}

std::string_view to_string(Stage stage)
{
  switch (stage) {
  case Stage::reward_selection: return "reward_selection";
  case Stage::evaluation: return "evaluation";
  case Stage::generation: return "generation";
  case Stage::transition: return "transition";
  case Stage::root_evaluation: return "root_evaluation";
  case Stage::root_generation: return "root_generation";
  case Stage::judge: return "judge";
  case Stage::inference: return "inference";
  case Stage::other: return "other";
  }
  return "unknown";
}

Role role_from_string(std::string_view text)
{
  for (auto role : kAllRoles) {
    if (to_string(role) == text) {
      return role;
    }
  }
  throw ConfigError("unknown role '" + std::string(text) + "' (expected base, optimizer or evaluator)");
}

Speaker speaker_from_string(std::string_view text)
{
  for (auto speaker : {Speaker::system, Speaker::user, Speaker::assistant}) {
    if (to_string(speaker) == text) {
      return speaker;
    }
  }
  throw ConfigError("unknown message speaker '" + std::string(text) + "'");
}

void validate(const BackendProfile& profile)
{
  const std::string who(to_string(profile.role));
  if (profile.endpoint.empty()) {
    throw ConfigError(who + ": endpoint is empty");
  }
  if (profile.model_id.empty()) {
    throw ConfigError(who + ": model_id is empty");
  }
  if (!(profile.temperature >= 0.0)) {
    throw ConfigError(who + ": temperature must be >= 0");
  }
  if (profile.max_tokens <= 0) {
    throw ConfigError(who + ": max_tokens must be positive");
  }
}

nlohmann::json to_json(const Message& message)
{
  return {{"role", to_string(message.speaker)}, {"content", message.text}};
}

nlohmann::json to_json(const Messages& messages)
{
  auto array = nlohmann::json::array();
  for (const auto& message : messages) {
    array.push_back(to_json(message));
  }
  return array;
}

Messages messages_from_json(const nlohmann::json& array)
{
  Messages out;
  for (const auto& item : array) {
    out.push_back({speaker_from_string(item.at("role").get<std::string>()),
                   item.at("content").get<std::string>()});
  }
  return out;
}

} // namespace drpo::llm
