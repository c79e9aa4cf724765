#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace drpo::llm {

// The three model roles of a run: the model being aligned (base), the model
// that rewrites states (optimizer) and the judge (evaluator).
enum class Role { base, optimizer, evaluator };

enum class Speaker { system, user, assistant };

// Which pipeline step issued a request. Only used for accounting and by the
// mock backend; never sent upstream and never part of a cache key.
enum class Stage {
  reward_selection,
  evaluation,       // judging a sampled (non-root) state
  generation,       // base-model answer for a sampled system prompt
  transition,       // optimizer rewrite of a state
  root_evaluation,  // judging the initial state of a search
  root_generation,  // base-model answer for the initial system prompt
  judge,
  inference,
  other,
};

enum class CachePolicy { use, bypass };

std::string_view to_string(Role role);
std::string_view to_string(Speaker speaker);
std::string_view to_string(Stage stage);
Role role_from_string(std::string_view text);
Speaker speaker_from_string(std::string_view text);

inline constexpr Role kAllRoles[] = {Role::base, Role::optimizer, Role::evaluator};

struct Message {
  Speaker speaker = Speaker::user;
  std::string text;

  friend bool operator==(const Message&, const Message&) = default;
};

using Messages = std::vector<Message>;

struct BackendProfile {
  Role role = Role::base;
  std::string endpoint = "mock";  // full chat-completions URL, or "mock"
  std::string model_id = "mock-model";
  double temperature = 0.0;
  int max_tokens = 1024;
  std::string api_key_env;        // name of the env var holding the key

  bool is_mock() const { return endpoint == "mock"; }
};

// Validates role/temperature/max_tokens; throws ConfigError.
void validate(const BackendProfile& profile);

struct CompletionRequest {
  Role role = Role::base;
  Stage stage = Stage::other;
  Messages messages;
  std::optional<double> temperature;
  std::optional<int> max_tokens;
  CachePolicy cache_policy = CachePolicy::use;
  // Structured hints for the mock backend (query, aspects, sample index...).
  nlohmann::json meta = nlohmann::json::object();
};

nlohmann::json to_json(const Message& message);
nlohmann::json to_json(const Messages& messages);
Messages messages_from_json(const nlohmann::json& array);

} // namespace drpo::llm
