#pragma once

#include "drpo/llm/types.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace drpo::llm {

struct BackendCall {
  const BackendProfile& profile;
  Stage stage;
  const Messages& messages;
  double temperature;
  int max_tokens;
  const nlohmann::json& meta;
};

// A chat-completion provider. Implementations must be safe to call from
// several threads at once.
class Backend {
public:
  virtual ~Backend() = default;
  virtual std::string complete(const BackendCall& call) = 0;
};

} // namespace drpo::llm
