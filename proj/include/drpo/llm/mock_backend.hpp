#pragma once

#include "drpo/llm/backend.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace drpo::llm {

struct MockCall {
  Role role;
  Stage stage;
  const Messages& messages;
  const nlohmann::json& meta;
  const BackendProfile& profile;

  const std::string& last_user() const;
};

// Returns a reply, or nullopt to let the next rule decide.
using MockRule = std::function<std::optional<std::string>(const MockCall&)>;

struct RecordedCall {
  Role role;
  Stage stage;
  Messages messages;
};

// Offline backend. Lookup order: the scripted table (keyed by the text of the
// last user message), then custom rules in insertion order, then the default
// rule, which answers every pipeline stage with well-formed JSON whose content
// is derived from a digest of the request. Replies depend only on request
// content, so results do not depend on call order or thread interleaving.
class MockBackend : public Backend {
public:
  void script(std::string prompt, std::string reply);
  void add_rule(MockRule rule);
  void enable_default_rule(bool enabled);

  std::string complete(const BackendCall& call) override;

  std::uint64_t calls() const;
  std::vector<RecordedCall> recorded() const;

  static std::string default_reply(const MockCall& call);

private:
  mutable std::mutex mutex_;
  std::map<std::string, std::string, std::less<>> table_;
  std::vector<MockRule> rules_;
  bool default_enabled_ = true;
  std::vector<RecordedCall> recorded_;
};

} // namespace drpo::llm
