#pragma once

#include "drpo/events.hpp"
#include "drpo/llm/backend.hpp"
#include "drpo/llm/cache.hpp"
#include "drpo/llm/ledger.hpp"
#include "drpo/llm/types.hpp"

#include <nlohmann/json.hpp>

#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>

namespace drpo::llm {

struct GatewayOptions {
  bool cache_enabled = true;
  std::optional<std::filesystem::path> cache_dir;
  int max_in_flight = 4;     // per role
  int extraction_reasks = 2; // re-asks after a reply without JSON
  int schema_reasks = 1;     // re-asks after JSON with missing content
};

// Counting semaphore with a runtime limit.
class InFlightLimiter {
public:
  explicit InFlightLimiter(int limit);
  void acquire();
  void release();

private:
  std::mutex mutex_;
  std::condition_variable cv_;
  int available_;
};

// Single entry point for model calls. Binds one profile + backend per role,
// caches deterministic requests, counts every invocation and throttles
// concurrency per role. Safe to share between threads.
class Gateway {
public:
  explicit Gateway(GatewayOptions options = {}, std::shared_ptr<WarningLog> warnings = nullptr);

  void bind(BackendProfile profile, std::shared_ptr<Backend> backend);
  bool is_bound(Role role) const;
  const BackendProfile& profile(Role role) const;

  // Returns model text. Requests at temperature 0 with cache_policy = use are
  // served from the cache when possible.
  std::string complete(const CompletionRequest& request);

  // complete() + extract_json() + `validate`, with re-asks: after a reply
  // without JSON the model is reminded to answer with JSON only (up to
  // extraction_reasks times); after a SchemaError from `validate` it is told
  // what was missing (up to schema_reasks times). Each failed attempt logs a
  // warning and evicts the bad reply from the cache. The last error is
  // rethrown when the budget runs out.
  nlohmann::json complete_json(CompletionRequest request,
                               const std::function<void(const nlohmann::json&)>& validate = {});

  LedgerSnapshot call_ledger() const;
  WarningLog& warnings() { return *warnings_; }
  std::shared_ptr<WarningLog> shared_warnings() const { return warnings_; }
  const GatewayOptions& options() const { return options_; }

private:
  struct Binding {
    BackendProfile profile;
    std::shared_ptr<Backend> backend;
    std::unique_ptr<InFlightLimiter> limiter;
  };

  const Binding& binding(Role role) const;

  GatewayOptions options_;
  std::shared_ptr<WarningLog> warnings_;
  ResponseCache cache_;
  CallLedger ledger_;
  std::map<Role, Binding> bindings_;
};

} // namespace drpo::llm
