#pragma once

#include "drpo/llm/types.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <mutex>
#include <utility>

namespace drpo::llm {

struct CallCounts {
  std::uint64_t hits = 0;      // served from cache
  std::uint64_t misses = 0;    // cache_policy = use, went upstream
  std::uint64_t bypassed = 0;  // cache_policy = bypass, went upstream

  std::uint64_t calls() const { return hits + misses + bypassed; }
  std::uint64_t upstream() const { return misses + bypassed; }

  CallCounts& operator+=(const CallCounts& other);
  friend bool operator==(const CallCounts&, const CallCounts&) = default;
};

enum class CallOutcome { hit, miss, bypass };

// Point-in-time copy of the ledger.
struct LedgerSnapshot {
  std::map<std::pair<Role, Stage>, CallCounts> cells;

  CallCounts by_role(Role role) const;
  CallCounts by_stage(Stage stage) const;
  CallCounts total() const;
  nlohmann::json to_json() const;
};

// Monotone per-(role, stage) counters of complete() invocations.
class CallLedger {
public:
  void record(Role role, Stage stage, CallOutcome outcome);
  LedgerSnapshot snapshot() const;

private:
  mutable std::mutex mutex_;
  std::map<std::pair<Role, Stage>, CallCounts> cells_;
};

} // namespace drpo::llm
