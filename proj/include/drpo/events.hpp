#pragma once

#include <cstddef>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace drpo {

struct Warning {
  std::string category;
  std::string message;
};

// Thread-safe, append-only record of non-fatal problems seen during a run.
// Categories used by the library:
//   extraction  - model reply had no parseable JSON (a re-ask follows)
//   schema      - JSON parsed but missed required content
//   clamp       - judge score outside 1..5 was clamped
//   truncate    - more than 5 aspects selected, list cut to 5
//   node        - a search node was dropped
//   embedder    - remote embedder failed, lexical fallback used
//   transfer    - artifact applied to a model it was not optimized for
class WarningLog {
public:
  void warn(std::string category, std::string message);

  std::vector<Warning> snapshot() const;
  std::size_t size() const;
  std::size_t count(const std::string& category) const;
  std::map<std::string, std::size_t> counts() const;

private:
  mutable std::mutex mutex_;
  std::vector<Warning> entries_;
};

} // namespace drpo
