#pragma once

#include "drpo/llm/types.hpp"

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

namespace drpo::llm {

struct CacheKey {
  std::string hex;  // SHA-256 over model, messages, temperature, max_tokens

  static CacheKey of(std::string_view model_id, const Messages& messages, double temperature,
                     int max_tokens);

  friend auto operator<=>(const CacheKey&, const CacheKey&) = default;
};

// Response cache. Always memory-backed; with a directory it also persists
// one JSON file per key ({response, model_id, timestamp}) and reads it back.
class ResponseCache {
public:
  ResponseCache() = default;
  explicit ResponseCache(std::optional<std::filesystem::path> dir);

  std::optional<std::string> get(const CacheKey& key);
  void put(const CacheKey& key, const std::string& response, const std::string& model_id);
  void erase(const CacheKey& key);
  std::size_t size() const;

private:
  std::filesystem::path file_for(const CacheKey& key) const;

  mutable std::mutex mutex_;
  std::map<CacheKey, std::string> memory_;
  std::optional<std::filesystem::path> dir_;
};

} // namespace drpo::llm
