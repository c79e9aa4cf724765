#include "drpo/llm/cache.hpp"

#include "drpo/hashing.hpp"
#include "drpo/util/files.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace drpo::llm {

CacheKey CacheKey::of(std::string_view model_id, const Messages& messages, double temperature,
                      int max_tokens)
{
  const nlohmann::json material = {
      {"model", model_id}, {"messages", to_json(messages)}, {"temperature", temperature},
      {"max_tokens", max_tokens}};
  return CacheKey{sha256_hex(material.dump())};
}

ResponseCache::ResponseCache(std::optional<std::filesystem::path> dir) : dir_(std::move(dir))
{
  if (dir_) {
    std::filesystem::create_directories(*dir_);
  }
}

std::filesystem::path ResponseCache::file_for(const CacheKey& key) const
{
  return *dir_ / (key.hex + ".json");
}

std::optional<std::string> ResponseCache::get(const CacheKey& key)
{
  std::lock_guard lock(mutex_);
  if (auto it = memory_.find(key); it != memory_.end()) {
    return it->second;
  }
  if (!dir_) {
    return std::nullopt;
  }
  std::ifstream in(file_for(key));
  if (!in) {
    return std::nullopt;
  }
  const auto entry = nlohmann::json::parse(in, nullptr, false);
  if (entry.is_discarded() || !entry.contains("response") || !entry["response"].is_string()) {
    return std::nullopt;
  }
  auto response = entry["response"].get<std::string>();
  memory_.emplace(key, response);
  return response;
}

void ResponseCache::put(const CacheKey& key, const std::string& response, const std::string& model_id)
{
  std::lock_guard lock(mutex_);
  memory_[key] = response;
  if (dir_) {
    const nlohmann::json entry = {
        {"response", response}, {"model_id", model_id}, {"timestamp", util::utc_now()}};
    util::write_file_atomic(file_for(key), entry.dump(2));
  }
}

void ResponseCache::erase(const CacheKey& key)
{
  std::lock_guard lock(mutex_);
  memory_.erase(key);
  if (dir_) {
    std::error_code ignored;
    std::filesystem::remove(file_for(key), ignored);
  }
}

std::size_t ResponseCache::size() const
{
  std::lock_guard lock(mutex_);
  return memory_.size();
}

} // namespace drpo::llm
