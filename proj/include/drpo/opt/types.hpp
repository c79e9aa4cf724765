#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace drpo::opt {

enum class Category { unethical, informative };
enum class Provenance { urial, generated, user };
enum class SeedSource { alpaca_eval, lima, redteam, other };

std::string_view to_string(Category value);
std::string_view to_string(Provenance value);
std::string_view to_string(SeedSource value);

// One (query, response) demonstration.
struct ICLExample {
  std::string query;
  std::string response;
  Category category = Category::informative;
  Provenance provenance = Provenance::user;
  bool optimized = false;
  std::string trace_id;  // set when optimized
  std::string failure;   // non-empty when optimization failed and the base response was kept

  friend bool operator==(const ICLExample&, const ICLExample&) = default;
};

struct SeedQuery {
  std::string query;
  SeedSource source = SeedSource::other;
};

struct SeedDataset {
  std::vector<SeedQuery> queries;

  std::size_t size() const { return queries.size(); }
  // Throws ConfigError on empty or duplicate queries.
  void validate() const;
};

// The product of a run: optimized system prompt plus the optimized examples
// it is served with.
struct AlignmentArtifact {
  std::string system_prompt;
  std::vector<ICLExample> icl_examples;
  int k = 2;
  std::string target_model;
  std::string config_hash;
  std::string created_at;
  std::vector<std::string> trace_ids;

  // Throws ConfigError when K exceeds the pool or the prompt is empty.
  void validate() const;
};

inline constexpr std::string_view kBasicSystemPrompt = "You are a helpful assistant.";

nlohmann::json to_json(const ICLExample& example);
ICLExample icl_example_from_json(const nlohmann::json& value);
nlohmann::json to_json(const AlignmentArtifact& artifact);
AlignmentArtifact artifact_from_json(const nlohmann::json& value);

// Line-delimited loaders. Blank lines are skipped; a malformed line throws
// ConfigError naming the file and line.
std::vector<ICLExample> load_icl_jsonl(const std::filesystem::path& path);
SeedDataset load_seed_jsonl(const std::filesystem::path& path);

// icl_set.json holds a JSON array of examples.
std::vector<ICLExample> load_icl_set(const std::filesystem::path& path);
AlignmentArtifact load_artifact(const std::filesystem::path& path);

} // namespace drpo::opt
