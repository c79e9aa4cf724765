#pragma once

#include "drpo/llm/types.hpp"
#include "drpo/reward/rewarding.hpp"
#include "drpo/search/search.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace drpo::cli {

struct Paths {
  std::filesystem::path seed_queries = "data/seed_queries.jsonl";
  std::filesystem::path base_icl = "data/base_icl.jsonl";
  std::optional<std::filesystem::path> icl_set;        // optimized examples for optimize-prompt
  std::optional<std::filesystem::path> templates_dir;  // template overrides
  std::filesystem::path runs_dir = "runs";
  std::optional<std::filesystem::path> cache_dir;      // default: <run dir>/cache
};

struct EmbedderConfig {
  std::string endpoint;  // empty: lexical retrieval only
  std::string model;
  std::string api_key_env;
};

struct RunConfig {
  std::map<llm::Role, llm::BackendProfile> backends;
  search::SearchConfig icl_search;
  search::SearchConfig prompt_search;
  int k = 2;
  reward::Mode rewarding = reward::Mode::dynamic;
  Paths paths;
  EmbedderConfig embedder;
  bool shuffle_seeds = false;
  bool cache = true;
  std::uint64_t seed = 0;
  int workers = 4;
  int max_in_flight = 4;
  bool mock = false;

  // Defaults: every role on the mock backend, optimizer at temperature 0.7,
  // ICL search W=1 M=1 D=5, prompt search W=2 M=3 D=20, K=2.
  RunConfig();

  const llm::BackendProfile& profile(llm::Role role) const;
};

// Reads a JSON config file. Relative paths inside it are resolved against
// the file's directory. Throws ConfigError on malformed content.
RunConfig load_config(const std::filesystem::path& file);
RunConfig config_from_json(const nlohmann::json& value, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const RunConfig& config);

// First 12 hex digits of the SHA-256 of the canonical config JSON. Fields
// that cannot change results (runs and cache directories, workers,
// max_in_flight) are left out.
std::string config_hash(const RunConfig& config);

// Command-line overrides; flags win over file values.
struct Overrides {
  std::optional<std::string> search;
  std::optional<std::string> rewarding;
  std::optional<int> width;
  std::optional<int> samples;
  std::optional<int> depth;
  std::optional<int> k;
  std::optional<int> mc_budget;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> run_dir;
  bool mock = false;
};

enum class Stage { icl, prompt };

// Applies `overrides` to the search settings of the given stages and to the
// global fields. Throws ConfigError on bad values.
void apply_overrides(RunConfig& config, const Overrides& overrides, std::initializer_list<Stage> stages);

} // namespace drpo::cli
