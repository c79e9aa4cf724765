#include "drpo/cli/config.hpp"

#include "drpo/errors.hpp"
#include "drpo/hashing.hpp"
#include "drpo/opt/icl.hpp"
#include "drpo/opt/system_prompt.hpp"
#include "drpo/util/files.hpp"

#include <set>

namespace drpo::cli {
namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& text)
{
  std::filesystem::path p(text);
  return p.is_absolute() || base.empty() ? p : base / p;
}

std::string path_text(const std::optional<std::filesystem::path>& p)
{
  return p ? p->generic_string() : "";
}

reward::Mode mode_from(const std::string& text)
{
  if (text == "dynamic") {
    return reward::Mode::dynamic;
  }
  if (text == "static") {
    return reward::Mode::static_six;
  }
  throw ConfigError("rewarding must be \"dynamic\" or \"static\", got \"" + text + "\"");
}

std::string_view mode_name(reward::Mode mode)
{
  return mode == reward::Mode::dynamic ? "dynamic" : "static";
}

llm::BackendProfile profile_from(llm::Role role, const nlohmann::json& j, llm::BackendProfile p)
{
  p.role = role;
  p.endpoint = j.value("endpoint", p.endpoint);
  p.model_id = j.value("model_id", p.model_id);
  p.temperature = j.value("temperature", p.temperature);
  p.max_tokens = j.value("max_tokens", p.max_tokens);
  p.api_key_env = j.value("api_key_env", p.api_key_env);
  return p;
}

} // namespace

RunConfig::RunConfig()
    : icl_search(opt::default_icl_search()), prompt_search(opt::default_prompt_search())
{
  for (const auto role : llm::kAllRoles) {
    llm::BackendProfile p;
    p.role = role;
    p.temperature = role == llm::Role::optimizer ? 0.7 : 0.0;
    backends[role] = p;
  }
}

const llm::BackendProfile& RunConfig::profile(llm::Role role) const
{
  const auto it = backends.find(role);
  if (it == backends.end()) {
    throw ConfigError("no backend configured for role " + std::string(llm::to_string(role)));
  }
  return it->second;
}

RunConfig config_from_json(const nlohmann::json& value, const std::filesystem::path& base_dir)
{
  if (!value.is_object()) {
    throw ConfigError("config must be a JSON object");
  }
  static const std::set<std::string> known{"backends", "icl",          "prompt",  "K",    "rewarding",
                                           "paths",    "embedder",     "shuffle_seeds", "cache", "seed",
                                           "workers",  "max_in_flight", "mock"};
  for (const auto& [key, unused] : value.items()) {
    if (!known.contains(key)) {
      throw ConfigError("unknown config key \"" + key + "\"");
    }
  }
  RunConfig config;
  try {
    if (value.contains("backends")) {
      for (const auto& [name, profile] : value.at("backends").items()) {
        const auto role = llm::role_from_string(name);
        config.backends[role] = profile_from(role, profile, config.backends[role]);
      }
    }
    if (value.contains("icl")) {
      config.icl_search = search::search_config_from_json(value.at("icl"), config.icl_search);
    }
    if (value.contains("prompt")) {
      config.prompt_search = search::search_config_from_json(value.at("prompt"), config.prompt_search);
    }
    config.k = value.value("K", config.k);
    if (value.contains("rewarding")) {
      config.rewarding = mode_from(value.at("rewarding").get<std::string>());
    }
    const auto paths = value.value("paths", nlohmann::json::object());
    auto& p = config.paths;
    if (paths.contains("seed_queries")) {
      p.seed_queries = resolve(base_dir, paths.at("seed_queries"));
    }
    if (paths.contains("base_icl")) {
      p.base_icl = resolve(base_dir, paths.at("base_icl"));
    }
    if (paths.contains("icl_set")) {
      p.icl_set = resolve(base_dir, paths.at("icl_set"));
    }
    if (paths.contains("templates_dir")) {
      p.templates_dir = resolve(base_dir, paths.at("templates_dir"));
    }
    if (paths.contains("runs_dir")) {
      p.runs_dir = resolve(base_dir, paths.at("runs_dir"));
    }
    if (paths.contains("cache_dir")) {
      p.cache_dir = resolve(base_dir, paths.at("cache_dir"));
    }
    const auto embedder = value.value("embedder", nlohmann::json::object());
    config.embedder = {embedder.value("endpoint", ""), embedder.value("model", ""),
                       embedder.value("api_key_env", "")};
    config.shuffle_seeds = value.value("shuffle_seeds", config.shuffle_seeds);
    config.cache = value.value("cache", config.cache);
    config.seed = value.value("seed", config.seed);
    config.workers = value.value("workers", config.workers);
    config.max_in_flight = value.value("max_in_flight", config.max_in_flight);
    config.mock = value.value("mock", config.mock);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  if (config.k < 0) {
    throw ConfigError("K must not be negative");
  }
  if (config.workers < 1 || config.max_in_flight < 1) {
    throw ConfigError("workers and max_in_flight must be at least 1");
  }
  for (const auto& [role, profile] : config.backends) {
    llm::validate(profile);
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& file)
{
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(util::read_file(file));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  return config_from_json(value, file.parent_path());
}

nlohmann::json to_json(const RunConfig& config)
{
  nlohmann::json backends = nlohmann::json::object();
  for (const auto& [role, p] : config.backends) {
    backends[std::string(llm::to_string(role))] = {{"endpoint", p.endpoint},
                                                   {"model_id", p.model_id},
                                                   {"temperature", p.temperature},
                                                   {"max_tokens", p.max_tokens},
                                                   {"api_key_env", p.api_key_env}};
  }
  const auto& p = config.paths;
  return {{"backends", backends},
          {"icl", search::to_json(config.icl_search)},
          {"prompt", search::to_json(config.prompt_search)},
          {"K", config.k},
          {"rewarding", mode_name(config.rewarding)},
          {"paths",
           {{"seed_queries", p.seed_queries.generic_string()},
            {"base_icl", p.base_icl.generic_string()},
            {"icl_set", path_text(p.icl_set)},
            {"templates_dir", path_text(p.templates_dir)},
            {"runs_dir", p.runs_dir.generic_string()},
            {"cache_dir", path_text(p.cache_dir)}}},
          {"embedder",
           {{"endpoint", config.embedder.endpoint},
            {"model", config.embedder.model},
            {"api_key_env", config.embedder.api_key_env}}},
          {"shuffle_seeds", config.shuffle_seeds},
          {"cache", config.cache},
          {"seed", config.seed},
          {"workers", config.workers},
          {"max_in_flight", config.max_in_flight},
          {"mock", config.mock}};
}

std::string config_hash(const RunConfig& config)
{
  auto value = to_json(config);
  value["paths"].erase("runs_dir");
  value["paths"].erase("cache_dir");
  value.erase("workers");
  value.erase("max_in_flight");
  return sha256_hex(value.dump()).substr(0, 12);
}

void apply_overrides(RunConfig& config, const Overrides& overrides, std::initializer_list<Stage> stages)
{
  for (const auto stage : stages) {
    auto& s = stage == Stage::icl ? config.icl_search : config.prompt_search;
    if (overrides.search) {
      s.strategy = search::strategy_from_string(*overrides.search);
    }
    if (overrides.width) {
      s.width = *overrides.width;
    }
    if (overrides.samples) {
      s.samples = *overrides.samples;
    }
    if (overrides.depth) {
      s.depth = *overrides.depth;
    }
    if (overrides.mc_budget) {
      s.mc_budget = *overrides.mc_budget;
    }
    if (s.strategy == search::Strategy::greedy) {
      s.width = 1;
    }
    search::validate(s);
  }
  if (overrides.rewarding) {
    config.rewarding = mode_from(*overrides.rewarding);
  }
  if (overrides.k) {
    if (*overrides.k < 0) {
      throw ConfigError("K must not be negative");
    }
    config.k = *overrides.k;
  }
  if (overrides.seed) {
    config.seed = *overrides.seed;
  }
  if (overrides.run_dir) {
    config.paths.runs_dir = *overrides.run_dir;
  }
  if (overrides.mock) {
    config.mock = true;
  }
}

} // namespace drpo::cli
