#include "drpo/opt/types.hpp"

#include "drpo/errors.hpp"
#include "drpo/util/files.hpp"

#include <array>
#include <set>
#include <sstream>

namespace drpo::opt {
namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(const std::string& text, const std::array<Enum, N>& values, std::string_view what)
{
  for (const auto v : values) {
    if (to_string(v) == text) {
      return v;
    }
  }
  throw ConfigError("unknown " + std::string(what) + " \"" + text + "\"");
}

Category category_from(const std::string& text)
{
  return parse_enum(text, std::array{Category::unethical, Category::informative}, "category");
}

Provenance provenance_from(const std::string& text)
{
  return parse_enum(text, std::array{Provenance::urial, Provenance::generated, Provenance::user},
                    "provenance");
}

SeedSource source_from(const std::string& text)
{
  return parse_enum(text,
                    std::array{SeedSource::alpaca_eval, SeedSource::lima, SeedSource::redteam,
                               SeedSource::other},
                    "seed source");
}

template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn fn)
{
  std::istringstream in(util::read_file(path));
  int number = 0;
  for (std::string line; std::getline(in, line);) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      fn(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

} // namespace

std::string_view to_string(Category value)
{
  return value == Category::unethical ? "unethical" : "informative";
}

std::string_view to_string(Provenance value)
{
  switch (value) {
  case Provenance::urial:
    return "urial";
  case Provenance::generated:
    return "generated";
  case Provenance::user:
    return "user";
  }
  return "user";
}

std::string_view to_string(SeedSource value)
{
  switch (value) {
  case SeedSource::alpaca_eval:
    return "alpaca_eval";
  case SeedSource::lima:
    return "lima";
  case SeedSource::redteam:
    return "redteam";
  case SeedSource::other:
    return "other";
  }
  return "other";
}

void SeedDataset::validate() const
{
  if (queries.empty()) {
    throw ConfigError("seed dataset is empty");
  }
  std::set<std::string> seen;
  for (const auto& q : queries) {
    if (q.query.empty()) {
      throw ConfigError("seed dataset contains an empty query");
    }
    if (!seen.insert(q.query).second) {
      throw ConfigError("duplicate seed query: " + q.query);
    }
  }
}

void AlignmentArtifact::validate() const
{
  if (system_prompt.empty()) {
    throw ConfigError("artifact has an empty system prompt");
  }
  if (k < 0 || static_cast<std::size_t>(k) > icl_examples.size()) {
    throw ConfigError("artifact K=" + std::to_string(k) + " exceeds its " +
                      std::to_string(icl_examples.size()) + " examples");
  }
}

nlohmann::json to_json(const ICLExample& example)
{
  nlohmann::json out = {{"query", example.query},
                        {"response", example.response},
                        {"category", to_string(example.category)},
                        {"provenance", to_string(example.provenance)},
                        {"optimized", example.optimized}};
  if (!example.trace_id.empty()) {
    out["trace_id"] = example.trace_id;
  }
  if (!example.failure.empty()) {
    out["failure"] = example.failure;
  }
  return out;
}

ICLExample icl_example_from_json(const nlohmann::json& value)
{
  ICLExample out;
  out.query = value.at("query").get<std::string>();
  if (out.query.empty()) {
    throw ConfigError("example has an empty query");
  }
  out.response = value.at("response").get<std::string>();
  out.category = category_from(value.value("category", "informative"));
  out.provenance = provenance_from(value.value("provenance", "user"));
  out.optimized = value.value("optimized", false);
  out.trace_id = value.value("trace_id", "");
  out.failure = value.value("failure", "");
  return out;
}

nlohmann::json to_json(const AlignmentArtifact& artifact)
{
  nlohmann::json examples = nlohmann::json::array();
  for (const auto& e : artifact.icl_examples) {
    examples.push_back(to_json(e));
  }
  return {{"system_prompt", artifact.system_prompt},
          {"icl_examples", examples},
          {"K", artifact.k},
          {"target_model", artifact.target_model},
          {"config_hash", artifact.config_hash},
          {"created_at", artifact.created_at},
          {"trace_ids", artifact.trace_ids}};
}

AlignmentArtifact artifact_from_json(const nlohmann::json& value)
{
  AlignmentArtifact out;
  try {
    out.system_prompt = value.at("system_prompt").get<std::string>();
    for (const auto& e : value.at("icl_examples")) {
      out.icl_examples.push_back(icl_example_from_json(e));
    }
    out.k = value.value("K", 2);
    out.target_model = value.value("target_model", "");
    out.config_hash = value.value("config_hash", "");
    out.created_at = value.value("created_at", "");
    out.trace_ids = value.value("trace_ids", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed artifact: ") + e.what());
  }
  out.validate();
  return out;
}

std::vector<ICLExample> load_icl_jsonl(const std::filesystem::path& path)
{
  std::vector<ICLExample> out;
  for_each_line(path, [&](const nlohmann::json& j) { out.push_back(icl_example_from_json(j)); });
  return out;
}

SeedDataset load_seed_jsonl(const std::filesystem::path& path)
{
  SeedDataset out;
  for_each_line(path, [&](const nlohmann::json& j) {
    out.queries.push_back({j.at("query").get<std::string>(), source_from(j.value("source", "other"))});
  });
  out.validate();
  return out;
}

std::vector<ICLExample> load_icl_set(const std::filesystem::path& path)
{
  try {
    const auto value = nlohmann::json::parse(util::read_file(path));
    std::vector<ICLExample> out;
    for (const auto& e : value) {
      out.push_back(icl_example_from_json(e));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

AlignmentArtifact load_artifact(const std::filesystem::path& path)
{
  try {
    return artifact_from_json(nlohmann::json::parse(util::read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

} // namespace drpo::opt
