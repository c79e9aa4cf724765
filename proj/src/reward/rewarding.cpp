#include "drpo/reward/rewarding.hpp"

#include "drpo/errors.hpp"
#include "drpo/llm/json_extract.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace drpo::reward {
namespace {

std::string lower(std::string text)
{
  std::transform(text.begin(), text.end(), text.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return text;
}

const nlohmann::json* find_entry(const nlohmann::json& reply, const std::string& name)
{
  if (!reply.is_object()) {
    return nullptr;
  }
  if (auto it = reply.find(name); it != reply.end()) {
    return &*it;
  }
  const auto key = normalize_name(name);
  for (auto it = reply.begin(); it != reply.end(); ++it) {
    if (normalize_name(it.key()) == key) {
      return &*it;
    }
  }
  return nullptr;
}

std::string stage_label(llm::Stage stage)
{
  return std::string(llm::to_string(stage));
}

} // namespace

std::string build_eval_dict(const std::vector<RewardCriterion>& selected)
{
  if (selected.empty()) {
    throw std::invalid_argument("eval dict needs at least one criterion");
  }
  nlohmann::ordered_json dict = nlohmann::ordered_json::object();
  for (const auto& c : selected) {
    const auto name = lower(c.name);
    dict[c.name] = {{"rationale", "[your thoughts on the " + name + " of the response]"},
                    {"score", "[your " + name + " score]"}};
  }
  return dict.dump(4);
}

std::string render_aspect_list(const std::vector<RewardCriterion>& selected)
{
  std::string out;
  for (const auto& c : selected) {
    if (!out.empty()) {
      out += "\n";
    }
    out += "- " + c.name + ": " + c.description;
  }
  return out;
}

RewardSelection parse_selection(const nlohmann::json& reply, WarningLog* warnings)
{
  if (!reply.is_object()) {
    throw SchemaError("selection reply is not a JSON object");
  }
  const auto block = reply.value("aspects_selection", nlohmann::json::object());
  const auto aspects = block.contains("selected_aspects") ? block.at("selected_aspects")
                                                          : reply.value("selected_aspects", nlohmann::json());
  if (!aspects.is_array()) {
    throw SchemaError("selection reply has no selected_aspects list");
  }

  RewardSelection out;
  const auto analysis = reply.value("query_analysis", nlohmann::json::object());
  out.analysis = {llm::text_field(analysis, "main_topic"), llm::text_field(analysis, "user_intent"),
                  llm::text_field(analysis, "ambiguities"), llm::text_field(analysis, "response_format"),
                  llm::text_field(analysis, "challenges")};
  out.reasoning = llm::text_field(block, "reasoning");

  for (const auto& item : aspects) {
    std::string name;
    std::string description;
    if (item.is_string()) {
      name = item.get<std::string>();
    } else if (item.is_object()) {
      name = llm::text_field(item, "name");
      description = llm::text_field(item, "description");
    }
    if (normalize_name(name).empty()) {
      continue;
    }
    auto criterion = resolve_criterion(name, description);
    const auto key = normalize_name(criterion.name);
    const bool duplicate = std::any_of(out.selected.begin(), out.selected.end(),
                                       [&](const auto& c) { return normalize_name(c.name) == key; });
    if (!duplicate) {
      out.selected.push_back(std::move(criterion));
    }
  }

  if (out.selected.size() > kMaxSelected) {
    if (warnings) {
      warnings->warn("truncate", "selection listed " + std::to_string(out.selected.size()) +
                                     " aspects, keeping the first 5");
    }
    out.selected.resize(kMaxSelected);
  }
  if (out.selected.size() < kMinSelected) {
    throw SchemaError("select at least 2 distinct aspects, got " + std::to_string(out.selected.size()));
  }
  return out;
}

RewardReport parse_report(const nlohmann::json& reply, const RewardSelection& selection,
                          WarningLog* warnings)
{
  RewardReport report;
  for (const auto& criterion : selection.selected) {
    const auto* entry = find_entry(reply, criterion.name);
    if (!entry) {
      throw SchemaError("missing score for aspect \"" + criterion.name + "\"");
    }
    const nlohmann::json* score = entry->is_object() && entry->contains("score") ? &entry->at("score")
                                                                                 : entry;
    if (!score->is_number()) {
      throw SchemaError("score for aspect \"" + criterion.name + "\" is not a number");
    }
    const double raw = score->get<double>();
    if (!std::isfinite(raw)) {
      throw SchemaError("score for aspect \"" + criterion.name + "\" is not finite");
    }
    const auto rounded = static_cast<long long>(std::llround(raw));
    const int clamped = static_cast<int>(std::clamp<long long>(rounded, 1, 5));
    if (clamped != rounded && warnings) {
      warnings->warn("clamp", criterion.name + " score " + score->dump() + " clamped to " +
                                  std::to_string(clamped));
    }
    report.entries.push_back(
        {criterion.name, clamped, entry->is_object() ? llm::text_field(*entry, "rationale") : ""});
  }
  report.aggregate = mean_score(report.entries);
  return report;
}

Rewarder::Rewarder(llm::Gateway& gateway, const TemplateSet& templates, Mode mode)
    : gateway_(gateway), templates_(templates), mode_(mode)
{
}

std::string Rewarder::render_selection_prompt(const std::string& query) const
{
  return templates_.render(TemplateKind::reward_selection, {{"QUERY", query}});
}

std::string Rewarder::render_rewarding_prompt(const std::string& query, const std::string& output,
                                              const RewardSelection& selection) const
{
  return templates_.render(TemplateKind::rewarding,
                           {{"QUERY", query},
                            {"OUTPUT", output},
                            {"ASPECT_LIST", render_aspect_list(selection.selected)},
                            {"ASPECT_REASON", selection.reasoning},
                            {"EVAL_DICT", build_eval_dict(selection.selected)}});
}

RewardSelection Rewarder::select_rewards(const std::string& query)
{
  if (mode_ == Mode::static_six) {
    return static_selection();
  }
  std::shared_future<RewardSelection> future;
  std::promise<RewardSelection> promise;
  bool owner = false;
  {
    std::lock_guard lock(mutex_);
    auto it = selections_.find(query);
    if (it == selections_.end()) {
      future = promise.get_future().share();
      selections_.emplace(query, future);
      owner = true;
    } else {
      future = it->second;
    }
  }
  if (owner) {
    try {
      promise.set_value(fetch_selection(query));
    } catch (...) {
      promise.set_exception(std::current_exception());
    }
  }
  return future.get();
}

RewardSelection Rewarder::fetch_selection(const std::string& query)
{
  llm::CompletionRequest request;
  request.role = llm::Role::evaluator;
  request.stage = llm::Stage::reward_selection;
  request.messages = {{llm::Speaker::user, render_selection_prompt(query)}};
  request.meta = {{"query", query}};
  try {
    const auto reply = gateway_.complete_json(
        request, [](const nlohmann::json& value) { parse_selection(value, nullptr); });
    return parse_selection(reply, &gateway_.warnings());
  } catch (const ExtractionError& e) {
    throw RewardingError(std::string("reward selection failed: ") + e.what());
  } catch (const SchemaError& e) {
    throw RewardingError(std::string("reward selection failed: ") + e.what());
  }
}

RewardReport Rewarder::evaluate_response(const std::string& query, const std::string& output,
                                         const RewardSelection& selection, llm::Stage stage)
{
  if (selection.selected.empty()) {
    throw std::invalid_argument("evaluate_response needs a nonempty selection");
  }
  llm::CompletionRequest request;
  request.role = llm::Role::evaluator;
  request.stage = stage;
  request.messages = {{llm::Speaker::user, render_rewarding_prompt(query, output, selection)}};
  request.meta = {{"query", query}, {"output", output}, {"aspects", selection.names()}};
  try {
    const auto reply = gateway_.complete_json(
        request, [&](const nlohmann::json& value) { parse_report(value, selection, nullptr); });
    return parse_report(reply, selection, &gateway_.warnings());
  } catch (const ExtractionError& e) {
    throw RewardingError(stage_label(stage) + " failed: " + e.what());
  } catch (const SchemaError& e) {
    throw RewardingError(stage_label(stage) + " failed: " + e.what());
  }
}

} // namespace drpo::reward
