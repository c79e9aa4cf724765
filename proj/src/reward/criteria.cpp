#include "drpo/reward/criteria.hpp"

#include "drpo/errors.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

namespace drpo::reward {

const std::vector<RewardCriterion>& catalog()
{
  static const std::vector<RewardCriterion> entries{
      {"Helpfulness",
       "The response should directly address the user's query and provide a relevant and practical "
       "solution or guidance."},
      {"Clarity",
       "The response should be well-structured and articulate, with ideas presented in a clear, "
       "understandable, and coherent manner."},
      {"Factuality",
       "Information provided must be accurate, truthful, and based on reliable sources, acknowledging "
       "any uncertainties where applicable."},
      {"Depth",
       "The response should offer an appropriate level of detail and thoroughness, providing a "
       "comprehensive understanding of the topic."},
      {"Engagement",
       "The conversation should be engaging, maintaining the user's interest with a natural, "
       "conversational tone and possibly interactive elements."},
      {"Conciseness",
       "Information should be conveyed efficiently, avoiding unnecessary complexity or verbosity while "
       "maintaining completeness."},
      {"Safety",
       "Responses must adhere to ethical guidelines, promoting positive interactions and avoiding "
       "harmful, inappropriate, or sensitive content."},
      {"Compliance",
       "The response should be in line with the instructions provided in the query, ensuring user "
       "expectations are met unless there are ethical or safety concerns."},
      {"Limitations",
       "The response should recognize and acknowledge the AI system's limitations, such as lacking "
       "up-to-date information, inability to perform searches or physical actions, or any other "
       "relevant constraints if applicable."},
      {"Critical-Thinking",
       "The response should question and analyze the information and assumptions presented in the "
       "user's query critically, rather than accepting them at face value."},
      {"Creativity",
       "Responses should demonstrate originality and innovation, offering unique perspectives or "
       "solutions where appropriate."},
      {"Interactivity",
       "Where applicable, the AI should employ interactive elements like questions, prompts, or "
       "actionable suggestions to engage users actively in the conversation."},
      {"Empathy",
       "The AI should aim to recognize and appropriately respond to the user's emotional state and "
       "context, fostering a supportive and understanding interaction."},
      {"Sensitivity",
       "Responses should be culturally aware and sensitive, avoiding assumptions and generalizations "
       "while respecting diversity."},
  };
  return entries;
}

std::string normalize_name(std::string_view name)
{
  std::string out;
  for (const unsigned char c : name) {
    if (std::isalnum(c)) {
      out.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  return out;
}

std::optional<RewardCriterion> find_in_catalog(std::string_view name)
{
  const auto key = normalize_name(name);
  for (const auto& entry : catalog()) {
    if (normalize_name(entry.name) == key) {
      return entry;
    }
  }
  return std::nullopt;
}

RewardCriterion resolve_criterion(std::string_view name, std::string_view description)
{
  if (auto known = find_in_catalog(name)) {
    return *known;
  }
  std::string trimmed(name);
  trimmed.erase(0, trimmed.find_first_not_of(" \t\n"));
  trimmed.erase(trimmed.find_last_not_of(" \t\n") + 1);
  return RewardCriterion{trimmed, description.empty() ? trimmed : std::string(description),
                         Origin::proposed};
}

std::vector<std::string> RewardSelection::names() const
{
  std::vector<std::string> out;
  out.reserve(selected.size());
  for (const auto& c : selected) {
    out.push_back(c.name);
  }
  return out;
}

RewardSelection static_selection()
{
  return static_selection({"Helpfulness", "Clarity", "Factuality", "Depth", "Engagement", "Safety"});
}

RewardSelection static_selection(const std::vector<std::string>& names)
{
  if (names.empty()) {
    throw ConfigError("static selection needs at least one aspect");
  }
  RewardSelection selection;
  selection.is_static = true;
  selection.reasoning = "A fixed set of aspects is used for every query.";
  for (const auto& name : names) {
    auto criterion = resolve_criterion(name);
    const auto key = normalize_name(criterion.name);
    const bool duplicate = std::any_of(selection.selected.begin(), selection.selected.end(),
                                       [&](const auto& c) { return normalize_name(c.name) == key; });
    if (!duplicate) {
      selection.selected.push_back(std::move(criterion));
    }
  }
  return selection;
}

std::string RewardReport::feedback_text() const
{
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& entry : entries) {
    out[entry.name] = {{"rationale", entry.rationale}, {"score", entry.score}};
  }
  return out.dump(4);
}

double mean_score(std::span<const CriterionScore> entries)
{
  if (entries.empty()) {
    return 0.0;
  }
  const double sum = std::accumulate(entries.begin(), entries.end(), 0.0,
                                     [](double acc, const CriterionScore& e) { return acc + e.score; });
  return sum / static_cast<double>(entries.size());
}

nlohmann::json to_json(const RewardCriterion& criterion)
{
  return {{"name", criterion.name},
          {"description", criterion.description},
          {"origin", criterion.origin == Origin::predefined ? "predefined" : "proposed"}};
}

nlohmann::json to_json(const RewardSelection& selection)
{
  nlohmann::json selected = nlohmann::json::array();
  for (const auto& c : selection.selected) {
    selected.push_back(to_json(c));
  }
  const auto& a = selection.analysis;
  return {{"query_analysis",
           {{"main_topic", a.main_topic},
            {"user_intent", a.user_intent},
            {"ambiguities", a.ambiguities},
            {"response_format", a.response_format},
            {"challenges", a.challenges}}},
          {"reasoning", selection.reasoning},
          {"selected", selected},
          {"static", selection.is_static}};
}

nlohmann::json to_json(const RewardReport& report)
{
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"name", e.name}, {"score", e.score}, {"rationale", e.rationale}});
  }
  return {{"entries", entries}, {"aggregate", report.aggregate}};
}

RewardSelection selection_from_json(const nlohmann::json& value)
{
  RewardSelection out;
  const auto analysis = value.value("query_analysis", nlohmann::json::object());
  out.analysis = {analysis.value("main_topic", ""), analysis.value("user_intent", ""),
                  analysis.value("ambiguities", ""), analysis.value("response_format", ""),
                  analysis.value("challenges", "")};
  out.reasoning = value.value("reasoning", "");
  out.is_static = value.value("static", false);
  for (const auto& c : value.at("selected")) {
    out.selected.push_back({c.at("name").get<std::string>(), c.value("description", ""),
                            c.value("origin", "predefined") == "proposed" ? Origin::proposed
                                                                          : Origin::predefined});
  }
  return out;
}

RewardReport report_from_json(const nlohmann::json& value)
{
  RewardReport out;
  for (const auto& e : value.at("entries")) {
    out.entries.push_back(
        {e.at("name").get<std::string>(), e.at("score").get<int>(), e.value("rationale", "")});
  }
  out.aggregate = value.value("aggregate", mean_score(out.entries));
  return out;
}

} // namespace drpo::reward
