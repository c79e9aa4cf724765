#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace drpo::reward {

enum class Origin { predefined, proposed };

struct RewardCriterion {
  std::string name;
  std::string description;  // one-sentence rubric
  Origin origin = Origin::predefined;

  friend bool operator==(const RewardCriterion&, const RewardCriterion&) = default;
};

// The 14 predefined aspects, in the order the selection prompt lists them.
const std::vector<RewardCriterion>& catalog();

// Case-, space-, hyphen- and underscore-insensitive key: "critical thinking"
// and "Critical-Thinking" both map to "criticalthinking".
std::string normalize_name(std::string_view name);

std::optional<RewardCriterion> find_in_catalog(std::string_view name);

// Catalog entry for `name`, or a proposed criterion whose rubric is the name.
RewardCriterion resolve_criterion(std::string_view name, std::string_view description = {});

struct QueryAnalysis {
  std::string main_topic;
  std::string user_intent;
  std::string ambiguities;
  std::string response_format;
  std::string challenges;
};

// The aspects a query is judged on.
struct RewardSelection {
  QueryAnalysis analysis;
  std::string reasoning;
  std::vector<RewardCriterion> selected;
  bool is_static = false;  // fixed six-aspect ablation, exempt from the 2..5 bound

  std::vector<std::string> names() const;
};

inline constexpr std::size_t kMinSelected = 2;
inline constexpr std::size_t kMaxSelected = 5;

// Helpfulness, Clarity, Factuality, Depth, Engagement, Safety.
RewardSelection static_selection();

// A static selection over caller-chosen aspect names (judge projections).
RewardSelection static_selection(const std::vector<std::string>& names);

struct CriterionScore {
  std::string name;
  int score = 0;  // 1..5
  std::string rationale;

  friend bool operator==(const CriterionScore&, const CriterionScore&) = default;
};

struct RewardReport {
  std::vector<CriterionScore> entries;  // selection order
  double aggregate = 0.0;

  // The rationales and scores as an indented JSON object keyed by aspect,
  // the form handed to transition prompts as alignment feedback.
  std::string feedback_text() const;
};

double mean_score(std::span<const CriterionScore> entries);

nlohmann::json to_json(const RewardCriterion& criterion);
nlohmann::json to_json(const RewardSelection& selection);
nlohmann::json to_json(const RewardReport& report);
RewardSelection selection_from_json(const nlohmann::json& value);
RewardReport report_from_json(const nlohmann::json& value);

} // namespace drpo::reward
