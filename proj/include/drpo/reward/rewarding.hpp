#pragma once

#include "drpo/llm/gateway.hpp"
#include "drpo/reward/criteria.hpp"
#include "drpo/templates.hpp"

#include <future>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace drpo::reward {

enum class Mode { dynamic, static_six };

// JSON skeleton with one {rationale, score} placeholder object per criterion,
// in order. Throws std::invalid_argument on an empty list.
std::string build_eval_dict(const std::vector<RewardCriterion>& selected);

// "- Name: rubric" lines for the rewarding prompt.
std::string render_aspect_list(const std::vector<RewardCriterion>& selected);

// Parses a reward-selection reply. Applies the 5-aspect cap (with a
// "truncate" warning to `warnings` when given) and throws SchemaError when
// fewer than 2 distinct aspects remain.
RewardSelection parse_selection(const nlohmann::json& reply, WarningLog* warnings);

// Parses a rewarding reply against `selection`. Scores are rounded to the
// nearest integer and clamped to 1..5 (with a "clamp" warning). Throws
// SchemaError naming the first criterion without a numeric score.
RewardReport parse_report(const nlohmann::json& reply, const RewardSelection& selection,
                          WarningLog* warnings);

// Query-adaptive reward function over the evaluator role.
class Rewarder {
public:
  Rewarder(llm::Gateway& gateway, const TemplateSet& templates, Mode mode = Mode::dynamic);

  Mode mode() const { return mode_; }

  // Chooses the aspects for `query`. One evaluator call per distinct query
  // for the lifetime of this object; static mode never calls the evaluator.
  // Throws RewardingError when no valid selection could be obtained.
  RewardSelection select_rewards(const std::string& query);

  // One evaluator call that returns per-aspect scores and rationales.
  // Throws RewardingError when the reply stays unusable after re-asks.
  RewardReport evaluate_response(const std::string& query, const std::string& output,
                                 const RewardSelection& selection,
                                 llm::Stage stage = llm::Stage::evaluation);

  std::string render_selection_prompt(const std::string& query) const;
  std::string render_rewarding_prompt(const std::string& query, const std::string& output,
                                      const RewardSelection& selection) const;

private:
  RewardSelection fetch_selection(const std::string& query);

  llm::Gateway& gateway_;
  const TemplateSet& templates_;
  Mode mode_;
  std::mutex mutex_;
  std::map<std::string, std::shared_future<RewardSelection>> selections_;
};

} // namespace drpo::reward
