#pragma once

#include "drpo/llm/types.hpp"
#include "drpo/opt/context.hpp"
#include "drpo/opt/types.hpp"
#include "drpo/reward/criteria.hpp"
#include "drpo/search/search.hpp"

#include <string>
#include <vector>

namespace drpo::opt {

// W=2, M=3, D=20.
search::SearchConfig default_prompt_search();

std::string render_prompt_transition(const TemplateSet& templates, const std::string& current_prompt,
                                     const std::string& query, const std::string& output,
                                     const reward::RewardReport& evaluation,
                                     const std::vector<std::string>& history);

struct PromptTransition {
  std::string new_system_prompt;
  std::string analysis;
  std::string thought;
};

// One optimizer call producing a new system prompt. Throws TransitionError
// when the reply has no usable "new_system_prompt".
PromptTransition transition_prompt(const OptimizerContext& context,
                                   const std::string& current_prompt, const std::string& query,
                                   const std::string& output,
                                   const reward::RewardReport& evaluation,
                                   const std::vector<std::string>& history, int sample = 0);

struct PromptSearchSettings {
  search::SearchConfig search = default_prompt_search();
  int k = 2;
  std::string root_prompt = std::string(kBasicSystemPrompt);
};

// The system-prompt search as a pair of callbacks. A state at depth d is
// judged on seed query max(d-1, 0): the root and the depth-1 children share
// the first query, and every later depth brings the next one.
class PromptSearchProblem {
public:
  PromptSearchProblem(const OptimizerContext& context, const SeedDataset& seeds,
                      const std::vector<ICLExample>& icl, const PromptSearchSettings& settings);

  const std::string& query_for_depth(int depth) const;

  search::Evaluation score(const std::string& prompt, int depth) const;
  std::string expand(const search::ExpandContext& context) const;

private:
  const OptimizerContext& context_;
  const SeedDataset& seeds_;
  const std::vector<ICLExample>& icl_;
  PromptSearchSettings settings_;
};

struct DepthSummary {
  int depth;
  std::string query;
  double best_reward;
  std::vector<int> beam;
};

struct PromptOutcome {
  AlignmentArtifact artifact;
  search::SearchResult search;
  std::vector<DepthSummary> trajectory;
};

// Throws ConfigError when D exceeds the seed count or the ICL pool is smaller
// than K.
PromptOutcome optimize_system_prompt(const OptimizerContext& context, const SeedDataset& seeds,
                                     const std::vector<ICLExample>& icl,
                                     const PromptSearchSettings& settings,
                                     const llm::BackendProfile& target);

} // namespace drpo::opt
