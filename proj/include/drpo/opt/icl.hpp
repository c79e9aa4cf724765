#pragma once

#include "drpo/opt/context.hpp"
#include "drpo/opt/types.hpp"
#include "drpo/reward/criteria.hpp"
#include "drpo/search/search.hpp"

#include <string>
#include <vector>

namespace drpo::opt {

// W=1, M=1, D=5.
search::SearchConfig default_icl_search();

// Renders the response-rewrite prompt. `history` lists prior responses,
// oldest first, ending with the current one.
std::string render_icl_transition(const TemplateSet& templates, const std::string& query,
                                  const std::string& current_response,
                                  const reward::RewardReport& feedback,
                                  const std::vector<std::string>& history);

// One optimizer call producing a revised response. Throws
// std::invalid_argument on empty feedback and TransitionError when the reply
// has no usable "new_response".
std::string transition_icl(const OptimizerContext& context, const std::string& query,
                           const std::string& current_response,
                           const reward::RewardReport& feedback,
                           const std::vector<std::string>& history, int sample = 0);

struct IclOutcome {
  ICLExample example;
  search::SearchResult search;
};

// Searches over responses to example.query starting from example.response.
// On failure the base example is returned with `failure` set.
IclOutcome optimize_icl_example(const OptimizerContext& context, const ICLExample& example,
                                const search::SearchConfig& config, const std::string& trace_id);

// Optimizes every example independently, in parallel up to context.workers.
// Order is preserved. Throws std::invalid_argument on an empty list.
std::vector<IclOutcome> optimize_icl_set(const OptimizerContext& context,
                                         const std::vector<ICLExample>& base,
                                         const search::SearchConfig& config);

} // namespace drpo::opt
