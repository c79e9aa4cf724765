#include "drpo/opt/system_prompt.hpp"

#include "drpo/errors.hpp"
#include "drpo/llm/json_extract.hpp"
#include "drpo/opt/inference.hpp"
#include "drpo/util/files.hpp"

#include <algorithm>

namespace drpo::opt {
namespace {

std::string numbered(const std::vector<std::string>& items)
{
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) {
      out += "\n\n";
    }
    out += "System prompt " + std::to_string(i + 1) + ":\n" + items[i];
  }
  return out;
}

} // namespace

search::SearchConfig default_prompt_search()
{
  return {search::Strategy::beam, 2, 3, 20, 120};
}

std::string render_prompt_transition(const TemplateSet& templates, const std::string& current_prompt,
                                     const std::string& query, const std::string& output,
                                     const reward::RewardReport& evaluation,
                                     const std::vector<std::string>& history)
{
  return templates.render(TemplateKind::prompt_transition,
                          {{"CURRENT_SYSTEM_PROMPT", current_prompt},
                           {"QUERY", query},
                           {"OUTPUT", output},
                           {"OUTPUT_EVALUATION", evaluation.feedback_text()},
                           {"FORMER_SYSTEM_PROMPTS", numbered(history)}});
}

PromptTransition transition_prompt(const OptimizerContext& context,
                                   const std::string& current_prompt, const std::string& query,
                                   const std::string& output,
                                   const reward::RewardReport& evaluation,
                                   const std::vector<std::string>& history, int sample)
{
  llm::CompletionRequest request;
  request.role = llm::Role::optimizer;
  request.stage = llm::Stage::transition;
  request.messages = {{llm::Speaker::user,
                       render_prompt_transition(context.templates, current_prompt, query, output,
                                                evaluation, history)}};
  request.meta = {{"kind", "prompt"},
                  {"current", current_prompt},
                  {"sample", sample},
                  {"depth", static_cast<int>(history.size())}};
  try {
    const auto reply = context.gateway.complete_json(request, [](const nlohmann::json& value) {
      if (llm::text_field(value, "new_system_prompt").empty()) {
        throw SchemaError("reply has no \"new_system_prompt\" text");
      }
    });
    return {llm::text_field(reply, "new_system_prompt"), llm::text_field(reply, "analysis"),
            llm::text_field(reply, "thought")};
  } catch (const ExtractionError& e) {
    throw TransitionError(std::string("system prompt rewrite failed: ") + e.what());
  } catch (const SchemaError& e) {
    throw TransitionError(std::string("system prompt rewrite failed: ") + e.what());
  }
}

PromptSearchProblem::PromptSearchProblem(const OptimizerContext& context, const SeedDataset& seeds,
                                         const std::vector<ICLExample>& icl,
                                         const PromptSearchSettings& settings)
    : context_(context), seeds_(seeds), icl_(icl), settings_(settings)
{
}

const std::string& PromptSearchProblem::query_for_depth(int depth) const
{
  const auto index = static_cast<std::size_t>(std::max(depth - 1, 0));
  if (index >= seeds_.size()) {
    throw ConfigError("seed dataset has no query for depth " + std::to_string(depth));
  }
  return seeds_.queries[index].query;
}

search::Evaluation PromptSearchProblem::score(const std::string& prompt, int depth) const
{
  const auto& query = query_for_depth(depth);
  const auto examples = context_.retriever.retrieve_examples(query, icl_, settings_.k);

  llm::CompletionRequest request;
  request.role = llm::Role::base;
  request.stage = depth == 0 ? llm::Stage::root_generation : llm::Stage::generation;
  request.messages = assemble_messages(prompt, examples, query);
  request.temperature = 0.0;
  request.meta = {{"query", query}};
  const auto output = context_.gateway.complete(request);

  const auto selection = context_.rewarder.select_rewards(query);
  const auto report = context_.rewarder.evaluate_response(
      query, output, selection, depth == 0 ? llm::Stage::root_evaluation : llm::Stage::evaluation);
  return {report.aggregate,
          report.feedback_text(),
          {{"query_index", std::max(depth - 1, 0)},
           {"query", query},
           {"output", output},
           {"selection", reward::to_json(selection)},
           {"report", reward::to_json(report)}}};
}

std::string PromptSearchProblem::expand(const search::ExpandContext& ctx) const
{
  std::vector<std::string> history;
  for (const auto* node : ctx.lineage) {
    history.push_back(node->state);
  }
  const auto& detail = ctx.parent.detail;
  const auto report = reward::report_from_json(detail.at("report"));
  return transition_prompt(context_, ctx.parent.state, detail.at("query").get<std::string>(),
                           detail.at("output").get<std::string>(), report, history, ctx.sample)
      .new_system_prompt;
}

PromptOutcome optimize_system_prompt(const OptimizerContext& context, const SeedDataset& seeds,
                                     const std::vector<ICLExample>& icl,
                                     const PromptSearchSettings& settings,
                                     const llm::BackendProfile& target)
{
  search::validate(settings.search);
  const int depth = settings.search.strategy == search::Strategy::monte_carlo ? 1 : settings.search.depth;
  if (static_cast<std::size_t>(depth) > seeds.size()) {
    throw ConfigError("depth " + std::to_string(depth) + " exceeds the " +
                      std::to_string(seeds.size()) + " seed queries");
  }
  if (settings.k < 0 || static_cast<std::size_t>(settings.k) > icl.size()) {
    throw ConfigError("K=" + std::to_string(settings.k) + " exceeds the " +
                      std::to_string(icl.size()) + " ICL examples");
  }
  if (settings.root_prompt.empty()) {
    throw ConfigError("root system prompt is empty");
  }

  const PromptSearchProblem problem(context, seeds, icl, settings);
  search::SearchOptions options;
  options.workers = context.workers;
  options.warnings = &context.gateway.warnings();
  options.label = "system-prompt";

  PromptOutcome outcome;
  outcome.search = search::run_search(
      settings.root_prompt,
      [&](const search::ExpandContext& ctx) { return problem.expand(ctx); },
      [&](const std::string& state, int d) { return problem.score(state, d); }, settings.search,
      options);

  for (const auto& [d, members] : outcome.search.trace.beams()) {
    if (d == 0 || members.empty()) {
      continue;
    }
    const auto& top = outcome.search.trace.node(members.front());
    outcome.trajectory.push_back({d, problem.query_for_depth(d), top.reward.value_or(0.0), members});
  }

  auto& artifact = outcome.artifact;
  artifact.system_prompt = outcome.search.best_state;
  artifact.icl_examples = icl;
  artifact.k = settings.k;
  artifact.target_model = target.model_id;
  artifact.created_at = util::utc_now();
  artifact.trace_ids = {"system-prompt"};
  for (const auto& e : icl) {
    if (!e.trace_id.empty()) {
      artifact.trace_ids.push_back(e.trace_id);
    }
  }
  artifact.validate();
  return outcome;
}

} // namespace drpo::opt
