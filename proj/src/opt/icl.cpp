#include "drpo/opt/icl.hpp"

#include "drpo/errors.hpp"
#include "drpo/llm/json_extract.hpp"

#include <atomic>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <thread>

namespace drpo::opt {
namespace {

std::string numbered(const std::vector<std::string>& items, std::string_view label)
{
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) {
      out += "\n\n";
    }
    out += std::string(label) + " " + std::to_string(i + 1) + ":\n" + items[i];
  }
  return out;
}

} // namespace

search::SearchConfig default_icl_search()
{
  return {search::Strategy::beam, 1, 1, 5, 120};
}

std::string render_icl_transition(const TemplateSet& templates, const std::string& query,
                                  const std::string& current_response,
                                  const reward::RewardReport& feedback,
                                  const std::vector<std::string>& history)
{
  return templates.render(TemplateKind::icl_transition,
                          {{"QUERY", query},
                           {"CURRENT_RESPONSE", current_response},
                           {"RESPONSE_EVALUATION", feedback.feedback_text()},
                           {"FORMER_RESPONSES", numbered(history, "Response")}});
}

std::string transition_icl(const OptimizerContext& context, const std::string& query,
                           const std::string& current_response,
                           const reward::RewardReport& feedback,
                           const std::vector<std::string>& history, int sample)
{
  if (feedback.entries.empty()) {
    throw std::invalid_argument("transition_icl needs a nonempty evaluation");
  }
  llm::CompletionRequest request;
  request.role = llm::Role::optimizer;
  request.stage = llm::Stage::transition;
  request.messages = {{llm::Speaker::user, render_icl_transition(context.templates, query,
                                                                 current_response, feedback, history)}};
  request.meta = {{"kind", "icl"}, {"current", current_response}, {"sample", sample}};
  try {
    const auto reply = context.gateway.complete_json(request, [](const nlohmann::json& value) {
      if (llm::text_field(value, "new_response").empty()) {
        throw SchemaError("reply has no \"new_response\" text");
      }
    });
    return llm::text_field(reply, "new_response");
  } catch (const ExtractionError& e) {
    throw TransitionError(std::string("response rewrite failed: ") + e.what());
  } catch (const SchemaError& e) {
    throw TransitionError(std::string("response rewrite failed: ") + e.what());
  }
}

IclOutcome optimize_icl_example(const OptimizerContext& context, const ICLExample& example,
                                const search::SearchConfig& config, const std::string& trace_id)
{
  auto& rewarder = context.rewarder;
  const auto& query = example.query;

  const search::ScoreFn score = [&](const std::string& state, int depth) {
    const auto selection = rewarder.select_rewards(query);
    const auto report = rewarder.evaluate_response(
        query, state, selection, depth == 0 ? llm::Stage::root_evaluation : llm::Stage::evaluation);
    return search::Evaluation{report.aggregate, report.feedback_text(),
                              {{"selection", reward::to_json(selection)},
                               {"report", reward::to_json(report)}}};
  };
  const search::ExpandFn expand = [&](const search::ExpandContext& ctx) {
    std::vector<std::string> history;
    for (const auto* node : ctx.lineage) {
      history.push_back(node->state);
    }
    const auto report = reward::report_from_json(ctx.parent.detail.at("report"));
    return transition_icl(context, query, ctx.parent.state, report, history, ctx.sample);
  };

  IclOutcome outcome{example, {}};
  search::SearchOptions options;
  options.workers = 1;
  options.warnings = &context.gateway.warnings();
  options.label = trace_id;
  try {
    outcome.search = search::run_search(example.response, expand, score, config, options);
  } catch (const TransportError&) {
    throw;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    outcome.example.failure = e.what();
    return outcome;
  }
  outcome.search.trace.set_header([&] {
    auto header = outcome.search.trace.header();
    header["query"] = query;
    return header;
  }());
  if (config.depth == 0) {
    return outcome;
  }
  if (outcome.search.best_id == 0) {
    outcome.example.failure = outcome.search.best_reward ? "no revision was scored"
                                                         : "the base response could not be scored";
    return outcome;
  }
  outcome.example.response = outcome.search.best_state;
  outcome.example.optimized = true;
  outcome.example.trace_id = trace_id;
  outcome.example.failure.clear();
  return outcome;
}

std::vector<IclOutcome> optimize_icl_set(const OptimizerContext& context,
                                         const std::vector<ICLExample>& base,
                                         const search::SearchConfig& config)
{
  if (base.empty()) {
    throw std::invalid_argument("optimize_icl_set needs at least one example");
  }
  std::vector<std::optional<IclOutcome>> slots(base.size());
  std::vector<std::exception_ptr> errors(base.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < base.size(); i = next++) {
      char id[32];
      std::snprintf(id, sizeof id, "icl-%02zu", i);
      try {
        slots[i] = optimize_icl_example(context, base[i], config, id);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const auto threads = std::min<std::size_t>(std::max(1, context.workers), base.size());
    for (std::size_t t = 1; t < threads; ++t) {
      pool.emplace_back(work);
    }
    work();
  }
  for (const auto& error : errors) {
    if (error) {
      std::rethrow_exception(error);
    }
  }
  std::vector<IclOutcome> out;
  for (auto& slot : slots) {
    out.push_back(std::move(*slot));
  }
  return out;
}

} // namespace drpo::opt
