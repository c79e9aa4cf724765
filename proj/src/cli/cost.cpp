#include "drpo/cli/cost.hpp"

namespace drpo::cli {

std::uint64_t CostEstimate::formula_total() const
{
  return prompt_sampling + reward_selection + response_generation + evaluation;
}

std::uint64_t CostEstimate::total() const
{
  return formula_total() + root_generation + root_evaluation;
}

std::uint64_t CostEstimate::optimizer_calls() const
{
  return prompt_sampling;
}

std::uint64_t CostEstimate::evaluator_calls() const
{
  return reward_selection + evaluation + root_evaluation;
}

std::uint64_t CostEstimate::base_calls() const
{
  return response_generation + root_generation;
}

CostEstimate& CostEstimate::operator+=(const CostEstimate& other)
{
  prompt_sampling += other.prompt_sampling;
  reward_selection += other.reward_selection;
  response_generation += other.response_generation;
  evaluation += other.evaluation;
  root_generation += other.root_generation;
  root_evaluation += other.root_evaluation;
  return *this;
}

nlohmann::json CostEstimate::to_json() const
{
  return {{"prompt_sampling", prompt_sampling},
          {"reward_selection", reward_selection},
          {"response_generation", response_generation},
          {"evaluation", evaluation},
          {"formula_total", formula_total()},
          {"root_generation", root_generation},
          {"root_evaluation", root_evaluation},
          {"total", total()},
          {"by_role", {{"optimizer", optimizer_calls()},
                       {"evaluator", evaluator_calls()},
                       {"base", base_calls()}}}};
}

CostEstimate estimate_prompt_cost(const search::SearchConfig& config, reward::Mode mode)
{
  CostEstimate c;
  const bool mc = config.strategy == search::Strategy::monte_carlo;
  const std::uint64_t depth = mc ? 1 : static_cast<std::uint64_t>(config.depth);
  if (depth == 0) {
    return c;
  }
  const std::uint64_t children = config.expected_expansions();
  c.prompt_sampling = children;
  c.reward_selection = mode == reward::Mode::dynamic ? depth : 0;
  c.response_generation = children;
  c.evaluation = children;
  c.root_generation = 1;
  c.root_evaluation = 1;
  return c;
}

CostEstimate estimate_icl_cost(const search::SearchConfig& config, std::uint64_t examples,
                               reward::Mode mode)
{
  CostEstimate c;
  const bool mc = config.strategy == search::Strategy::monte_carlo;
  if (!mc && config.depth == 0) {
    return c;
  }
  const std::uint64_t children = config.expected_expansions();
  c.prompt_sampling = examples * children;
  c.reward_selection = mode == reward::Mode::dynamic ? examples : 0;
  c.evaluation = examples * children;
  c.root_evaluation = examples;
  return c;
}

CostEstimate cost_from_ledger(const llm::LedgerSnapshot& ledger)
{
  CostEstimate c;
  c.prompt_sampling = ledger.by_stage(llm::Stage::transition).calls();
  c.reward_selection = ledger.by_stage(llm::Stage::reward_selection).calls();
  c.response_generation = ledger.by_stage(llm::Stage::generation).calls();
  c.evaluation = ledger.by_stage(llm::Stage::evaluation).calls();
  c.root_generation = ledger.by_stage(llm::Stage::root_generation).calls();
  c.root_evaluation = ledger.by_stage(llm::Stage::root_evaluation).calls();
  return c;
}

} // namespace drpo::cli
