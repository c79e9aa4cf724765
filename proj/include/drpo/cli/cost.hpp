#pragma once

#include "drpo/llm/ledger.hpp"
#include "drpo/reward/rewarding.hpp"
#include "drpo/search/search.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>

namespace drpo::cli {

// Model calls of one optimization stage, split the way the closed-form cost
// expressions count them, plus the two root-scoring calls those expressions
// leave out.
struct CostEstimate {
  std::uint64_t prompt_sampling = 0;      // optimizer transitions
  std::uint64_t reward_selection = 0;     // evaluator aspect selections
  std::uint64_t response_generation = 0;  // base-model generations
  std::uint64_t evaluation = 0;           // evaluator scorings
  std::uint64_t root_generation = 0;
  std::uint64_t root_evaluation = 0;

  std::uint64_t formula_total() const;  // the four terms above
  std::uint64_t total() const;          // formula_total() + root terms
  std::uint64_t optimizer_calls() const;
  std::uint64_t evaluator_calls() const;
  std::uint64_t base_calls() const;

  CostEstimate& operator+=(const CostEstimate& other);
  friend bool operator==(const CostEstimate&, const CostEstimate&) = default;

  nlohmann::json to_json() const;
};

// System-prompt search: W*M*D samplings, D selections, W*M*D generations and
// evaluations, plus one root generation and evaluation. Monte Carlo counts
// mc_budget children on a single query. D = 0 costs nothing.
CostEstimate estimate_prompt_cost(const search::SearchConfig& config, reward::Mode mode);

// ICL optimization of `examples` examples: per example one selection, W*M*D
// samplings and evaluations and one root evaluation.
CostEstimate estimate_icl_cost(const search::SearchConfig& config, std::uint64_t examples,
                               reward::Mode mode);

// Counts every gateway invocation of the ledger, cache hits included.
CostEstimate cost_from_ledger(const llm::LedgerSnapshot& ledger);

} // namespace drpo::cli
