#pragma once

#include "drpo/events.hpp"
#include "drpo/search/trace.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace drpo::search {

enum class Strategy { beam, greedy, monte_carlo };

std::string_view to_string(Strategy strategy);
Strategy strategy_from_string(std::string_view text);  // beam | greedy | mc | monte_carlo

struct SearchConfig {
  Strategy strategy = Strategy::beam;
  int width = 1;        // W, beam width
  int samples = 1;      // M, action samples per kept state
  int depth = 1;        // D, number of expansion rounds
  int mc_budget = 120;  // one-step children sampled by monte_carlo

  // Beam width actually used: 1 for greedy, `width` otherwise.
  int effective_width() const { return strategy == Strategy::greedy ? 1 : width; }
  // Number of expand calls a failure-free run issues.
  std::size_t expected_expansions() const;
};

// Throws ConfigError for non-positive W/M/mc_budget or negative D.
void validate(const SearchConfig& config);

nlohmann::json to_json(const SearchConfig& config);
SearchConfig search_config_from_json(const nlohmann::json& value, SearchConfig defaults = {});

// Outcome of scoring one state.
struct Evaluation {
  double reward = 0.0;
  std::string feedback;       // handed to expand() of this node's children
  nlohmann::json detail;      // persisted with the node (selection, report...)
};

struct ExpandContext {
  const SearchNode& parent;
  std::vector<const SearchNode*> lineage;  // root .. parent, inclusive
  int depth;                               // depth of the child being created
  int sample;                              // sample index within the parent
};

// Both callbacks may throw; the affected node is dropped with a warning.
// They are called concurrently when SearchOptions::workers > 1.
using ExpandFn = std::function<std::string(const ExpandContext&)>;
using ScoreFn = std::function<Evaluation(const std::string& state, int depth)>;

struct SearchOptions {
  int workers = 1;
  WarningLog* warnings = nullptr;  // node warnings are also copied here
  std::string label;               // stored in the trace header
};

struct SearchResult {
  std::string best_state;
  std::optional<double> best_reward;  // empty when the root was returned unscored
  int best_id = 0;
  SearchTrace trace;
  std::size_t expand_calls = 0;
  std::size_t score_calls = 0;
};

// Beam search. The root is scored first and then fills every slot of the
// initial beam, so depth 1 draws W*M children from it. At each depth every
// beam member is expanded M times, every child is scored on creation, and
// the W best children (reward desc, creation order asc) form the next beam.
// Returns the top of the final beam. A depth that yields no scored child
// ends the search early and keeps the previous beam. D = 0 returns the root
// without any call.
SearchResult beam_search(const std::string& root, const ExpandFn& expand, const ScoreFn& score,
                         SearchConfig config, const SearchOptions& options = {});

// beam_search with W forced to 1.
SearchResult greedy_search(const std::string& root, const ExpandFn& expand, const ScoreFn& score,
                           SearchConfig config, const SearchOptions& options = {});

// Scores the root, samples mc_budget children of it (all at depth 1, using
// the root's feedback) and returns the best child; the root only when every
// child failed.
SearchResult monte_carlo_search(const std::string& root, const ExpandFn& expand,
                                const ScoreFn& score, SearchConfig config,
                                const SearchOptions& options = {});

// Dispatches on config.strategy.
SearchResult run_search(const std::string& root, const ExpandFn& expand, const ScoreFn& score,
                        const SearchConfig& config, const SearchOptions& options = {});

// Recomputes the per-depth beams of a trace from its recorded rewards.
std::map<int, std::vector<int>> replay_beams(const SearchTrace& trace);

} // namespace drpo::search
