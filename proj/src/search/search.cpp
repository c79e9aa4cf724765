#include "drpo/search/search.hpp"

#include "drpo/errors.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

namespace drpo::search {
namespace {

// Errors that mean the whole run cannot proceed, as opposed to one bad node.
bool is_fatal(const std::exception_ptr& error)
{
  try {
    std::rethrow_exception(error);
  } catch (const TransportError&) {
    return true;
  } catch (const ConfigError&) {
    return true;
  } catch (...) {
    return false;
  }
}

std::string describe(const std::exception_ptr& error)
{
  try {
    std::rethrow_exception(error);
  } catch (const std::exception& e) {
    return e.what();
  } catch (...) {
    return "unknown error";
  }
}

// Runs job(i) for i in [0, count) on up to `workers` threads. Returns the
// first fatal error, if any, after all jobs have finished.
template <typename Job>
void run_jobs(std::size_t count, int workers, Job job)
{
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      job(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < std::min(threads, count); ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        job(i);
      }
    });
  }
}

struct Job {
  int parent = 0;
  int sample = 0;
};

struct JobResult {
  bool expanded = false;
  std::string state;
  std::optional<Evaluation> evaluation;
  std::exception_ptr expand_error;
  std::exception_ptr score_error;
};

class Driver {
public:
  Driver(const ExpandFn& expand, const ScoreFn& score, const SearchConfig& config,
         const SearchOptions& options)
      : expand_(expand), score_(score), config_(config), options_(options)
  {
    result_.trace.set_header({{"label", options.label},
                              {"strategy", to_string(config.strategy)},
                              {"width", config.strategy == Strategy::monte_carlo ? 1 : config.effective_width()},
                              {"samples", config.samples},
                              {"depth", config.depth},
                              {"mc_budget", config.mc_budget}});
  }

  // Adds the root; scores it when `scored`. Returns false when scoring failed.
  bool add_root(const std::string& root, bool scored)
  {
    SearchNode node;
    node.id = next_id_++;
    node.state = root;
    bool ok = true;
    if (scored) {
      ++result_.score_calls;
      try {
        apply(node, score_(root, 0));
      } catch (...) {
        const auto error = std::current_exception();
        if (is_fatal(error)) {
          throw;
        }
        node.dropped = true;
        ok = false;
        result_.trace.add_node(node);
        warn("root scoring failed: " + describe(error));
        return false;
      }
    }
    result_.trace.add_node(std::move(node));
    return ok;
  }

  // Expands every job at `depth` and returns the ids of scored children in
  // creation order.
  std::vector<int> grow(const std::vector<Job>& jobs, int depth)
  {
    std::vector<JobResult> results(jobs.size());
    run_jobs(jobs.size(), options_.workers, [&](std::size_t i) {
      auto& out = results[i];
      const auto& parent = result_.trace.node(jobs[i].parent);
      try {
        out.state = expand_(ExpandContext{parent, lineage(parent), depth, jobs[i].sample});
        out.expanded = true;
      } catch (...) {
        out.expand_error = std::current_exception();
        return;
      }
      try {
        out.evaluation = score_(out.state, depth);
      } catch (...) {
        out.score_error = std::current_exception();
      }
    });

    for (const auto& r : results) {
      for (const auto& e : {r.expand_error, r.score_error}) {
        if (e && is_fatal(e)) {
          std::rethrow_exception(e);
        }
      }
    }

    std::vector<int> scored;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      auto& r = results[i];
      ++result_.expand_calls;
      if (!r.expanded) {
        warn("expansion of node " + std::to_string(jobs[i].parent) + " (sample " +
             std::to_string(jobs[i].sample) + ") failed: " + describe(r.expand_error));
        continue;
      }
      ++result_.score_calls;
      SearchNode node;
      node.id = next_id_++;
      node.state = std::move(r.state);
      node.depth = depth;
      node.parent = jobs[i].parent;
      node.sample = jobs[i].sample;
      if (r.evaluation) {
        apply(node, std::move(*r.evaluation));
        scored.push_back(node.id);
      } else {
        node.dropped = true;
      }
      const int id = node.id;
      result_.trace.add_node(std::move(node));
      if (r.score_error) {
        warn("scoring of node " + std::to_string(id) + " failed: " + describe(r.score_error));
      }
    }
    return scored;
  }

  // The `width` best of `ids` by (reward desc, id asc).
  std::vector<int> top(std::vector<int> ids, int width) const
  {
    std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
      const double ra = *result_.trace.node(a).reward;
      const double rb = *result_.trace.node(b).reward;
      return ra != rb ? ra > rb : a < b;
    });
    if (ids.size() > static_cast<std::size_t>(width)) {
      ids.resize(static_cast<std::size_t>(width));
    }
    return ids;
  }

  SearchResult finish(int best)
  {
    result_.trace.set_best(best);
    const auto& node = result_.trace.node(best);
    result_.best_id = best;
    result_.best_state = node.state;
    result_.best_reward = node.reward;
    return std::move(result_);
  }

  SearchTrace& trace() { return result_.trace; }

private:
  std::vector<const SearchNode*> lineage(const SearchNode& leaf) const
  {
    std::vector<const SearchNode*> chain;
    for (const SearchNode* n = &leaf;; n = &result_.trace.node(*n->parent)) {
      chain.push_back(n);
      if (!n->parent) {
        break;
      }
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
  }

  static void apply(SearchNode& node, Evaluation evaluation)
  {
    node.reward = evaluation.reward;
    node.feedback = std::move(evaluation.feedback);
    node.detail = evaluation.detail.is_null() ? nlohmann::json::object() : std::move(evaluation.detail);
  }

  void warn(const std::string& message)
  {
    result_.trace.warn(message);
    if (options_.warnings) {
      options_.warnings->warn("node", (options_.label.empty() ? "" : options_.label + ": ") + message);
    }
  }

  const ExpandFn& expand_;
  const ScoreFn& score_;
  SearchConfig config_;
  const SearchOptions& options_;
  SearchResult result_;
  int next_id_ = 0;
};

} // namespace

std::string_view to_string(Strategy strategy)
{
  switch (strategy) {
  case Strategy::beam:
    return "beam";
  case Strategy::greedy:
    return "greedy";
  case Strategy::monte_carlo:
    return "monte_carlo";
  }
  return "beam";
}

Strategy strategy_from_string(std::string_view text)
{
  if (text == "beam") {
    return Strategy::beam;
  }
  if (text == "greedy") {
    return Strategy::greedy;
  }
  if (text == "mc" || text == "monte_carlo") {
    return Strategy::monte_carlo;
  }
  throw ConfigError("unknown search strategy \"" + std::string(text) + "\"");
}

std::size_t SearchConfig::expected_expansions() const
{
  if (strategy == Strategy::monte_carlo) {
    return static_cast<std::size_t>(mc_budget);
  }
  return static_cast<std::size_t>(effective_width()) * static_cast<std::size_t>(samples) *
         static_cast<std::size_t>(depth);
}

void validate(const SearchConfig& config)
{
  if (config.width < 1) {
    throw ConfigError("beam width W must be at least 1");
  }
  if (config.samples < 1) {
    throw ConfigError("samples per state M must be at least 1");
  }
  if (config.depth < 0) {
    throw ConfigError("depth D must not be negative");
  }
  if (config.mc_budget < 1) {
    throw ConfigError("mc_budget must be at least 1");
  }
}

nlohmann::json to_json(const SearchConfig& config)
{
  return {{"strategy", to_string(config.strategy)},
          {"W", config.width},
          {"M", config.samples},
          {"D", config.depth},
          {"mc_budget", config.mc_budget}};
}

SearchConfig search_config_from_json(const nlohmann::json& value, SearchConfig defaults)
{
  if (!value.is_object()) {
    throw ConfigError("search config must be an object");
  }
  try {
    if (value.contains("strategy")) {
      defaults.strategy = strategy_from_string(value.at("strategy").get<std::string>());
    }
    defaults.width = value.value("W", defaults.width);
    defaults.samples = value.value("M", defaults.samples);
    defaults.depth = value.value("D", defaults.depth);
    defaults.mc_budget = value.value("mc_budget", defaults.mc_budget);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad search config: ") + e.what());
  }
  validate(defaults);
  return defaults;
}

SearchResult beam_search(const std::string& root, const ExpandFn& expand, const ScoreFn& score,
                         SearchConfig config, const SearchOptions& options)
{
  validate(config);
  const int width = config.effective_width();
  Driver driver(expand, score, config, options);
  if (config.depth == 0) {
    driver.add_root(root, false);
    driver.trace().set_beam(0, {0});
    return driver.finish(0);
  }
  if (!driver.add_root(root, true)) {
    return driver.finish(0);
  }
  driver.trace().set_beam(0, {0});

  std::vector<int> beam{0};
  for (int depth = 1; depth <= config.depth; ++depth) {
    std::vector<Job> jobs;
    if (depth == 1) {
      for (int s = 0; s < width * config.samples; ++s) {
        jobs.push_back({0, s});
      }
    } else {
      for (const int member : beam) {
        for (int s = 0; s < config.samples; ++s) {
          jobs.push_back({member, s});
        }
      }
    }
    auto children = driver.grow(jobs, depth);
    if (children.empty()) {
      driver.trace().warn("depth " + std::to_string(depth) + " produced no scored child, stopping");
      break;
    }
    beam = driver.top(std::move(children), width);
    driver.trace().set_beam(depth, beam);
  }
  return driver.finish(beam.front());
}

SearchResult greedy_search(const std::string& root, const ExpandFn& expand, const ScoreFn& score,
                           SearchConfig config, const SearchOptions& options)
{
  config.strategy = Strategy::greedy;
  config.width = 1;
  return beam_search(root, expand, score, config, options);
}

SearchResult monte_carlo_search(const std::string& root, const ExpandFn& expand,
                                const ScoreFn& score, SearchConfig config,
                                const SearchOptions& options)
{
  validate(config);
  config.strategy = Strategy::monte_carlo;
  Driver driver(expand, score, config, options);
  if (!driver.add_root(root, true)) {
    return driver.finish(0);
  }
  driver.trace().set_beam(0, {0});
  std::vector<Job> jobs;
  for (int s = 0; s < config.mc_budget; ++s) {
    jobs.push_back({0, s});
  }
  auto children = driver.grow(jobs, 1);
  if (children.empty()) {
    driver.trace().warn("no sampled child was scored, returning the root");
    return driver.finish(0);
  }
  const auto best = driver.top(std::move(children), 1);
  driver.trace().set_beam(1, best);
  return driver.finish(best.front());
}

SearchResult run_search(const std::string& root, const ExpandFn& expand, const ScoreFn& score,
                        const SearchConfig& config, const SearchOptions& options)
{
  switch (config.strategy) {
  case Strategy::beam:
    return beam_search(root, expand, score, config, options);
  case Strategy::greedy:
    return greedy_search(root, expand, score, config, options);
  case Strategy::monte_carlo:
    return monte_carlo_search(root, expand, score, config, options);
  }
  throw ConfigError("unknown search strategy");
}

std::map<int, std::vector<int>> replay_beams(const SearchTrace& trace)
{
  std::map<int, std::vector<int>> beams;
  const auto& nodes = trace.nodes();
  const auto root = std::find_if(nodes.begin(), nodes.end(), [](const auto& n) { return !n.parent; });
  if (root == nodes.end() || (root->dropped && trace.header().value("depth", 0) != 0)) {
    return beams;
  }
  beams[0] = {root->id};
  const int width = std::max(1, trace.beam_width());
  for (int depth = 1;; ++depth) {
    std::vector<const SearchNode*> scored;
    for (const auto& n : nodes) {
      if (n.depth == depth && !n.dropped && n.reward) {
        scored.push_back(&n);
      }
    }
    if (scored.empty()) {
      break;
    }
    std::stable_sort(scored.begin(), scored.end(), [](const SearchNode* a, const SearchNode* b) {
      return *a->reward != *b->reward ? *a->reward > *b->reward : a->id < b->id;
    });
    auto& members = beams[depth];
    for (std::size_t i = 0; i < scored.size() && i < static_cast<std::size_t>(width); ++i) {
      members.push_back(scored[i]->id);
    }
  }
  return beams;
}

} // namespace drpo::search
