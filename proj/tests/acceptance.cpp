#include "support.hpp"
#include "synthetic_tree.hpp"

#include "drpo/cli/commands.hpp"
#include "drpo/cli/config.hpp"
#include "drpo/cli/cost.hpp"
#include "drpo/errors.hpp"
#include "drpo/llm/json_extract.hpp"
#include "drpo/opt/icl.hpp"
#include "drpo/opt/inference.hpp"
#include "drpo/opt/system_prompt.hpp"
#include "drpo/reward/criteria.hpp"
#include "drpo/util/files.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <regex>
#include <sstream>

using namespace drpo;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool condition, const std::string& what)
  {
    if (!condition) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double value)
{
  std::ostringstream out;
  out << value;
  return out.str();
}

cli::RunConfig run_config(const fs::path& runs)
{
  cli::RunConfig config;
  config.paths.seed_queries = drpo::testing::data_dir() / "seed_queries.jsonl";
  config.paths.base_icl = drpo::testing::data_dir() / "base_icl.jsonl";
  config.paths.runs_dir = runs;
  return config;
}

// Formula stages of an estimate JSON against the ledger.
void compare_stages(Outcome& o, const std::string& label, const nlohmann::json& estimate,
                    const cli::CostEstimate& actual)
{
  const std::map<std::string, std::uint64_t> seen{{"prompt_sampling", actual.prompt_sampling},
                                                  {"reward_selection", actual.reward_selection},
                                                  {"response_generation", actual.response_generation},
                                                  {"evaluation", actual.evaluation},
                                                  {"root_generation", actual.root_generation},
                                                  {"root_evaluation", actual.root_evaluation}};
  for (const auto& [key, count] : seen) {
    o.require(estimate.at(key).get<std::uint64_t>() == count,
              label + " " + key + " estimate " + estimate.at(key).dump() + " vs ledger " + std::to_string(count));
  }
}

Outcome cost_conformance()
{
  Outcome o;
  const auto start = Clock::now();
  const auto runs = drpo::testing::scratch_dir("accept-cost");
  const auto config = run_config(runs);
  std::ostringstream out, err;
  const cli::CommandEnv env{config, out, err, nullptr};

  const auto prompt = cli::cmd_optimize_prompt(env);
  const auto p = cli::cost_from_ledger(prompt.ledger);
  o.require(p.prompt_sampling == 120, "sampling " + std::to_string(p.prompt_sampling));
  o.require(p.reward_selection == 20, "selection " + std::to_string(p.reward_selection));
  o.require(p.response_generation == 120, "generation " + std::to_string(p.response_generation));
  o.require(p.evaluation == 120, "evaluation " + std::to_string(p.evaluation));
  o.require(p.formula_total() == 380, "formula total " + std::to_string(p.formula_total()));

  drpo::testing::MockRig rig;
  const auto base = opt::load_icl_jsonl(config.paths.base_icl);
  opt::optimize_icl_example(rig.context, base.front(), opt::default_icl_search(), "icl-00");
  const auto i = cli::cost_from_ledger(rig.gateway.call_ledger());
  o.require(i.formula_total() == 11, "icl formula total " + std::to_string(i.formula_total()));

  const auto estimate = cli::cmd_estimate_cost(env, cli::CostStage::both, 1);
  compare_stages(o, "prompt", estimate.at("prompt"), p);
  compare_stages(o, "icl", estimate.at("icl"), i);

  const double elapsed = seconds_since(start);
  o.require(elapsed < 10.0, "runtime " + num(elapsed) + " s");
  if (o.pass) {
    o.detail = "prompt 120/20/120/120 = 380 (+1 root generation, +1 root evaluation = " +
               std::to_string(p.total()) + " gateway calls); icl 11 (+1 root evaluation); estimate matches; " +
               num(elapsed) + " s";
  }
  return o;
}

Outcome search_oracle()
{
  Outcome o;
  const auto start = Clock::now();
  std::mt19937 rng(20240611);
  std::size_t max_nodes = 0;
  for (int trial = 0; trial < 50; ++trial) {
    int w = 0, m = 0, d = 0;
    std::size_t nodes = 0;
    do {
      w = std::uniform_int_distribution<int>(1, 3)(rng);
      m = std::uniform_int_distribution<int>(1, 3)(rng);
      d = std::uniform_int_distribution<int>(1, 4)(rng);
      nodes = 1;
      std::size_t level = static_cast<std::size_t>(w * m);
      for (int k = 1; k <= d; ++k, level *= static_cast<std::size_t>(m)) {
        nodes += level;
      }
    } while (nodes > 200);
    const auto tree = drpo::testing::random_tree(rng, w * m, m, d);
    max_nodes = std::max(max_nodes, tree.score.size());
    const search::SearchConfig config{search::Strategy::beam, w, m, d, 1};
    const auto beam = search::beam_search("n0", tree.expander(), tree.scorer(), config);
    const int want = drpo::testing::frontier_oracle(tree, w, m, d);
    o.require(drpo::testing::Tree::id(beam.best_state) == want,
              "graph " + std::to_string(trial) + " beam picked " + beam.best_state + ", oracle n" + std::to_string(want));
    const auto greedy = search::greedy_search("n0", tree.expander(), tree.scorer(), config);
    const auto w1 = search::beam_search("n0", tree.expander(), tree.scorer(), {search::Strategy::beam, 1, m, d, 1});
    o.require(greedy.best_state == w1.best_state, "graph " + std::to_string(trial) + " greedy differs from W=1");

    const auto flat = drpo::testing::random_tree(rng, w * m * 4, 1, 1);
    const auto& kids = flat.children[0];
    const int argmax = *std::max_element(kids.begin(), kids.end(),
                                         [&](int a, int b) { return flat.score[a] < flat.score[b]; });
    const auto mc = search::monte_carlo_search("n0", flat.expander(), flat.scorer(),
                                               {search::Strategy::monte_carlo, 1, 1, 1, static_cast<int>(kids.size())});
    o.require(drpo::testing::Tree::id(mc.best_state) == argmax, "graph " + std::to_string(trial) + " mc missed argmax");
  }
  const double elapsed = seconds_since(start);
  o.require(elapsed < 30.0, "runtime " + num(elapsed) + " s");
  if (o.pass) {
    o.detail = "50 graphs (max " + std::to_string(max_nodes) + " nodes); beam = frontier oracle, greedy = W=1, mc = argmax; " +
               num(elapsed) + " s";
  }
  return o;
}

Outcome cost_parity()
{
  Outcome o;
  const auto seeds = opt::load_seed_jsonl(drpo::testing::data_dir() / "seed_queries.jsonl");
  const auto icl = opt::load_icl_jsonl(drpo::testing::data_dir() / "base_icl.jsonl");
  std::map<std::string, std::pair<std::size_t, std::uint64_t>> counts;
  for (const auto& config : {search::SearchConfig{search::Strategy::monte_carlo, 1, 1, 1, 120},
                             search::SearchConfig{search::Strategy::beam, 2, 3, 20, 120}}) {
    drpo::testing::MockRig rig;
    opt::PromptSearchSettings settings;
    settings.search = config;
    const auto outcome = opt::optimize_system_prompt(rig.context, seeds, icl, settings, {});
    counts[std::string(search::to_string(config.strategy))] = {
        outcome.search.expand_calls, rig.gateway.call_ledger().by_stage(llm::Stage::transition).calls()};
  }
  const auto mc = counts.at("monte_carlo");
  const auto beam = counts.at("beam");
  o.require(mc.first == beam.first, "expand counts " + std::to_string(mc.first) + " vs " + std::to_string(beam.first));
  o.require(mc.second == beam.second, "transition calls " + std::to_string(mc.second) + " vs " + std::to_string(beam.second));
  o.require(beam.first == 120, "beam expand count " + std::to_string(beam.first));
  if (o.pass) {
    o.detail = "monte_carlo(120) and beam(2,3,20) both expand " + std::to_string(beam.first) + " times";
  }
  return o;
}

Outcome reward_aggregation()
{
  Outcome o;
  std::mt19937 rng(1000);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 12)(rng);
    std::vector<reward::CriterionScore> scores;
    long sum = 0;
    for (int k = 0; k < n; ++k) {
      const int s = std::uniform_int_distribution<int>(1, 5)(rng);
      sum += s;
      scores.push_back({"aspect" + std::to_string(k), s, ""});
    }
    const double expected = static_cast<double>(sum) / n;
    const double got = reward::mean_score(scores);
    worst = std::max(worst, std::abs(got - expected));
    std::shuffle(scores.begin(), scores.end(), rng);
    o.require(reward::mean_score(scores) == got, "permutation changed aggregate on vector " + std::to_string(trial));
  }
  o.require(worst <= 1e-9, "mean error " + num(worst));

  // Dynamic selection through the mock evaluator, which proposes 2 to 5
  // aspects, plus scripted replies proposing 1 to 9.
  const auto seeds = opt::load_seed_jsonl(drpo::testing::data_dir() / "seed_queries.jsonl");
  std::size_t checked = 0;
  {
    drpo::testing::MockRig rig;
    for (const auto& q : seeds.queries) {
      const auto sel = rig.rewarder.select_rewards(q.query);
      o.require(sel.selected.size() >= 2 && sel.selected.size() <= 5,
                "selection of size " + std::to_string(sel.selected.size()));
      ++checked;
    }
  }
  const auto& catalog = reward::catalog();
  std::size_t rejected = 0;
  for (std::size_t n = 0; n <= 9; ++n) {
    drpo::testing::MockRig rig;
    rig.mock->add_rule([&, n](const llm::MockCall& call) -> std::optional<std::string> {
      if (call.stage != llm::Stage::reward_selection) {
        return std::nullopt;
      }
      nlohmann::json names = nlohmann::json::array();
      for (std::size_t k = 0; k < n; ++k) {
        names.push_back(catalog[k].name);
      }
      return llm::render_fenced({{"query_analysis", nlohmann::json::object()},
                                 {"aspects_selection", {{"reasoning", "r"}, {"selected_aspects", names}}}});
    });
    try {
      const auto sel = rig.rewarder.select_rewards("scripted query");
      o.require(sel.selected.size() >= 2 && sel.selected.size() <= 5,
                "scripted " + std::to_string(n) + " gave size " + std::to_string(sel.selected.size()));
      ++checked;
    } catch (const RewardingError&) {
      o.require(n < 2, "scripted " + std::to_string(n) + " rejected");
      ++rejected;
    }
  }

  drpo::testing::MockRig fixed(reward::Mode::static_six);
  const std::vector<std::string> six{"Helpfulness", "Clarity", "Factuality", "Depth", "Engagement", "Safety"};
  for (const auto& q : seeds.queries) {
    o.require(fixed.rewarder.select_rewards(q.query).names() == six, "static selection differs");
  }
  o.require(fixed.gateway.call_ledger().total().calls() == 0, "static mode called the model");
  if (o.pass) {
    o.detail = "1000 vectors, max |mean error| " + num(worst) + ", permutation-invariant; " + std::to_string(checked) +
               " dynamic selections in [2,5] (" + std::to_string(rejected) + " undersized replies rejected); static = the six, 0 calls";
  }
  return o;
}

Outcome argmax_invariance()
{
  Outcome o;
  const auto seeds = opt::load_seed_jsonl(drpo::testing::data_dir() / "seed_queries.jsonl");
  const auto icl = opt::load_icl_jsonl(drpo::testing::data_dir() / "base_icl.jsonl");
  opt::PromptSearchSettings settings;
  settings.search = {search::Strategy::beam, 2, 3, 8, 1};
  std::optional<std::string> reference_best;
  std::optional<std::map<int, std::vector<int>>> reference_beams;
  const std::vector<double> factors{1.0, 0.001, 0.37, 2.0, 9.5, 1000.0};
  for (const double factor : factors) {
    drpo::testing::MockRig rig;
    const opt::PromptSearchProblem problem(rig.context, seeds, icl, settings);
    const auto result = search::beam_search(
        settings.root_prompt, [&](const search::ExpandContext& ctx) { return problem.expand(ctx); },
        [&](const std::string& state, int d) {
          auto e = problem.score(state, d);
          e.reward *= factor;
          return e;
        },
        settings.search);
    if (!reference_best) {
      reference_best = result.best_state;
      reference_beams = result.trace.beams();
      continue;
    }
    o.require(result.best_state == *reference_best, "best prompt changed at factor " + num(factor));
    o.require(result.trace.beams() == *reference_beams, "beam membership changed at factor " + num(factor));
  }
  if (o.pass) {
    o.detail = "P* and all " + std::to_string(reference_beams->size()) + " per-depth beams equal under factors 0.001..1000";
  }
  return o;
}

Outcome template_fidelity()
{
  Outcome o;
  const TemplateSet templates;
  drpo::testing::MockRig rig;
  const std::string query = "How do tides work?";
  const auto selection = rig.rewarder.select_rewards(query);
  reward::RewardReport report;
  for (const auto& c : selection.selected) {
    report.entries.push_back({c.name, 4, "fine"});
  }
  report.aggregate = 4.0;
  const std::vector<std::string> rendered{
      rig.rewarder.render_selection_prompt(query),
      rig.rewarder.render_rewarding_prompt(query, "The Moon pulls the oceans.", selection),
      opt::render_prompt_transition(templates, "You are a helpful assistant.", query, "The Moon pulls the oceans.",
                                    report, {"You are a helpful assistant."}),
      opt::render_icl_transition(templates, query, "The Moon pulls the oceans.", report,
                                 {"The Moon pulls the oceans."})};
  std::string all;
  for (const auto& text : rendered) {
    all += text + "\n";
  }
  for (const auto* anchor : {"act as an impartial judge", "at least 2 and at most 5 aspects",
                             "do NOT add more than 2 bullet points at once", "Do NOT make more than 8 bullet points"}) {
    o.require(all.find(anchor) != std::string::npos, std::string("missing anchor \"") + anchor + "\"");
  }
  const std::regex residual(R"(\[[A-Z][A-Z_]+\])");
  std::smatch match;
  if (std::regex_search(all, match, residual)) {
    o.require(false, "residual placeholder " + match.str());
  }
  if (o.pass) {
    o.detail = "4 anchors found verbatim in 4 rendered meta-prompts; no residual placeholders";
  }
  return o;
}

// Independent lexical model: lower-cased alphanumeric tokens, raw counts.
std::map<std::string, double> bag(const std::string& text)
{
  std::map<std::string, double> out;
  std::string token;
  for (const char c : text + " ") {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      token += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!token.empty()) {
      out[token] += 1.0;
      token.clear();
    }
  }
  return out;
}

double bag_cosine(const std::map<std::string, double>& a, const std::map<std::string, double>& b)
{
  double dot = 0, na = 0, nb = 0;
  for (const auto& [t, v] : a) {
    na += v * v;
    if (auto it = b.find(t); it != b.end()) {
      dot += v * it->second;
    }
  }
  for (const auto& [t, v] : b) {
    nb += v * v;
  }
  return na == 0 || nb == 0 ? 0.0 : dot / std::sqrt(na * nb);
}

Outcome retrieval_oracle()
{
  Outcome o;
  std::mt19937 rng(64);
  const std::vector<std::string> words{"tea",   "history", "bread", "bake",  "python", "loop",  "river", "sleep",
                                       "speech", "car",    "engine", "poem", "sea",    "tax",   "weather", "paris"};
  auto sentence = [&](int length) {
    std::string s;
    for (int k = 0; k < length; ++k) {
      s += (k ? " " : "") + words[rng() % words.size()];
    }
    return s;
  };
  const opt::Retriever retriever;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 64)(rng);
    std::vector<opt::ICLExample> pool;
    for (int k = 0; k < n; ++k) {
      opt::ICLExample e;
      e.query = sentence(std::uniform_int_distribution<int>(1, 6)(rng));
      e.response = "r" + std::to_string(k);
      pool.push_back(e);
    }
    const auto probe = sentence(std::uniform_int_distribution<int>(1, 6)(rng));
    const int k = std::uniform_int_distribution<int>(0, n)(rng);

    std::vector<std::pair<double, std::size_t>> oracle;
    const auto pb = bag(probe);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      oracle.emplace_back(bag_cosine(pb, bag(pool[i].query)), i);
    }
    std::stable_sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) { return a.first > b.first + 1e-12; });

    const auto got = retriever.retrieve_examples(probe, pool, k);
    const auto ranked = retriever.rank(probe, pool, k);
    o.require(got.size() == static_cast<std::size_t>(k), "trial " + std::to_string(trial) + " size");
    for (int r = 0; r < k && r < static_cast<int>(got.size()); ++r) {
      const auto want = oracle[static_cast<std::size_t>(r)];
      o.require(std::abs(ranked[r].similarity - want.first) < 1e-9,
                "trial " + std::to_string(trial) + " rank " + std::to_string(r) + " similarity");
      o.require(got[r].response == pool[want.second].response || std::abs(ranked[r].similarity - want.first) < 1e-12,
                "trial " + std::to_string(trial) + " rank " + std::to_string(r) + " order");
      o.require(got[r].response == pool[ranked[r].index].response, "retrieve_examples disagrees with rank");
    }

    const auto pick = rng() % pool.size();
    const auto first = retriever.rank(pool[pick].query, pool, 1);
    o.require(pool[first.at(0).index].query == pool[pick].query, "identical query not ranked first");
  }

  opt::AlignmentArtifact artifact;
  artifact.system_prompt = "You are a helpful assistant.";
  artifact.icl_examples = opt::load_icl_jsonl(drpo::testing::data_dir() / "base_icl.jsonl");
  const auto messages = opt::assemble_inference_prompt(artifact, "How should I store bread?", retriever);
  o.require(artifact.k == 2, "default K is " + std::to_string(artifact.k));
  o.require(messages.size() == 6, "assembled " + std::to_string(messages.size()) + " messages");

  const auto runs = drpo::testing::scratch_dir("accept-retrieval");
  util::write_file_atomic(runs / "artifact.json", opt::to_json(artifact).dump());
  std::ostringstream out, err;
  const auto applied = cli::cmd_apply({run_config(runs / "runs"), out, err, nullptr},
                                      {runs / "artifact.json", {"How should I store bread?"}});
  const auto row = nlohmann::json::parse(util::read_file(applied.run_dir / "responses.jsonl"));
  o.require(row.at("messages") == 6, "apply assembled " + row.at("messages").dump() + " messages");
  if (o.pass) {
    o.detail = "100 pools match brute-force cosine; identical probe first; K=2 gives 6 messages end to end";
  }
  return o;
}

Outcome determinism_and_replay()
{
  Outcome o;
  ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  const auto runs = drpo::testing::scratch_dir("accept-determinism");
  auto config = run_config(runs);
  config.seed = 7;
  config.shuffle_seeds = true;
  config.prompt_search = {search::Strategy::beam, 2, 3, 6, 1};
  std::vector<fs::path> dirs;
  std::vector<fs::path> icl_dirs;
  for (int run = 0; run < 2; ++run) {
    std::ostringstream out, err;
    icl_dirs.push_back(cli::cmd_optimize_icl({config, out, err, nullptr}).run_dir);
    dirs.push_back(cli::cmd_optimize_prompt({config, out, err, nullptr}).run_dir);
  }
  ::unsetenv("SOURCE_DATE_EPOCH");
  std::size_t files = 0;
  std::size_t traces = 0;
  auto compare = [&](const fs::path& a, const fs::path& b, const fs::path& rel) {
    ++files;
    o.require(util::read_file(a / rel) == util::read_file(b / rel), rel.string() + " differs");
  };
  compare(dirs[0], dirs[1], "artifact.json");
  compare(dirs[0], dirs[1], "trajectory.json");
  compare(dirs[0], dirs[1], "traces/system-prompt.jsonl");
  compare(icl_dirs[0], icl_dirs[1], "icl_set.json");
  std::vector<fs::path> trace_files{dirs[0] / "traces" / "system-prompt.jsonl"};
  for (const auto& entry : fs::directory_iterator(icl_dirs[0] / "traces")) {
    compare(icl_dirs[0], icl_dirs[1], fs::path("traces") / entry.path().filename());
    trace_files.push_back(entry.path());
  }
  for (const auto& file : trace_files) {
    std::ostringstream log;
    o.require(cli::cmd_replay_trace(file, log), "replay mismatch in " + file.filename().string());
    ++traces;
  }
  if (o.pass) {
    o.detail = std::to_string(files) + " files byte-identical across two runs; " + std::to_string(traces) +
               " traces replay to identical beams";
  }
  return o;
}

Outcome robustness()
{
  Outcome o;
  drpo::testing::MockRig rig;
  std::atomic<std::size_t> evaluator_calls{0};
  std::atomic<std::size_t> injected{0};
  rig.mock->add_rule([&](const llm::MockCall& call) -> std::optional<std::string> {
    if (call.role != llm::Role::evaluator) {
      return std::nullopt;
    }
    if (++evaluator_calls % 10 == 0) {
      ++injected;
      return std::string("{\"Helpfulness\": {\"rationale\": \"cut off");
    }
    return std::nullopt;
  });
  const auto seeds = opt::load_seed_jsonl(drpo::testing::data_dir() / "seed_queries.jsonl");
  const auto icl = opt::load_icl_jsonl(drpo::testing::data_dir() / "base_icl.jsonl");
  opt::PromptSearchSettings settings;
  settings.search = {search::Strategy::beam, 2, 3, 5, 1};
  const auto outcome = opt::optimize_system_prompt(rig.context, seeds, icl, settings, {});
  const auto& beams = outcome.search.trace.beams();
  const auto last = beams.rbegin();
  o.require(last->first == 5, "search stopped at depth " + std::to_string(last->first));
  o.require(!last->second.empty(), "final beam is empty");
  o.require(outcome.search.best_reward.has_value(), "no scored best prompt");
  const auto warnings = rig.gateway.warnings().size();
  o.require(injected > 0, "no failures were injected");
  o.require(warnings == injected, "warnings " + std::to_string(warnings) + " vs injected " + std::to_string(injected));
  if (o.pass) {
    o.detail = "W=2 M=3 D=5 completed, final beam " + std::to_string(last->second.size()) + " members; " +
               std::to_string(injected) + " of " + std::to_string(evaluator_calls) +
               " evaluator replies malformed, " + std::to_string(warnings) + " warnings";
  }
  return o;
}

} // namespace

int main()
{
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"cost conformance", cost_conformance},
      {"search optimality oracle", search_oracle},
      {"cost-parity ablation", cost_parity},
      {"reward aggregation", reward_aggregation},
      {"argmax invariance", argmax_invariance},
      {"template fidelity", template_fidelity},
      {"retrieval oracle", retrieval_oracle},
      {"determinism and replay", determinism_and_replay},
      {"robustness", robustness},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome outcome;
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("threw: ") + e.what()};
    }
    failures += outcome.pass ? 0 : 1;
    std::cout << (outcome.pass ? "PASS " : "FAIL ") << name << ": " << outcome.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size()
            << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
