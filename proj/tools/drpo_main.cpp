#include "drpo/cli/commands.hpp"
#include "drpo/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace drpo;

struct Globals {
  std::string config_file;
  cli::Overrides overrides;
};

void add_globals(CLI::App& app, Globals& g)
{
  auto& o = g.overrides;
  app.add_option("--config", g.config_file, "JSON run configuration");
  app.add_option("--run-dir", o.run_dir, "Directory that receives run folders");
  app.add_option("--search", o.search, "Search strategy")->check(CLI::IsMember({"beam", "greedy", "mc"}));
  app.add_option("--rewarding", o.rewarding, "Reward mode")->check(CLI::IsMember({"dynamic", "static"}));
  app.add_option("--W", o.width, "Beam width");
  app.add_option("--M", o.samples, "Samples per kept state");
  app.add_option("--D", o.depth, "Search depth");
  app.add_option("--K", o.k, "Examples retrieved per query");
  app.add_option("--mc-budget", o.mc_budget, "Children sampled by Monte Carlo search");
  app.add_option("--seed", o.seed, "Random seed for seed-query shuffling");
  app.add_flag("--mock", o.mock, "Serve every role from the offline mock backend");
}

cli::RunConfig load(const Globals& g, std::initializer_list<cli::Stage> stages)
{
  auto config = g.config_file.empty() ? cli::RunConfig() : cli::load_config(g.config_file);
  cli::apply_overrides(config, g.overrides, stages);
  return config;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Prompt and example optimization for LLM alignment"};
  app.require_subcommand(1);
  Globals g;
  add_globals(app, g);

  auto* icl = app.add_subcommand("optimize-icl", "Optimize the base in-context examples");
  auto* prompt = app.add_subcommand("optimize-prompt", "Optimize the system prompt");
  std::string icl_set;
  prompt->add_option("--icl-set", icl_set, "icl_set.json from an optimize-icl run");

  auto* apply = app.add_subcommand("apply", "Answer queries with an optimized artifact");
  std::string artifact;
  std::string query;
  std::string query_file;
  apply->add_option("--artifact", artifact, "artifact.json")->required();
  auto* q = apply->add_option("--query", query, "A single query");
  auto* qf = apply->add_option("--query-file", query_file, "Queries, one per line or JSONL");
  q->excludes(qf);

  auto* estimate = app.add_subcommand("estimate-cost", "Closed-form model call counts");
  std::string stage = "both";
  std::optional<std::uint64_t> examples;
  estimate->add_option("--stage", stage, "prompt, icl or both")->check(CLI::IsMember({"prompt", "icl", "both"}));
  estimate->add_option("--examples", examples, "Number of ICL examples (default: base set size)");

  auto* judge = app.add_subcommand("judge", "Score responses on fixed aspects");
  std::string responses;
  std::string judge_artifact;
  std::string judge_queries;
  std::vector<std::string> aspects;
  judge->add_option("--responses", responses, "JSONL rows with query and response");
  judge->add_option("--artifact", judge_artifact, "Answer --queries with this artifact first");
  judge->add_option("--queries", judge_queries, "Queries for --artifact");
  judge->add_option("--aspects", aspects, "Aspects to score (default: the fixed six)")->delimiter(',');

  auto* replay = app.add_subcommand("replay-trace", "Check a trace's beams against its rewards");
  std::string trace_file;
  replay->add_option("trace", trace_file, "Trace .jsonl file")->required();

  for (auto* sub : {icl, prompt, apply, estimate, judge, replay}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (icl->parsed()) {
      cli::CommandEnv env{load(g, {cli::Stage::icl}), std::cout, std::cerr, nullptr};
      cli::cmd_optimize_icl(env);
    } else if (prompt->parsed()) {
      auto config = load(g, {cli::Stage::prompt});
      if (!icl_set.empty()) {
        config.paths.icl_set = icl_set;
      }
      cli::CommandEnv env{config, std::cout, std::cerr, nullptr};
      cli::cmd_optimize_prompt(env);
    } else if (apply->parsed()) {
      cli::CommandEnv env{load(g, {}), std::cout, std::cerr, nullptr};
      cli::ApplyRequest request{artifact, {}};
      if (!query.empty()) {
        request.queries.push_back(query);
      } else if (!query_file.empty()) {
        request.queries = cli::load_queries(query_file);
      } else {
        throw ConfigError("apply needs --query or --query-file");
      }
      cli::cmd_apply(env, request);
    } else if (estimate->parsed()) {
      const auto which = stage == "prompt" ? cli::CostStage::prompt
                         : stage == "icl"  ? cli::CostStage::icl
                                           : cli::CostStage::both;
      auto config = which == cli::CostStage::prompt ? load(g, {cli::Stage::prompt})
                    : which == cli::CostStage::icl  ? load(g, {cli::Stage::icl})
                                                    : load(g, {cli::Stage::prompt, cli::Stage::icl});
      cli::CommandEnv env{config, std::cout, std::cerr, nullptr};
      cli::cmd_estimate_cost(env, which, examples);
    } else if (judge->parsed()) {
      cli::CommandEnv env{load(g, {}), std::cout, std::cerr, nullptr};
      cli::JudgeRequest request;
      request.aspects = aspects;
      if (!responses.empty()) {
        request.rows = cli::load_judge_rows(responses);
      }
      if (!judge_artifact.empty()) {
        if (judge_queries.empty()) {
          throw ConfigError("judge --artifact needs --queries");
        }
        request.artifact = judge_artifact;
        request.queries = cli::load_queries(judge_queries);
      }
      if (responses.empty() && judge_artifact.empty()) {
        throw ConfigError("judge needs --responses or --artifact with --queries");
      }
      cli::cmd_judge(env, request);
    } else if (replay->parsed()) {
      return cli::cmd_replay_trace(trace_file, std::cout) ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const TransportError& e) {
    std::cerr << "backend failure: " << e.what() << "\n";
    return 3;
  } catch (const ProviderError& e) {
    std::cerr << "backend failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
