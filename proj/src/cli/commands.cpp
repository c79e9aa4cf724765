#include "drpo/cli/commands.hpp"

#include "drpo/cli/run_dir.hpp"
#include "drpo/errors.hpp"
#include "drpo/llm/http_backend.hpp"
#include "drpo/llm/mock_backend.hpp"
#include "drpo/opt/icl.hpp"
#include "drpo/opt/inference.hpp"
#include "drpo/opt/system_prompt.hpp"
#include "drpo/search/trace.hpp"
#include "drpo/util/files.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace drpo::cli {
namespace {

// Everything one command needs to talk to models.
struct Session {
  std::unique_ptr<llm::Gateway> gateway;
  TemplateSet templates;
  std::unique_ptr<reward::Rewarder> rewarder;
  std::shared_ptr<const opt::Embedder> embedder;
  std::unique_ptr<opt::Retriever> retriever;
  std::unique_ptr<opt::OptimizerContext> context;

  Session(const CommandEnv& env, const RunDir& run)
      : templates(env.config.paths.templates_dir ? TemplateSet(*env.config.paths.templates_dir)
                                                 : TemplateSet())
  {
    const auto& config = env.config;
    gateway = build_gateway(env, config.paths.cache_dir.value_or(run.path() / "cache"));
    rewarder = std::make_unique<reward::Rewarder>(*gateway, templates, config.rewarding);
    if (!config.embedder.endpoint.empty() && !config.mock) {
      embedder = std::make_shared<opt::RemoteEmbedder>(config.embedder.endpoint, config.embedder.model,
                                                       config.embedder.api_key_env);
    }
    retriever = std::make_unique<opt::Retriever>(embedder, &gateway->warnings());
    context = std::make_unique<opt::OptimizerContext>(
        opt::OptimizerContext{*gateway, templates, *rewarder, *retriever, config.workers});
  }
};

void snapshot(const CommandEnv& env, const RunDir& run, const Session& session)
{
  run.write_json("config.json", to_json(env.config));
  session.templates.write_to(run.path() / "templates");
}

nlohmann::json warnings_json(const WarningLog& log)
{
  nlohmann::json out = nlohmann::json::array();
  for (const auto& w : log.snapshot()) {
    out.push_back({{"category", w.category}, {"message", w.message}});
  }
  return out;
}

RunSummary finish(const RunDir& run, const Session& session, std::ostream& out)
{
  RunSummary summary{run.path(), session.gateway->call_ledger(), session.gateway->warnings().size()};
  run.write_json("ledger.json", summary.ledger.to_json());
  run.write_json("warnings.json", warnings_json(session.gateway->warnings()));

  const auto cost = cost_from_ledger(summary.ledger);
  out << "calls by stage:\n";
  const std::pair<const char*, std::uint64_t> rows[] = {
      {"prompt_sampling", cost.prompt_sampling},
      {"reward_selection", cost.reward_selection},
      {"response_generation", cost.response_generation},
      {"evaluation", cost.evaluation},
      {"root_generation", cost.root_generation},
      {"root_evaluation", cost.root_evaluation},
      {"inference", summary.ledger.by_stage(llm::Stage::inference).calls()},
      {"judge", summary.ledger.by_stage(llm::Stage::judge).calls()},
      {"other", summary.ledger.by_stage(llm::Stage::other).calls()}};
  for (const auto& [name, count] : rows) {
    if (count > 0) {
      out << "  " << name << std::string(22 - std::string(name).size(), ' ') << count << "\n";
    }
  }
  const auto total = summary.ledger.total();
  out << "  total                 " << total.calls() << " (" << total.hits << " cache hits, "
      << total.upstream() << " upstream)\n";
  if (summary.warnings > 0) {
    out << "warnings: " << summary.warnings << "\n";
  }
  out << "run dir: " << run.path().string() << "\n";
  return summary;
}

std::vector<opt::ICLExample> load_base_set(const RunConfig& config)
{
  auto base = opt::load_icl_jsonl(config.paths.base_icl);
  if (base.empty()) {
    throw ConfigError(config.paths.base_icl.string() + " holds no examples");
  }
  return base;
}

std::string excerpt(const std::string& text, std::size_t width)
{
  auto line = text.substr(0, text.find('\n'));
  return line.size() <= width ? line : line.substr(0, width - 3) + "...";
}

llm::Messages inference_messages(const opt::AlignmentArtifact& artifact, const std::string& query,
                                 const opt::Retriever& retriever)
{
  return opt::assemble_inference_prompt(artifact, query, retriever);
}

std::string tsv_cell(std::string text)
{
  std::replace_if(text.begin(), text.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
  return text;
}

std::string fixed2(double value)
{
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.2f", value);
  return buffer;
}

// Answers `queries` through `artifact`. Backend errors are reported per
// query; configuration and transport problems abort.
std::vector<nlohmann::json> answer(const CommandEnv& env, Session& session,
                                   const opt::AlignmentArtifact& artifact,
                                   const std::vector<std::string>& queries)
{
  const auto& serving = session.gateway->profile(llm::Role::base);
  if (!queries.empty() && !artifact.target_model.empty() && serving.model_id != artifact.target_model) {
    session.gateway->warnings().warn("transfer", "artifact optimized for " + artifact.target_model +
                                                     " is served by " + serving.model_id);
    env.err << "warning: artifact was optimized for " << artifact.target_model << ", serving with "
            << serving.model_id << "\n";
  }
  std::vector<nlohmann::json> rows;
  for (const auto& query : queries) {
    llm::CompletionRequest request;
    request.role = llm::Role::base;
    request.stage = llm::Stage::inference;
    request.messages = inference_messages(artifact, query, *session.retriever);
    request.temperature = 0.0;
    request.meta = {{"query", query}};
    nlohmann::json row = {{"query", query}, {"messages", request.messages.size()}};
    try {
      row["response"] = session.gateway->complete(request);
    } catch (const ConfigError&) {
      throw;
    } catch (const TransportError&) {
      throw;
    } catch (const Error& e) {
      row["error"] = e.what();
      env.err << "error: " << excerpt(query, 60) << ": " << e.what() << "\n";
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

} // namespace

std::unique_ptr<llm::Gateway> build_gateway(const CommandEnv& env,
                                            const std::optional<std::filesystem::path>& cache_dir)
{
  const auto& config = env.config;
  llm::GatewayOptions options;
  options.cache_enabled = config.cache;
  options.cache_dir = config.cache ? cache_dir : std::nullopt;
  options.max_in_flight = config.max_in_flight;
  auto gateway = std::make_unique<llm::Gateway>(options);

  std::shared_ptr<llm::Backend> mock;
  std::shared_ptr<llm::Backend> http;
  for (const auto role : llm::kAllRoles) {
    auto profile = config.profile(role);
    std::shared_ptr<llm::Backend> backend = env.backend_override;
    if (!backend) {
      if (config.mock || profile.is_mock()) {
        if (!mock) {
          mock = std::make_shared<llm::MockBackend>();
        }
        backend = mock;
      } else {
        llm::resolve_api_key(profile);
        if (!http) {
          http = std::make_shared<llm::HttpBackend>();
        }
        backend = http;
      }
    }
    gateway->bind(std::move(profile), std::move(backend));
  }
  return gateway;
}

RunSummary cmd_optimize_icl(const CommandEnv& env)
{
  const auto& config = env.config;
  const auto base = load_base_set(config);
  search::validate(config.icl_search);

  const auto run = RunDir::create(config.paths.runs_dir, config_hash(config));
  Session session(env, run);
  snapshot(env, run, session);

  const auto outcomes = opt::optimize_icl_set(*session.context, base, config.icl_search);
  nlohmann::json set = nlohmann::json::array();
  std::size_t optimized = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& outcome = outcomes[i];
    char name[32];
    std::snprintf(name, sizeof name, "icl-%02zu.jsonl", i);
    run.write_text(std::filesystem::path("traces") / name, outcome.search.trace.to_jsonl());
    set.push_back(opt::to_json(outcome.example));
    optimized += outcome.example.optimized ? 1 : 0;
    if (!outcome.example.failure.empty()) {
      env.err << "example " << i << " kept its base response: " << outcome.example.failure << "\n";
    }
  }
  run.write_json("icl_set.json", set);
  env.out << "optimized " << optimized << " of " << outcomes.size() << " examples\n";
  return finish(run, session, env.out);
}

RunSummary cmd_optimize_prompt(const CommandEnv& env)
{
  const auto& config = env.config;
  auto seeds = opt::load_seed_jsonl(config.paths.seed_queries);
  std::vector<opt::ICLExample> icl;
  if (config.paths.icl_set) {
    icl = opt::load_icl_set(*config.paths.icl_set);
  } else {
    icl = load_base_set(config);
    env.err << "note: no optimized ICL set configured, using the base examples\n";
  }
  search::validate(config.prompt_search);
  const int depth =
      config.prompt_search.strategy == search::Strategy::monte_carlo ? 1 : config.prompt_search.depth;
  if (static_cast<std::size_t>(depth) > seeds.size()) {
    throw ConfigError("depth " + std::to_string(depth) + " exceeds the " +
                      std::to_string(seeds.size()) + " seed queries");
  }
  if (static_cast<std::size_t>(config.k) > icl.size()) {
    throw ConfigError("K=" + std::to_string(config.k) + " exceeds the " + std::to_string(icl.size()) +
                      " ICL examples");
  }
  if (config.shuffle_seeds) {
    std::mt19937_64 rng(config.seed);
    std::shuffle(seeds.queries.begin(), seeds.queries.end(), rng);
  }

  const auto run = RunDir::create(config.paths.runs_dir, config_hash(config));
  Session session(env, run);
  snapshot(env, run, session);

  opt::PromptSearchSettings settings;
  settings.search = config.prompt_search;
  settings.k = config.k;
  auto outcome = opt::optimize_system_prompt(*session.context, seeds, icl, settings,
                                             config.profile(llm::Role::base));
  outcome.artifact.config_hash = config_hash(config);

  run.write_text("traces/system-prompt.jsonl", outcome.search.trace.to_jsonl());
  nlohmann::json trajectory = nlohmann::json::array();
  env.out << "depth  reward  query\n";
  for (const auto& d : outcome.trajectory) {
    trajectory.push_back(
        {{"depth", d.depth}, {"query", d.query}, {"best_reward", d.best_reward}, {"beam", d.beam}});
    char line[64];
    std::snprintf(line, sizeof line, "%5d  %6.3f  ", d.depth, d.best_reward);
    env.out << line << excerpt(d.query, 60) << "\n";
  }
  run.write_json("trajectory.json", trajectory);
  run.write_json("artifact.json", opt::to_json(outcome.artifact));
  env.out << "final system prompt:\n" << outcome.artifact.system_prompt << "\n";
  return finish(run, session, env.out);
}

RunSummary cmd_apply(const CommandEnv& env, const ApplyRequest& request)
{
  const auto artifact = opt::load_artifact(request.artifact);
  const auto run = RunDir::create(env.config.paths.runs_dir, config_hash(env.config));
  Session session(env, run);
  run.write_json("config.json", to_json(env.config));

  const auto rows = answer(env, session, artifact, request.queries);
  std::string lines;
  for (const auto& row : rows) {
    lines += row.dump() + "\n";
    if (row.contains("response")) {
      env.out << "> " << row.at("query").get<std::string>() << "\n"
              << row.at("response").get<std::string>() << "\n\n";
    }
  }
  run.write_text("responses.jsonl", lines);
  return finish(run, session, env.out);
}

nlohmann::json cmd_estimate_cost(const CommandEnv& env, CostStage stage,
                                 std::optional<std::uint64_t> examples)
{
  const auto& config = env.config;
  nlohmann::json out = nlohmann::json::object();
  if (stage != CostStage::icl) {
    auto entry = estimate_prompt_cost(config.prompt_search, config.rewarding).to_json();
    entry["search"] = search::to_json(config.prompt_search);
    out["prompt"] = entry;
  }
  if (stage != CostStage::prompt) {
    std::uint64_t n = 16;
    if (examples) {
      n = *examples;
    } else if (std::filesystem::exists(config.paths.base_icl)) {
      n = opt::load_icl_jsonl(config.paths.base_icl).size();
    }
    auto entry = estimate_icl_cost(config.icl_search, n, config.rewarding).to_json();
    entry["search"] = search::to_json(config.icl_search);
    entry["examples"] = n;
    out["icl"] = entry;
  }
  env.out << out.dump(2) << "\n";
  return out;
}

RunSummary cmd_judge(const CommandEnv& env, const JudgeRequest& request)
{
  const auto selection = request.aspects.empty() ? reward::static_selection()
                                                 : reward::static_selection(request.aspects);
  std::optional<opt::AlignmentArtifact> artifact;
  if (request.artifact) {
    artifact = opt::load_artifact(*request.artifact);
  }
  const auto run = RunDir::create(env.config.paths.runs_dir, config_hash(env.config));
  Session session(env, run);
  snapshot(env, run, session);

  auto rows = request.rows;
  if (artifact) {
    for (const auto& r : answer(env, session, *artifact, request.queries)) {
      if (r.contains("response")) {
        rows.push_back({r.at("query").get<std::string>(), r.at("response").get<std::string>()});
      }
    }
  }

  const auto names = selection.names();
  std::vector<double> sums(names.size(), 0.0);
  nlohmann::json scored = nlohmann::json::array();
  std::string tsv = "query";
  for (const auto& name : names) {
    tsv += "\t" + name;
  }
  tsv += "\tmean\n";
  std::size_t skipped = 0;
  for (const auto& row : rows) {
    reward::RewardReport report;
    try {
      report = session.rewarder->evaluate_response(row.query, row.response, selection, llm::Stage::judge);
    } catch (const ConfigError&) {
      throw;
    } catch (const TransportError&) {
      throw;
    } catch (const Error& e) {
      ++skipped;
      env.err << "skipped: " << excerpt(row.query, 60) << ": " << e.what() << "\n";
      continue;
    }
    nlohmann::json scores = nlohmann::json::object();
    tsv += tsv_cell(row.query);
    for (std::size_t i = 0; i < report.entries.size(); ++i) {
      sums[i] += report.entries[i].score;
      scores[report.entries[i].name] = report.entries[i].score;
      tsv += "\t" + std::to_string(report.entries[i].score);
    }
    tsv += "\t" + fixed2(report.aggregate) + "\n";
    scored.push_back({{"query", row.query},
                      {"response", row.response},
                      {"scores", scores},
                      {"aggregate", report.aggregate}});
  }

  nlohmann::json means = nlohmann::json::object();
  if (!scored.empty()) {
    tsv += "MEAN";
    double overall = 0.0;
    for (std::size_t i = 0; i < names.size(); ++i) {
      const double mean = sums[i] / static_cast<double>(scored.size());
      means[names[i]] = mean;
      overall += mean;
      tsv += "\t" + fixed2(mean);
    }
    tsv += "\t" + fixed2(overall / static_cast<double>(names.size())) + "\n";
  }
  run.write_text("judge_report.tsv", tsv);
  run.write_json("judge_report.json",
                 {{"aspects", names}, {"rows", scored}, {"means", means}, {"skipped", skipped}});
  env.out << tsv;
  return finish(run, session, env.out);
}

bool cmd_replay_trace(const std::filesystem::path& trace_file, std::ostream& out)
{
  search::SearchTrace trace;
  try {
    trace = search::SearchTrace::from_jsonl(util::read_file(trace_file));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(trace_file.string() + ": " + e.what());
  }
  const auto replayed = search::replay_beams(trace);
  bool same = replayed == trace.beams();
  std::set<int> depths;
  for (const auto& [d, m] : replayed) {
    depths.insert(d);
  }
  for (const auto& [d, m] : trace.beams()) {
    depths.insert(d);
  }
  for (const int d : depths) {
    const auto a = replayed.find(d);
    const auto b = trace.beams().find(d);
    const bool ok = a != replayed.end() && b != trace.beams().end() && a->second == b->second;
    out << "depth " << d << ": " << (ok ? "match" : "MISMATCH") << "\n";
  }
  out << (same ? "replay matches recorded beams" : "replay differs from recorded beams") << "\n";
  return same;
}

std::vector<std::string> load_queries(const std::filesystem::path& file)
{
  std::vector<std::string> out;
  std::istringstream in(util::read_file(file));
  for (std::string line; std::getline(in, line);) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    const auto value = nlohmann::json::parse(line, nullptr, false);
    if (value.is_object() && value.contains("query") && value.at("query").is_string()) {
      out.push_back(value.at("query").get<std::string>());
    } else {
      if (!line.empty() && line.back() == '\r') {
        line.pop_back();
      }
      out.push_back(line);
    }
  }
  return out;
}

std::vector<JudgeRow> load_judge_rows(const std::filesystem::path& file)
{
  std::vector<JudgeRow> out;
  std::istringstream in(util::read_file(file));
  int number = 0;
  for (std::string line; std::getline(in, line);) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    const auto value = nlohmann::json::parse(line, nullptr, false);
    if (!value.is_object() || !value.contains("query") || !value.contains("response") ||
        !value.at("query").is_string() || !value.at("response").is_string()) {
      throw ConfigError(file.string() + ":" + std::to_string(number) +
                        ": expected {\"query\": ..., \"response\": ...}");
    }
    out.push_back({value.at("query").get<std::string>(), value.at("response").get<std::string>()});
  }
  return out;
}

} // namespace drpo::cli
