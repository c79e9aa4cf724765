#pragma once

#include "drpo/cli/config.hpp"
#include "drpo/cli/cost.hpp"
#include "drpo/llm/backend.hpp"
#include "drpo/llm/gateway.hpp"

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace drpo::cli {

struct CommandEnv {
  RunConfig config;
  std::ostream& out;
  std::ostream& err;
  // Serves every role instead of the configured backends (tests).
  std::shared_ptr<llm::Backend> backend_override;
};

// Gateway with one backend per role: the override, the mock backend for
// "mock" endpoints (or with config.mock), HTTP otherwise.
std::unique_ptr<llm::Gateway> build_gateway(const CommandEnv& env,
                                            const std::optional<std::filesystem::path>& cache_dir);

struct RunSummary {
  std::filesystem::path run_dir;
  llm::LedgerSnapshot ledger;
  std::size_t warnings = 0;
};

// Optimizes the base ICL set; writes icl_set.json and one trace per example.
RunSummary cmd_optimize_icl(const CommandEnv& env);

// Optimizes the system prompt; writes artifact.json and the search trace.
RunSummary cmd_optimize_prompt(const CommandEnv& env);

struct ApplyRequest {
  std::filesystem::path artifact;
  std::vector<std::string> queries;
};

// Answers each query with the artifact applied; writes responses.jsonl.
RunSummary cmd_apply(const CommandEnv& env, const ApplyRequest& request);

enum class CostStage { prompt, icl, both };

// Closed-form call counts; no model is contacted.
nlohmann::json cmd_estimate_cost(const CommandEnv& env, CostStage stage,
                                 std::optional<std::uint64_t> examples);

struct JudgeRow {
  std::string query;
  std::string response;
};

struct JudgeRequest {
  std::vector<JudgeRow> rows;
  // With an artifact, `queries` are first answered through it and the
  // answers are appended to `rows`.
  std::optional<std::filesystem::path> artifact;
  std::vector<std::string> queries;
  std::vector<std::string> aspects;  // empty: the fixed six
};

// Scores every row on the requested aspects with a static selection; writes
// judge_report.tsv and judge_report.json. Rows whose scoring fails are
// skipped.
RunSummary cmd_judge(const CommandEnv& env, const JudgeRequest& request);

// Recomputes the beams of a trace file and compares them with the recorded
// ones. Returns true when they agree.
bool cmd_replay_trace(const std::filesystem::path& trace_file, std::ostream& out);

// {"query": ...} per line, or plain text lines.
std::vector<std::string> load_queries(const std::filesystem::path& file);
// {"query": ..., "response": ...} per line.
std::vector<JudgeRow> load_judge_rows(const std::filesystem::path& file);

} // namespace drpo::cli
