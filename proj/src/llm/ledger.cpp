#include "drpo/llm/ledger.hpp"

namespace drpo::llm {

CallCounts& CallCounts::operator+=(const CallCounts& other)
{
  hits += other.hits;
  misses += other.misses;
  bypassed += other.bypassed;
  return *this;
}

CallCounts LedgerSnapshot::by_role(Role role) const
{
  CallCounts sum;
  for (const auto& [key, counts] : cells) {
    if (key.first == role) {
      sum += counts;
    }
  }
  return sum;
}

CallCounts LedgerSnapshot::by_stage(Stage stage) const
{
  CallCounts sum;
  for (const auto& [key, counts] : cells) {
    if (key.second == stage) {
      sum += counts;
    }
  }
  return sum;
}

CallCounts LedgerSnapshot::total() const
{
  CallCounts sum;
  for (const auto& [key, counts] : cells) {
    sum += counts;
  }
  return sum;
}

namespace {

nlohmann::json counts_json(const CallCounts& counts)
{
  return {{"calls", counts.calls()},
          {"hits", counts.hits},
          {"misses", counts.misses},
          {"bypassed", counts.bypassed},
          {"upstream", counts.upstream()}};
}

} // namespace

nlohmann::json LedgerSnapshot::to_json() const
{
  nlohmann::json roles = nlohmann::json::object();
  for (auto role : kAllRoles) {
    nlohmann::json stages = nlohmann::json::object();
    for (const auto& [key, counts] : cells) {
      if (key.first == role) {
        stages[std::string(to_string(key.second))] = counts_json(counts);
      }
    }
    roles[std::string(to_string(role))] = {{"total", counts_json(by_role(role))}, {"stages", stages}};
  }
  nlohmann::json stages = nlohmann::json::object();
  for (const auto& [key, counts] : cells) {
    stages[std::string(to_string(key.second))] = counts_json(by_stage(key.second));
  }
  return {{"roles", roles}, {"stages", stages}, {"total", counts_json(total())}};
}

void CallLedger::record(Role role, Stage stage, CallOutcome outcome)
{
  std::lock_guard lock(mutex_);
  auto& cell = cells_[{role, stage}];
  switch (outcome) {
  case CallOutcome::hit: ++cell.hits; break;
  case CallOutcome::miss: ++cell.misses; break;
  case CallOutcome::bypass: ++cell.bypassed; break;
  }
}

LedgerSnapshot CallLedger::snapshot() const
{
  std::lock_guard lock(mutex_);
  return LedgerSnapshot{cells_};
}

} // namespace drpo::llm
