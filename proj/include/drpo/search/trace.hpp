#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace drpo::search {

struct SearchNode {
  int id = 0;                  // creation index, unique within a trace
  std::string state;
  int depth = 0;
  std::optional<int> parent;
  int sample = 0;              // sample index within the parent
  std::optional<double> reward;
  std::string feedback;
  nlohmann::json detail = nlohmann::json::object();
  bool dropped = false;        // scoring failed; never competes
};

// Append-only history of one search, persisted as JSON lines:
//   {"event":"search", ...header}
//   {"event":"node", id, parent, depth, sample, state, reward, dropped, feedback, detail}
//   {"event":"beam", depth, members:[ids]}
//   {"event":"warning", message}
//   {"event":"best", id, reward}
class SearchTrace {
public:
  void set_header(nlohmann::json header) { header_ = std::move(header); }
  const nlohmann::json& header() const { return header_; }

  // Nodes must arrive parent-first; throws std::logic_error otherwise.
  void add_node(SearchNode node);
  void set_beam(int depth, std::vector<int> members);
  void warn(std::string message);
  void set_best(int id);

  const std::vector<SearchNode>& nodes() const { return nodes_; }
  const SearchNode& node(int id) const;
  const std::map<int, std::vector<int>>& beams() const { return beams_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  std::optional<int> best_id() const { return best_; }
  int beam_width() const;

  std::string to_jsonl() const;
  static SearchTrace from_jsonl(std::string_view text);

private:
  nlohmann::json header_ = nlohmann::json::object();
  std::vector<SearchNode> nodes_;
  std::map<int, std::size_t> index_;
  std::map<int, std::vector<int>> beams_;
  std::vector<std::string> warnings_;
  std::vector<nlohmann::json> order_;  // events in arrival order
  std::optional<int> best_;
};

} // namespace drpo::search
