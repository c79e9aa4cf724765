#include "drpo/search/trace.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace drpo::search {
namespace {

nlohmann::json node_json(const SearchNode& node)
{
  return {{"event", "node"},
          {"id", node.id},
          {"parent", node.parent ? nlohmann::json(*node.parent) : nlohmann::json()},
          {"depth", node.depth},
          {"sample", node.sample},
          {"state", node.state},
          {"reward", node.reward ? nlohmann::json(*node.reward) : nlohmann::json()},
          {"dropped", node.dropped},
          {"feedback", node.feedback},
          {"detail", node.detail}};
}

SearchNode node_from_json(const nlohmann::json& j)
{
  SearchNode node;
  node.id = j.at("id").get<int>();
  if (!j.at("parent").is_null()) {
    node.parent = j.at("parent").get<int>();
  }
  node.depth = j.at("depth").get<int>();
  node.sample = j.value("sample", 0);
  node.state = j.at("state").get<std::string>();
  if (!j.at("reward").is_null()) {
    node.reward = j.at("reward").get<double>();
  }
  node.dropped = j.value("dropped", false);
  node.feedback = j.value("feedback", "");
  node.detail = j.value("detail", nlohmann::json::object());
  return node;
}

} // namespace

void SearchTrace::add_node(SearchNode node)
{
  if (index_.contains(node.id)) {
    throw std::logic_error("duplicate node id " + std::to_string(node.id));
  }
  if (node.parent) {
    const auto it = index_.find(*node.parent);
    if (it == index_.end()) {
      throw std::logic_error("node " + std::to_string(node.id) + " arrived before its parent");
    }
    if (nodes_[it->second].depth + 1 != node.depth) {
      throw std::logic_error("node " + std::to_string(node.id) + " has an inconsistent depth");
    }
  } else if (node.depth != 0) {
    throw std::logic_error("parentless node " + std::to_string(node.id) + " must have depth 0");
  }
  order_.push_back(node_json(node));
  index_[node.id] = nodes_.size();
  nodes_.push_back(std::move(node));
}

void SearchTrace::set_beam(int depth, std::vector<int> members)
{
  order_.push_back({{"event", "beam"}, {"depth", depth}, {"members", members}});
  beams_[depth] = std::move(members);
}

void SearchTrace::warn(std::string message)
{
  order_.push_back({{"event", "warning"}, {"message", message}});
  warnings_.push_back(std::move(message));
}

void SearchTrace::set_best(int id)
{
  const auto& best = node(id);
  order_.push_back({{"event", "best"},
                    {"id", id},
                    {"reward", best.reward ? nlohmann::json(*best.reward) : nlohmann::json()}});
  best_ = id;
}

const SearchNode& SearchTrace::node(int id) const
{
  const auto it = index_.find(id);
  if (it == index_.end()) {
    throw std::out_of_range("no node with id " + std::to_string(id));
  }
  return nodes_[it->second];
}

int SearchTrace::beam_width() const
{
  if (header_.contains("width")) {
    return header_.at("width").get<int>();
  }
  std::size_t widest = 0;
  for (const auto& [depth, members] : beams_) {
    widest = std::max(widest, members.size());
  }
  return static_cast<int>(widest);
}

std::string SearchTrace::to_jsonl() const
{
  nlohmann::json head = header_;
  head["event"] = "search";
  std::string out = head.dump() + "\n";
  for (const auto& event : order_) {
    out += event.dump() + "\n";
  }
  return out;
}

SearchTrace SearchTrace::from_jsonl(std::string_view text)
{
  SearchTrace trace;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) {
      continue;
    }
    const auto j = nlohmann::json::parse(line);
    const auto event = j.at("event").get<std::string>();
    if (event == "search") {
      auto header = j;
      header.erase("event");
      trace.set_header(std::move(header));
    } else if (event == "node") {
      trace.add_node(node_from_json(j));
    } else if (event == "beam") {
      trace.set_beam(j.at("depth").get<int>(), j.at("members").get<std::vector<int>>());
    } else if (event == "warning") {
      trace.warn(j.at("message").get<std::string>());
    } else if (event == "best") {
      trace.set_best(j.at("id").get<int>());
    } else {
      throw std::runtime_error("unknown trace event \"" + event + "\"");
    }
  }
  return trace;
}

} // namespace drpo::search
