#include "drpo/llm/mock_backend.hpp"

#include "drpo/hashing.hpp"
#include "drpo/llm/json_extract.hpp"
#include "drpo/reward/criteria.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

namespace drpo::llm {
namespace {

std::string lower(std::string_view text)
{
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool mentions_any(std::string_view text, std::initializer_list<std::string_view> words)
{
  const auto haystack = lower(text);
  return std::any_of(words.begin(), words.end(),
                     [&](std::string_view w) { return haystack.find(w) != std::string::npos; });
}

std::string short_hex(std::string_view material)
{
  return sha256_hex(material).substr(0, 8);
}

std::string meta_text(const nlohmann::json& meta, std::string_view key)
{
  return text_field(meta, key);
}

std::string select_reply(const MockCall& call)
{
  const auto query = meta_text(call.meta, "query").empty() ? call.last_user()
                                                            : meta_text(call.meta, "query");
  const auto& catalog = reward::catalog();
  const auto seed = digest64("select|" + query);
  const std::size_t wanted = 2 + seed % 4;

  std::vector<std::string> picks;
  auto add = [&](const std::string& name) {
    if (picks.size() < wanted && std::find(picks.begin(), picks.end(), name) == picks.end()) {
      picks.push_back(name);
    }
  };
  if (mentions_any(query, {"latest", "news", "today", "current", "this week", "right now", "stock price"})) {
    add("Limitations");
  }
  if (mentions_any(query, {"kill", "steal", "weapon", "bomb", "hack", "poison", "drugs", "hurt",
                           "illegal", "cheat", "revenge", "insult", "racist"})) {
    add("Safety");
  }
  for (std::size_t i = 0; picks.size() < wanted; ++i) {
    add(catalog[(seed / 7 + i * 5) % catalog.size()].name);
  }

  const nlohmann::json reply = {
      {"query_analysis",
       {{"main_topic", "mock topic " + short_hex(query)},
        {"user_intent", "mock intent"},
        {"ambiguities", "none noted"},
        {"response_format", "short prose"},
        {"challenges", "none noted"}}},
      {"aspects_selection",
       {{"reasoning", "Mock selection derived from the query digest."}, {"selected_aspects", picks}}}};
  return render_fenced(reply);
}

std::string evaluate_reply(const MockCall& call)
{
  const auto output = meta_text(call.meta, "output");
  nlohmann::json reply = nlohmann::json::object();
  const auto aspects = call.meta.value("aspects", nlohmann::json::array());
  for (const auto& aspect : aspects) {
    const auto name = aspect.get<std::string>();
    const int score = 1 + static_cast<int>(digest64("score|" + name + "|" + output) % 5);
    reply[name] = {{"rationale", "Mock judgement of " + lower(name) + " for output " + short_hex(output) + "."},
                   {"score", std::to_string(score)}};
  }
  return render_fenced(reply);
}

constexpr std::array<std::string_view, 16> kPromptTips{
    "Acknowledge when a question needs real-time data you do not have.",
    "Decline harmful or illegal requests and offer a safe alternative.",
    "Lead with a direct answer before adding supporting detail.",
    "Use a warm, conversational tone instead of stock phrases.",
    "Organize longer answers with short paragraphs or lists.",
    "Flag uncertainty instead of guessing at facts.",
    "Offer a concrete example when explaining an abstract idea.",
    "Ask a clarifying question when the request is ambiguous.",
    "Avoid repeating the same sentence or phrase.",
    "Keep technical jargon to a minimum and define the terms you use.",
    "Close with a useful next step or follow-up suggestion.",
    "Show empathy when the user describes a difficult situation.",
    "Challenge false premises politely before answering.",
    "Match the length of the answer to the complexity of the question.",
    "Respect cultural differences and avoid generalizations.",
    "Never claim to have taken physical actions or browsed the web.",
};

std::string transition_prompt_reply(const MockCall& call)
{
  const auto current = meta_text(call.meta, "current");
  const auto salt = current + "|" + call.meta.value("sample", nlohmann::json(0)).dump() + "|" +
                    call.meta.value("depth", nlohmann::json(0)).dump();
  const auto seed = digest64("prompt|" + salt);

  std::vector<std::string> head;
  std::vector<std::string> bullets;
  std::istringstream lines(current);
  for (std::string line; std::getline(lines, line);) {
    (line.rfind("- ", 0) == 0 ? bullets : head).push_back(line);
  }
  std::string tip;
  for (std::size_t i = 0; i < kPromptTips.size(); ++i) {
    tip = "- " + std::string(kPromptTips[(seed + i) % kPromptTips.size()]);
    if (std::find(bullets.begin(), bullets.end(), tip) == bullets.end()) {
      break;
    }
  }
  if (bullets.size() < 8) {
    bullets.push_back(tip);
  } else {
    bullets[(seed / 16) % bullets.size()] = tip;
  }
  std::string prompt;
  for (const auto& line : head) {
    prompt += line + "\n";
  }
  for (const auto& line : bullets) {
    prompt += line + "\n";
  }
  prompt.pop_back();

  const nlohmann::json reply = {{"analysis", "Mock analysis " + short_hex(salt) + "."},
                                {"thought", "Add one focused guideline."},
                                {"new_system_prompt", prompt}};
  return render_fenced(reply);
}

constexpr std::array<std::string_view, 8> kResponseAdditions{
    "I hope this helps; let me know if you would like more detail.",
    "As a caveat, details can vary, so double-check anything critical.",
    "For example, start with the simplest case and build from there.",
    "In short, the key point is to stay practical and safe.",
    "If you share more context, I can tailor this further.",
    "Keep in mind that I cannot access real-time information.",
    "Many people find it useful to take this one step at a time.",
    "Please avoid any approach that could put you or others at risk.",
};

std::string transition_icl_reply(const MockCall& call)
{
  const auto current = meta_text(call.meta, "current");
  const auto salt = current + "|" + call.meta.value("sample", nlohmann::json(0)).dump();
  const auto seed = digest64("icl|" + salt);
  const nlohmann::json reply = {
      {"analysis", "Mock analysis " + short_hex(salt) + "."},
      {"thought", "Extend the answer slightly."},
      {"new_response", current + " " + std::string(kResponseAdditions[seed % kResponseAdditions.size()])}};
  return render_fenced(reply);
}

std::string generation_reply(const MockCall& call)
{
  nlohmann::json material = to_json(call.messages);
  const auto digest = short_hex(material.dump());
  auto query = meta_text(call.meta, "query");
  if (query.empty()) {
    query = call.last_user();
  }
  if (query.size() > 60) {
    query = query.substr(0, 60) + "...";
  }
  return "Mock answer " + digest + " to: " + query;
}

} // namespace

const std::string& MockCall::last_user() const
{
  static const std::string empty;
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->speaker == Speaker::user) {
      return it->text;
    }
  }
  return empty;
}

void MockBackend::script(std::string prompt, std::string reply)
{
  std::lock_guard lock(mutex_);
  table_[std::move(prompt)] = std::move(reply);
}

void MockBackend::add_rule(MockRule rule)
{
  std::lock_guard lock(mutex_);
  rules_.push_back(std::move(rule));
}

void MockBackend::enable_default_rule(bool enabled)
{
  std::lock_guard lock(mutex_);
  default_enabled_ = enabled;
}

std::string MockBackend::complete(const BackendCall& call)
{
  const MockCall view{call.profile.role, call.stage, call.messages, call.meta, call.profile};
  std::vector<MockRule> rules;
  bool use_default = false;
  {
    std::lock_guard lock(mutex_);
    recorded_.push_back({call.profile.role, call.stage, call.messages});
    if (auto it = table_.find(view.last_user()); it != table_.end()) {
      return it->second;
    }
    rules = rules_;
    use_default = default_enabled_;
  }
  for (const auto& rule : rules) {
    if (auto reply = rule(view)) {
      return *reply;
    }
  }
  if (!use_default) {
    throw std::runtime_error("mock backend has no reply for this request");
  }
  return default_reply(view);
}

std::uint64_t MockBackend::calls() const
{
  std::lock_guard lock(mutex_);
  return recorded_.size();
}

std::vector<RecordedCall> MockBackend::recorded() const
{
  std::lock_guard lock(mutex_);
  return recorded_;
}

std::string MockBackend::default_reply(const MockCall& call)
{
  switch (call.stage) {
  case Stage::reward_selection:
    return select_reply(call);
  case Stage::evaluation:
  case Stage::root_evaluation:
  case Stage::judge:
    return evaluate_reply(call);
  case Stage::transition:
    return call.meta.value("kind", "") == "icl" ? transition_icl_reply(call)
                                                : transition_prompt_reply(call);
  case Stage::generation:
  case Stage::root_generation:
  case Stage::inference:
  case Stage::other:
    return generation_reply(call);
  }
  return generation_reply(call);
}

} // namespace drpo::llm
