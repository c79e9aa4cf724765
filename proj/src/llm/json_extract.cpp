#include "drpo/llm/json_extract.hpp"

#include "drpo/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <sstream>
#include <vector>

namespace drpo::llm {
namespace {

std::string_view trim(std::string_view text)
{
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

// Body of the first ``` fence, without the language tag line.
std::optional<std::string_view> first_fence(std::string_view text)
{
  const auto open = text.find("```");
  if (open == std::string_view::npos) {
    return std::nullopt;
  }
  auto body_start = open + 3;
  const auto line_end = text.find('\n', body_start);
  if (line_end != std::string_view::npos) {
    const auto tag = trim(text.substr(body_start, line_end - body_start));
    const bool is_tag = std::all_of(tag.begin(), tag.end(), [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
    });
    if (is_tag) {
      body_start = line_end + 1;
    }
  }
  const auto close = text.find("```", body_start);
  if (close == std::string_view::npos) {
    return text.substr(body_start);
  }
  return text.substr(body_start, close - body_start);
}

// All balanced {...} spans, longest first (earlier start on ties).
std::vector<std::string_view> balanced_spans(std::string_view text)
{
  std::vector<std::string_view> spans;
  for (std::size_t start = 0; start < text.size(); ++start) {
    if (text[start] != '{') {
      continue;
    }
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) {
          spans.push_back(text.substr(start, i - start + 1));
          break;
        }
      }
    }
  }
  std::stable_sort(spans.begin(), spans.end(),
                   [](std::string_view a, std::string_view b) { return a.size() > b.size(); });
  return spans;
}

// Escapes raw control characters that appear inside string literals.
std::string escape_controls(std::string_view text)
{
  std::string out;
  out.reserve(text.size());
  bool in_string = false;
  bool escaped = false;
  for (char c : text) {
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      } else if (c == '\n') {
        out += "\\n";
        continue;
      } else if (c == '\r') {
        out += "\\r";
        continue;
      } else if (c == '\t') {
        out += "\\t";
        continue;
      }
    } else if (c == '"') {
      in_string = true;
    }
    out.push_back(c);
  }
  return out;
}

std::optional<nlohmann::json> number_from_string(std::string_view text)
{
  text = trim(text);
  if (text.empty()) {
    return std::nullopt;
  }
  if (text.front() == '+') {
    text.remove_prefix(1);
  }
  const char* first = text.data();
  const char* last = text.data() + text.size();
  long long integer = 0;
  if (auto [ptr, ec] = std::from_chars(first, last, integer); ec == std::errc() && ptr == last) {
    return nlohmann::json(integer);
  }
  double real = 0.0;
  if (auto [ptr, ec] = std::from_chars(first, last, real, std::chars_format::fixed);
      ec == std::errc() && ptr == last) {
    return nlohmann::json(real);
  }
  return std::nullopt;
}

void coerce_numbers(nlohmann::json& value)
{
  if (value.is_string()) {
    if (auto number = number_from_string(value.get_ref<const std::string&>())) {
      value = *number;
    }
  } else if (value.is_structured()) {
    for (auto& item : value) {
      coerce_numbers(item);
    }
  }
}

std::optional<nlohmann::json> try_parse(std::string_view candidate)
{
  auto parsed = nlohmann::json::parse(candidate, nullptr, false);
  if (parsed.is_discarded()) {
    parsed = nlohmann::json::parse(escape_controls(candidate), nullptr, false);
  }
  if (parsed.is_discarded()) {
    return std::nullopt;
  }
  return parsed;
}

} // namespace

nlohmann::json extract_json(std::string_view text)
{
  std::vector<std::string_view> candidates;
  if (auto fence = first_fence(text)) {
    candidates.push_back(trim(*fence));
    for (auto span : balanced_spans(*fence)) {
      candidates.push_back(span);
    }
  }
  for (auto span : balanced_spans(text)) {
    candidates.push_back(span);
  }
  for (auto candidate : candidates) {
    if (candidate.empty()) {
      continue;
    }
    if (auto parsed = try_parse(candidate)) {
      coerce_numbers(*parsed);
      return *parsed;
    }
  }
  throw ExtractionError("no parseable JSON in model reply", std::string(text));
}

std::string render_fenced(const nlohmann::json& value)
{
  return "```json\n" + value.dump(4) + "\n```";
}

std::string text_field(const nlohmann::json& object, std::string_view key)
{
  if (!object.is_object()) {
    return {};
  }
  const auto it = object.find(key);
  if (it == object.end() || it->is_null()) {
    return {};
  }
  if (it->is_string()) {
    return it->get<std::string>();
  }
  return it->dump();
}

} // namespace drpo::llm
