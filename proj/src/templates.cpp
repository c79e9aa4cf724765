#include "drpo/templates.hpp"

#include "drpo/errors.hpp"
#include "drpo/util/files.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace drpo {
namespace {

constexpr TemplateKind kKinds[] = {TemplateKind::reward_selection, TemplateKind::rewarding,
                                   TemplateKind::prompt_transition, TemplateKind::icl_transition};

// Length of a "[UPPER_SNAKE]" token starting at `pos`, or 0.
std::size_t token_length(std::string_view text, std::size_t pos)
{
  if (text[pos] != '[') {
    return 0;
  }
  std::size_t end = pos + 1;
  if (end >= text.size() || !std::isupper(static_cast<unsigned char>(text[end]))) {
    return 0;
  }
  while (end < text.size() &&
         (std::isupper(static_cast<unsigned char>(text[end])) || text[end] == '_' ||
          std::isdigit(static_cast<unsigned char>(text[end])))) {
    ++end;
  }
  if (end >= text.size() || text[end] != ']') {
    return 0;
  }
  return end - pos + 1;
}

std::string read_text(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw TemplateError("cannot read template " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void check_placeholders(TemplateKind kind, const std::string& text, const std::string& origin)
{
  const auto found = find_placeholders(text);
  for (const auto& name : required_placeholders(kind)) {
    if (!found.contains(name)) {
      throw TemplateError("template " + origin + " lacks placeholder [" + name + "]");
    }
  }
}

} // namespace

std::string_view template_name(TemplateKind kind)
{
  switch (kind) {
  case TemplateKind::reward_selection: return "reward_selection";
  case TemplateKind::rewarding: return "rewarding";
  case TemplateKind::prompt_transition: return "prompt_transition";
  case TemplateKind::icl_transition: return "icl_transition";
  }
  return "unknown";
}

const std::set<std::string>& required_placeholders(TemplateKind kind)
{
  static const std::map<TemplateKind, std::set<std::string>> table{
      {TemplateKind::reward_selection, {"QUERY"}},
      {TemplateKind::rewarding, {"QUERY", "OUTPUT", "ASPECT_LIST", "ASPECT_REASON", "EVAL_DICT"}},
      {TemplateKind::prompt_transition,
       {"CURRENT_SYSTEM_PROMPT", "QUERY", "OUTPUT", "OUTPUT_EVALUATION", "FORMER_SYSTEM_PROMPTS"}},
      {TemplateKind::icl_transition,
       {"QUERY", "CURRENT_RESPONSE", "RESPONSE_EVALUATION", "FORMER_RESPONSES"}},
  };
  return table.at(kind);
}

std::set<std::string> find_placeholders(std::string_view text)
{
  std::set<std::string> names;
  for (std::size_t pos = 0; pos < text.size(); ++pos) {
    if (const auto length = token_length(text, pos); length > 0) {
      names.emplace(text.substr(pos + 1, length - 2));
      pos += length - 1;
    }
  }
  return names;
}

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values)
{
  std::set<std::string> used;
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto length = token_length(tmpl, pos);
    if (length == 0) {
      out.push_back(tmpl[pos++]);
      continue;
    }
    const std::string name(tmpl.substr(pos + 1, length - 2));
    const auto it = values.find(name);
    if (it == values.end()) {
      throw TemplateError("no value for placeholder [" + name + "]");
    }
    out += it->second;
    used.insert(name);
    pos += length;
  }
  for (const auto& [name, value] : values) {
    if (!used.contains(name)) {
      throw TemplateError("value given for unknown placeholder [" + name + "]");
    }
  }
  return out;
}

TemplateSet::TemplateSet()
{
  const auto& builtin = detail::builtin_templates();
  for (auto kind : kKinds) {
    texts_[kind] = builtin.at(std::string(template_name(kind)));
  }
}

TemplateSet::TemplateSet(const std::filesystem::path& override_dir) : TemplateSet()
{
  if (!std::filesystem::is_directory(override_dir)) {
    throw TemplateError("templates directory not found: " + override_dir.string());
  }
  for (auto kind : kKinds) {
    const auto path = override_dir / (std::string(template_name(kind)) + ".txt");
    if (std::filesystem::exists(path)) {
      auto text = read_text(path);
      check_placeholders(kind, text, path.string());
      texts_[kind] = std::move(text);
    }
  }
}

const std::string& TemplateSet::text(TemplateKind kind) const
{
  return texts_.at(kind);
}

std::string TemplateSet::render(TemplateKind kind, const std::map<std::string, std::string>& values) const
{
  return render_template(text(kind), values);
}

void TemplateSet::write_to(const std::filesystem::path& dir) const
{
  std::filesystem::create_directories(dir);
  for (const auto& [kind, text] : texts_) {
    util::write_file_atomic(dir / (std::string(template_name(kind)) + ".txt"), text);
  }
}

} // namespace drpo
