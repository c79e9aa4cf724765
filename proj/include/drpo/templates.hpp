#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>

namespace drpo {

enum class TemplateKind { reward_selection, rewarding, prompt_transition, icl_transition };

std::string_view template_name(TemplateKind kind);

// Placeholders every template of `kind` must contain.
const std::set<std::string>& required_placeholders(TemplateKind kind);

// Upper-case bracket tokens such as "[QUERY]" found in `text`, without brackets.
std::set<std::string> find_placeholders(std::string_view text);

// Substitutes every "[NAME]" token of `tmpl` in a single left-to-right pass;
// substituted values are never rescanned. Throws TemplateError when a
// placeholder has no value or a value names no placeholder.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

// The four meta-prompts used by a run. Starts from the built-in copies;
// `override_dir` may replace any subset with "<name>.txt" files.
class TemplateSet {
public:
  TemplateSet();
  explicit TemplateSet(const std::filesystem::path& override_dir);

  const std::string& text(TemplateKind kind) const;
  std::string render(TemplateKind kind, const std::map<std::string, std::string>& values) const;

  // Writes all four templates into `dir` (used for run snapshots).
  void write_to(const std::filesystem::path& dir) const;

private:
  std::map<TemplateKind, std::string> texts_;
};

namespace detail {
const std::map<std::string, std::string, std::less<>>& builtin_templates();
}

} // namespace drpo
