#include "support.hpp"

#include "drpo/errors.hpp"
#include "drpo/templates.hpp"
#include "drpo/util/files.hpp"

#include <gtest/gtest.h>

using namespace drpo;

namespace {

std::map<std::string, std::string> values_for(TemplateKind kind)
{
  std::map<std::string, std::string> values;
  for (const auto& name : required_placeholders(kind)) {
    values[name] = "<" + name + " value>";
  }
  return values;
}

} // namespace

TEST(Templates, BuiltinsMatchShippedAssets)
{
  const TemplateSet set;
  for (const auto kind : {TemplateKind::reward_selection, TemplateKind::rewarding,
                          TemplateKind::prompt_transition, TemplateKind::icl_transition}) {
    const auto file = drpo::testing::template_dir() / (std::string(template_name(kind)) + ".txt");
    EXPECT_EQ(set.text(kind), util::read_file(file)) << template_name(kind);
  }
}

TEST(Templates, AnchorStringsAreVerbatim)
{
  const TemplateSet set;
  EXPECT_NE(set.text(TemplateKind::rewarding).find("act as an impartial judge"), std::string::npos);
  EXPECT_NE(set.text(TemplateKind::reward_selection).find("at least 2 and at most 5 aspects"),
            std::string::npos);
  const auto& transition = set.text(TemplateKind::prompt_transition);
  EXPECT_NE(transition.find("do NOT add more than 2 bullet points at once"), std::string::npos);
  EXPECT_NE(transition.find("Do NOT make more than 8 bullet points"), std::string::npos);
}

TEST(Templates, RenderingLeavesNoPlaceholder)
{
  const TemplateSet set;
  for (const auto kind : {TemplateKind::reward_selection, TemplateKind::rewarding,
                          TemplateKind::prompt_transition, TemplateKind::icl_transition}) {
    const auto text = set.render(kind, values_for(kind));
    EXPECT_TRUE(find_placeholders(text).empty()) << template_name(kind);
  }
}

TEST(Templates, SubstitutedValuesAreNotRescanned)
{
  EXPECT_EQ(render_template("[A] and [B]", {{"A", "[B]"}, {"B", "b"}}), "[B] and b");
}

TEST(Templates, MissingOrUnknownValuesThrow)
{
  EXPECT_THROW(render_template("[A] [B]", {{"A", "a"}}), TemplateError);
  EXPECT_THROW(render_template("[A]", {{"A", "a"}, {"C", "c"}}), TemplateError);
}

TEST(Templates, LowercaseBracketsAreNotPlaceholders)
{
  EXPECT_EQ(find_placeholders("[your score] [QUERY] [] [X1_Y]"), (std::set<std::string>{"QUERY", "X1_Y"}));
}

TEST(Templates, OverrideDirectoryReplacesASubset)
{
  const auto dir = drpo::testing::scratch_dir("template-override");
  util::write_file_atomic(dir / "reward_selection.txt", "Pick aspects for [QUERY].");
  const TemplateSet set(dir);
  EXPECT_EQ(set.render(TemplateKind::reward_selection, {{"QUERY", "q"}}), "Pick aspects for q.");
  EXPECT_EQ(set.text(TemplateKind::rewarding), TemplateSet().text(TemplateKind::rewarding));
}

TEST(Templates, OverrideMissingAPlaceholderIsRejected)
{
  const auto dir = drpo::testing::scratch_dir("template-bad-override");
  util::write_file_atomic(dir / "rewarding.txt", "Judge [QUERY] and [OUTPUT].");
  EXPECT_THROW(TemplateSet{dir}, TemplateError);
}

TEST(Templates, WriteToSnapshotsAllFour)
{
  const auto dir = drpo::testing::scratch_dir("template-snapshot");
  const TemplateSet set;
  set.write_to(dir);
  const TemplateSet reloaded(dir);
  EXPECT_EQ(reloaded.text(TemplateKind::prompt_transition), set.text(TemplateKind::prompt_transition));
  EXPECT_EQ(std::distance(std::filesystem::directory_iterator(dir), {}), 4);
}
