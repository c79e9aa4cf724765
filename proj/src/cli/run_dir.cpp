#include "drpo/cli/run_dir.hpp"

#include "drpo/errors.hpp"
#include "drpo/util/files.hpp"

#include <algorithm>

namespace drpo::cli {

RunDir RunDir::create(const std::filesystem::path& root, const std::string& config_hash)
{
  auto stamp = util::utc_now();
  stamp.erase(std::remove_if(stamp.begin(), stamp.end(), [](char c) { return c == '-' || c == ':'; }),
              stamp.end());
  const std::string base = stamp + "-" + config_hash;
  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  if (ec) {
    throw ConfigError("cannot create " + root.string() + ": " + ec.message());
  }
  for (int suffix = 0;; ++suffix) {
    const auto path = root / (suffix == 0 ? base : base + "-" + std::to_string(suffix));
    if (std::filesystem::create_directory(path, ec)) {
      std::filesystem::create_directories(path / "traces");
      return RunDir(path);
    }
    if (ec) {
      throw ConfigError("cannot create " + path.string() + ": " + ec.message());
    }
  }
}

void RunDir::write_text(const std::filesystem::path& relative, const std::string& text) const
{
  util::write_file_atomic(path_ / relative, text);
}

void RunDir::write_json(const std::filesystem::path& relative, const nlohmann::json& value) const
{
  write_text(relative, value.dump(2) + "\n");
}

} // namespace drpo::cli
