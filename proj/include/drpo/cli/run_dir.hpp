#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

namespace drpo::cli {

// runs/<timestamp>-<config hash>/ with traces/ inside. A numeric suffix is
// added when the directory already exists.
class RunDir {
public:
  static RunDir create(const std::filesystem::path& root, const std::string& config_hash);
  explicit RunDir(std::filesystem::path path) : path_(std::move(path)) {}

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path traces() const { return path_ / "traces"; }

  // Atomic writes relative to the run directory.
  void write_text(const std::filesystem::path& relative, const std::string& text) const;
  void write_json(const std::filesystem::path& relative, const nlohmann::json& value) const;

private:
  std::filesystem::path path_;
};

} // namespace drpo::cli
