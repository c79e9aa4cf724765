#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace drpo::util {

// Writes to "<path>.tmp" and renames over `path`, so readers never observe a
// partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

// UTC "YYYY-MM-DDTHH:MM:SSZ" for the given seconds since the epoch.
std::string format_utc(long long epoch_seconds);

// Current UTC time; SOURCE_DATE_EPOCH wins when set, which makes runs
// reproducible byte for byte.
std::string utc_now();
long long epoch_now();

} // namespace drpo::util
