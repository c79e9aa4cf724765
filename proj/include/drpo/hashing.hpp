#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace drpo {

// Lower-case hex SHA-256 of the bytes in `data`.
std::string sha256_hex(std::string_view data);

// First 8 bytes of the SHA-256 digest, big-endian. Used wherever a stable
// pseudo-random number has to be derived from content.
std::uint64_t digest64(std::string_view data);

} // namespace drpo
