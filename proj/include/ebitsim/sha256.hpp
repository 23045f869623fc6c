#pragma once

#include <cstdint>
#include <string>

namespace ebitsim {

/// Hex digest of a byte string (FIPS 180-4 SHA-256).
std::string sha256_hex(const std::string& data);

/// Hex digest of a file's contents; throws std::runtime_error if unreadable.
std::string file_sha256(const std::string& path);

} // namespace ebitsim
