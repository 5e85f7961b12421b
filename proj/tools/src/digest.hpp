#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace ecc::cli {

/// Lowercase hex SHA-256 of a file's bytes. Error(io) if unreadable.
std::string sha256_file(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);

}  // namespace ecc::cli
