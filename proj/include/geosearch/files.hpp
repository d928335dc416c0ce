#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace geosearch {

/// Whole file as bytes, or std::nullopt if it cannot be opened.
std::optional<std::string> read_file(const std::filesystem::path& path);

/// Writes `content` to a temp file next to `path`, then renames it over.
/// Creates missing parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view data);

}  // namespace geosearch
