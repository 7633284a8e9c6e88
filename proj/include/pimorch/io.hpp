#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace pimorch {

/// Whole-file read; throws ConfigError when the file cannot be opened.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

/// 64-bit FNV-1a, used for input content hashes in run manifests.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

}  // namespace pimorch
