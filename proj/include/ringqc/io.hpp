#pragma once

#include <filesystem>
#include <string>

namespace ringqc::io {

/// Shortest representation that round-trips the double exactly.
std::string format_double(double value);

/// Write atomically: temp file in the same directory, then rename.
void atomic_write(const std::filesystem::path& path,
                  const std::string& content);

std::string read_file(const std::filesystem::path& path);

} // namespace ringqc::io
