#pragma once

#include "authstore/bytes.hpp"

#include <filesystem>

namespace authstore {

Bytes read_file(const std::filesystem::path& path); // throws Error(IoError)

/// Write via temp file in the same directory, then rename over the target.
void write_file_atomic(const std::filesystem::path& path, ByteView data);

} // namespace authstore
