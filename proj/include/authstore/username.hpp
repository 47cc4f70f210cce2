#pragma once

#include <string>
#include <string_view>

namespace authstore {

/// Lowercases ASCII and enforces 1..64 bytes with no control characters.
/// Throws Error(InvalidUsername).
std::string canonicalize_username(std::string_view raw);

} // namespace authstore
