#pragma once

#include <string>
#include <string_view>

namespace faitheval {

/// SHA-256 hex digest (lowercase) of the given bytes.
std::string sha256_hex(std::string_view data);

}  // namespace faitheval
