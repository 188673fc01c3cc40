#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace itr {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;

/// 64-bit FNV-1a. `state` allows chaining multiple fields into one digest.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t state = kFnvOffset);

/// Lower-case 16-digit hex rendering of a 64-bit digest.
std::string hex64(std::uint64_t value);

}  // namespace itr
