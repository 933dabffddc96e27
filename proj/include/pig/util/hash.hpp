#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace pig {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t seed = kFnvOffset);
std::uint64_t fnv1a64(std::string_view text, std::uint64_t seed = kFnvOffset);

std::string hex64(std::uint64_t value);

} // namespace pig
