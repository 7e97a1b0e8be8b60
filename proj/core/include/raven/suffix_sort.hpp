#pragma once

#include <cstdint>
#include <span>

namespace raven {

// Suffix array construction by induced sorting (SA-IS), linear time.
//
// `text` must end with a symbol that is strictly smaller than every other
// symbol in the text, and all symbols must be < `alphabet_size`.
// `sa` receives text.size() entries. Text length must be < 2^32 - 1.
void suffix_sort(std::span<const std::uint32_t> text, std::span<std::uint32_t> sa,
                 std::uint32_t alphabet_size);

}  // namespace raven
