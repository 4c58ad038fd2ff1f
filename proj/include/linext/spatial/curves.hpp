#pragma once

#include <array>
#include <cstdint>

namespace linext::spatial {

using CellCoord = std::array<std::uint32_t, 3>;

/// Z-order: bit t of (u, v, w) lands on code bits 3t, 3t+1, 3t+2.
/// Valid for 1 <= bits <= 21; throws ValidationError on out-of-range input.
std::uint64_t morton_encode(CellCoord cell, unsigned bits);
CellCoord morton_decode(std::uint64_t code, unsigned bits);

/// 3-D Hilbert order (Skilling's transpose form). Consecutive codes map to
/// cells one unit step apart along exactly one axis.
std::uint64_t hilbert_encode(CellCoord cell, unsigned bits);
CellCoord hilbert_decode(std::uint64_t code, unsigned bits);

}  // namespace linext::spatial
