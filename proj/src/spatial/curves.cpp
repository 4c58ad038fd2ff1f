#include "linext/spatial/curves.hpp"

#include "linext/core/error.hpp"

namespace linext::spatial {

namespace {

void check_bits(unsigned bits) {
  if (bits == 0 || bits > 21) throw ValidationError("curve bits must lie in [1, 21]");
}

void check_cell(CellCoord cell, unsigned bits) {
  check_bits(bits);
  const std::uint64_t side = std::uint64_t{1} << bits;
  for (auto c : cell) {
    if (c >= side) throw ValidationError("cell coordinate out of range for " + std::to_string(bits) + " bits");
  }
}

void check_code(std::uint64_t code, unsigned bits) {
  check_bits(bits);
  if (code >> (3 * bits) != 0) throw ValidationError("curve code out of range");
}

// Spreads the low 21 bits of x so bit t moves to bit 3t.
std::uint64_t spread3(std::uint64_t x) {
  x &= 0x1fffff;
  x = (x | x << 32) & 0x1f00000000ffffULL;
  x = (x | x << 16) & 0x1f0000ff0000ffULL;
  x = (x | x << 8) & 0x100f00f00f00f00fULL;
  x = (x | x << 4) & 0x10c30c30c30c30c3ULL;
  x = (x | x << 2) & 0x1249249249249249ULL;
  return x;
}

std::uint32_t compact3(std::uint64_t x) {
  x &= 0x1249249249249249ULL;
  x = (x ^ (x >> 2)) & 0x10c30c30c30c30c3ULL;
  x = (x ^ (x >> 4)) & 0x100f00f00f00f00fULL;
  x = (x ^ (x >> 8)) & 0x1f0000ff0000ffULL;
  x = (x ^ (x >> 16)) & 0x1f00000000ffffULL;
  x = (x ^ (x >> 32)) & 0x1fffff;
  return static_cast<std::uint32_t>(x);
}

}  // namespace

std::uint64_t morton_encode(CellCoord cell, unsigned bits) {
  check_cell(cell, bits);
  return spread3(cell[0]) | spread3(cell[1]) << 1 | spread3(cell[2]) << 2;
}

CellCoord morton_decode(std::uint64_t code, unsigned bits) {
  check_code(code, bits);
  return {compact3(code), compact3(code >> 1), compact3(code >> 2)};
}

std::uint64_t hilbert_encode(CellCoord cell, unsigned bits) {
  check_cell(cell, bits);
  std::uint32_t x[3] = {cell[0], cell[1], cell[2]};
  const std::uint32_t top = 1u << (bits - 1);
  // Inverse undo of the per-level rotations and reflections.
  for (std::uint32_t q = top; q > 1; q >>= 1) {
    const std::uint32_t p = q - 1;
    for (int i = 0; i < 3; ++i) {
      if (x[i] & q) {
        x[0] ^= p;
      } else {
        const std::uint32_t t = (x[0] ^ x[i]) & p;
        x[0] ^= t;
        x[i] ^= t;
      }
    }
  }
  // Gray encode.
  x[1] ^= x[0];
  x[2] ^= x[1];
  std::uint32_t t = 0;
  for (std::uint32_t q = top; q > 1; q >>= 1) {
    if (x[2] & q) t ^= q - 1;
  }
  for (auto& v : x) v ^= t;
  // Transposed form -> code, x[0] most significant within each level.
  std::uint64_t code = 0;
  for (int level = static_cast<int>(bits) - 1; level >= 0; --level) {
    for (int i = 0; i < 3; ++i) code = (code << 1) | ((x[i] >> level) & 1u);
  }
  return code;
}

CellCoord hilbert_decode(std::uint64_t code, unsigned bits) {
  check_code(code, bits);
  std::uint32_t x[3] = {0, 0, 0};
  for (int level = static_cast<int>(bits) - 1; level >= 0; --level) {
    for (int i = 0; i < 3; ++i) {
      const unsigned shift = static_cast<unsigned>(3 * level + (2 - i));
      x[i] |= static_cast<std::uint32_t>((code >> shift) & 1u) << level;
    }
  }
  const std::uint32_t side = 1u << bits;
  // Gray decode.
  std::uint32_t t = x[2] >> 1;
  x[2] ^= x[1];
  x[1] ^= x[0];
  x[0] ^= t;
  // Undo excess work.
  for (std::uint32_t q = 2; q != side; q <<= 1) {
    const std::uint32_t p = q - 1;
    for (int i = 2; i >= 0; --i) {
      if (x[i] & q) {
        x[0] ^= p;
      } else {
        const std::uint32_t tt = (x[0] ^ x[i]) & p;
        x[0] ^= tt;
        x[i] ^= tt;
      }
    }
  }
  return {x[0], x[1], x[2]};
}

}  // namespace linext::spatial
