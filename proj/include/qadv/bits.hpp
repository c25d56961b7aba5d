#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

namespace qadv {

/// An input bit string x_1..x_n packed into an integer. Variable 1 is the
/// most significant of the n bits, so integer order equals the lexicographic
/// order of the written string.
using Mask = std::uint64_t;

inline constexpr int kMaxVariables = 64;

constexpr Mask var_bit(int var, int n) { return Mask{1} << (n - var); }

constexpr bool bit_of(Mask x, int var, int n) { return (x >> (n - var)) & Mask{1}; }

constexpr int hamming(Mask a, Mask b) { return std::popcount(a ^ b); }

/// 1-based index of the single variable on which a and b differ, 0 otherwise.
constexpr int flipped_variable(Mask a, Mask b, int n) {
  const Mask d = a ^ b;
  if (std::popcount(d) != 1) return 0;
  return n - std::countr_zero(d);
}

std::string to_bitstring(Mask x, int n);

/// Parses a string of '0'/'1' characters. Throws SyntaxError on other
/// characters or on length above kMaxVariables.
Mask parse_bitstring(std::string_view text);

}  // namespace qadv
