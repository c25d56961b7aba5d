#include "qadv/bits.hpp"

#include "qadv/errors.hpp"

namespace qadv {

std::string to_bitstring(Mask x, int n) {
  std::string out(static_cast<std::size_t>(n), '0');
  for (int v = 1; v <= n; ++v) {
    if (bit_of(x, v, n)) out[static_cast<std::size_t>(v - 1)] = '1';
  }
  return out;
}

Mask parse_bitstring(std::string_view text) {
  if (text.empty() || text.size() > kMaxVariables) {
    throw SyntaxError("bit string must have 1.." + std::to_string(kMaxVariables) +
                      " characters: '" + std::string(text) + "'");
  }
  Mask x = 0;
  for (char c : text) {
    if (c != '0' && c != '1') {
      throw SyntaxError("invalid character in bit string '" + std::string(text) + "'");
    }
    x = (x << 1) | static_cast<Mask>(c == '1');
  }
  return x;
}

}  // namespace qadv
