#pragma once

#include <array>
#include <string_view>

namespace fixtures {

struct Named {
  std::string_view name;
  std::string_view text;
  int n;
};

inline constexpr std::array<Named, 7> kCertificationFormulas{{
    {"leaf", "x1", 1},
    {"and2", "x1 & x2", 2},
    {"or2", "x1 | x2", 2},
    {"and_of_ors", "(x1 | x2) & (x3 | x4)", 4},
    {"or_of_three_and3", "(x1 & x2 & x3) | (x4 & x5 & x6) | (x7 & x8 & x9)", 9},
    {"balanced_depth3", "((x1 & x2) | (x3 & x4)) & ((x5 & x6) | (x7 & x8))", 8},
    {"and_or3", "x1 & (x2 | x3 | x4)", 4},
}};

}  // namespace fixtures
