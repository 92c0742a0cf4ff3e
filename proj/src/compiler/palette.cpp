#include <array>
#include <cctype>
#include <string_view>

#include "pscript/compiler.hpp"

namespace pscript {
namespace {

struct NamedColor {
  std::string_view name;
  uint32_t rgb;
};

// The reference engine's default ("arnecolors") palette.
constexpr std::array<NamedColor, 24> kNamed = {{
    {"black", 0x000000},     {"white", 0xffffff},      {"grey", 0x9d9d9d},
    {"gray", 0x9d9d9d},      {"darkgrey", 0x697175},   {"darkgray", 0x697175},
    {"lightgrey", 0xcccccc}, {"lightgray", 0xcccccc},  {"red", 0xbe2633},
    {"darkred", 0x732930},   {"lightred", 0xe06f8b},   {"brown", 0xa46422},
    {"darkbrown", 0x493c2b}, {"lightbrown", 0xeeb62f}, {"orange", 0xeb8931},
    {"yellow", 0xf7e26b},    {"green", 0x44891a},      {"darkgreen", 0x2f484e},
    {"lightgreen", 0xa3ce27}, {"blue", 0x1d57f7},      {"lightblue", 0xb2dcef},
    {"darkblue", 0x1b2632},  {"purple", 0x342a97},     {"pink", 0xde65e2},
}};

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

}  // namespace

std::optional<Rgb> parse_color(std::string_view name) {
  if (name.empty()) return std::nullopt;
  if (name == "transparent") return Rgb{0, 0, 0, true};
  for (const NamedColor& nc : kNamed) {
    if (nc.name == name) {
      return Rgb{static_cast<uint8_t>(nc.rgb >> 16), static_cast<uint8_t>(nc.rgb >> 8),
                 static_cast<uint8_t>(nc.rgb), false};
    }
  }
  if (name[0] != '#') return std::nullopt;
  std::string_view hex = name.substr(1);
  if (hex.size() != 3 && hex.size() != 6) return std::nullopt;
  std::array<int, 6> d{};
  for (std::size_t i = 0; i < hex.size(); ++i) {
    d[i] = hex_digit(hex[i]);
    if (d[i] < 0) return std::nullopt;
  }
  if (hex.size() == 3) {
    return Rgb{static_cast<uint8_t>(d[0] * 17), static_cast<uint8_t>(d[1] * 17),
               static_cast<uint8_t>(d[2] * 17), false};
  }
  return Rgb{static_cast<uint8_t>(d[0] * 16 + d[1]), static_cast<uint8_t>(d[2] * 16 + d[3]),
             static_cast<uint8_t>(d[4] * 16 + d[5]), false};
}

}  // namespace pscript
