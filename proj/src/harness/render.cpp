#include <stdexcept>

#include "pscript/harness.hpp"

namespace pscript {
namespace {

constexpr int kSpriteSize = 5;

Rgb background_fill(const GameDef& game) {
  if (game.prelude.background_color) {
    if (auto c = parse_color(*game.prelude.background_color); c && !c->transparent) return *c;
  }
  return Rgb{0, 0, 0, false};
}

void paint_pixel(FrameImage& img, int px, int py, int scale, const Rgb& c) {
  for (int dy = 0; dy < scale; ++dy) {
    uint8_t* row = img.rgb.data() + (static_cast<std::size_t>(py * scale + dy) * img.width + px * scale) * 3;
    for (int dx = 0; dx < scale; ++dx) {
      row[dx * 3] = c.r;
      row[dx * 3 + 1] = c.g;
      row[dx * 3 + 2] = c.b;
    }
  }
}

}  // namespace

FrameImage render_frame(const GameDef& game, const GridState& state, int scale) {
  if (scale <= 0) throw std::invalid_argument("scale must be positive");
  FrameImage img;
  img.width = state.width * kSpriteSize * scale;
  img.height = state.height * kSpriteSize * scale;
  img.rgb.assign(static_cast<std::size_t>(img.width) * img.height * 3, 0);

  const Rgb fill = background_fill(game);
  for (int y = 0; y < state.height; ++y) {
    for (int x = 0; x < state.width; ++x) {
      const int ci = y * state.width + x;
      for (int py = 0; py < kSpriteSize; ++py) {
        for (int px = 0; px < kSpriteSize; ++px) {
          paint_pixel(img, x * kSpriteSize + px, y * kSpriteSize + py, scale, fill);
        }
      }
      for (const auto& layer : game.layer_table.layers) {
        for (ObjectId id : layer) {
          if (!state.has(ci, id)) continue;
          const ObjectRecord& obj = game.object_table.objects[id];
          if (obj.colors.empty()) continue;
          for (int py = 0; py < kSpriteSize; ++py) {
            for (int px = 0; px < kSpriteSize; ++px) {
              int index = 0;
              if (obj.sprite) index = (*obj.sprite)[py][px];
              if (index < 0 || index >= static_cast<int>(obj.colors.size())) continue;
              const Rgb& c = obj.colors[index];
              if (c.transparent) continue;
              paint_pixel(img, x * kSpriteSize + px, y * kSpriteSize + py, scale, c);
            }
          }
        }
      }
    }
  }
  return img;
}

}  // namespace pscript
