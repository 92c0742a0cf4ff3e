#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <vector>

namespace pscript {

using ObjectId = int32_t;

inline constexpr int kMaxObjects = 512;
inline constexpr int kMaskWords = kMaxObjects / 64;
inline constexpr int kMaxLayers = 64;

// Fixed-capacity set of atomic object ids. Only the first `words` words are
// meaningful for a given game; the rest stay zero.
struct ObjectMask {
  std::array<uint64_t, kMaskWords> w{};

  void set(ObjectId id) { w[id >> 6] |= uint64_t{1} << (id & 63); }
  void reset(ObjectId id) { w[id >> 6] &= ~(uint64_t{1} << (id & 63)); }
  bool test(ObjectId id) const { return (w[id >> 6] >> (id & 63)) & 1; }

  bool empty() const {
    for (uint64_t x : w) {
      if (x) return false;
    }
    return true;
  }
  int count() const {
    int n = 0;
    for (uint64_t x : w) n += std::popcount(x);
    return n;
  }
  ObjectMask& operator|=(const ObjectMask& o) {
    for (int i = 0; i < kMaskWords; ++i) w[i] |= o.w[i];
    return *this;
  }
  ObjectMask& operator&=(const ObjectMask& o) {
    for (int i = 0; i < kMaskWords; ++i) w[i] &= o.w[i];
    return *this;
  }
  bool intersects(const ObjectMask& o) const {
    for (int i = 0; i < kMaskWords; ++i) {
      if (w[i] & o.w[i]) return true;
    }
    return false;
  }
  bool operator==(const ObjectMask&) const = default;

  std::vector<ObjectId> ids() const {
    std::vector<ObjectId> out;
    for (int i = 0; i < kMaskWords; ++i) {
      uint64_t x = w[i];
      while (x) {
        out.push_back(i * 64 + std::countr_zero(x));
        x &= x - 1;
      }
    }
    return out;
  }
  ObjectId first() const {
    for (int i = 0; i < kMaskWords; ++i) {
      if (w[i]) return i * 64 + std::countr_zero(w[i]);
    }
    return -1;
  }

  static ObjectMask of(std::initializer_list<ObjectId> ids) {
    ObjectMask m;
    for (ObjectId id : ids) m.set(id);
    return m;
  }
};

}  // namespace pscript
