#include "ensfuzz/common.hpp"

#include <sodium.h>

namespace ensfuzz {

std::array<std::uint8_t, 16> blake2b_128(std::span<const std::uint8_t> data) {
  static const bool ready = sodium_init() >= 0;
  if (!ready) throw Error("libsodium failed to initialise");
  std::array<std::uint8_t, 16> out{};
  crypto_generichash(out.data(), out.size(), data.data(), data.size(), nullptr, 0);
  return out;
}

std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t state = 0x9e3779b97f4a7c15ULL;
  for (auto p : parts) {
    std::uint64_t z = state ^ (p + 0x9e3779b97f4a7c15ULL + (state << 6) + (state >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    state = z ^ (z >> 31);
  }
  return state;
}

}  // namespace ensfuzz
