#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ensfuzz {

using FuzzerId = std::string;
using UnitId = std::size_t;
using EdgeId = std::uint64_t;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input text that does not follow one of the documented file formats.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Fixed-size 128-bit digest. The tag keeps path, crash and seed ids apart.
template <typename Tag>
struct Id128 {
  std::array<std::uint8_t, 16> bytes{};

  auto operator<=>(const Id128&) const = default;

  std::string hex() const {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(32);
    for (auto b : bytes) {
      out.push_back(kDigits[b >> 4]);
      out.push_back(kDigits[b & 0xf]);
    }
    return out;
  }

  static Id128 from_hex(std::string_view text) {
    if (text.size() != 32) throw ParseError(0, "digest must be 32 hex digits: " + std::string(text));
    Id128 id;
    auto nibble = [&](char c) -> std::uint8_t {
      if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
      if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
      if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
      throw ParseError(0, "bad hex digit in digest: " + std::string(text));
    };
    for (std::size_t i = 0; i < 16; ++i) {
      id.bytes[i] = static_cast<std::uint8_t>((nibble(text[2 * i]) << 4) | nibble(text[2 * i + 1]));
    }
    return id;
  }
};

/// BLAKE2b with a 16-byte digest, unkeyed (libsodium crypto_generichash).
std::array<std::uint8_t, 16> blake2b_128(std::span<const std::uint8_t> data);

inline std::array<std::uint8_t, 16> blake2b_128(std::string_view data) {
  return blake2b_128(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

using Rng = std::mt19937_64;

/// Uniform double in [0,1) from the top 53 bits of one engine output.
/// Spelled out so that draws are identical across standard libraries.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Mixes several integers into one 64-bit seed (splitmix64 finaliser chain).
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts);

}  // namespace ensfuzz
