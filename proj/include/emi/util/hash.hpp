#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace emi::hash {

[[nodiscard]] std::string sha256_hex(std::string_view data);
[[nodiscard]] std::string sha256_file(const std::filesystem::path& path);

/// SplitMix64 finalizer; a bijective 64-bit mixer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// FNV-1a over bytes; stable across platforms.
[[nodiscard]] constexpr std::uint64_t fnv1a64(std::string_view data) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Seed for one unit of parallel work, a pure function of
/// (master seed, group key, iteration index). Serial and parallel runs that
/// use it draw identical streams.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view key,
                                                  std::uint64_t index) noexcept {
  return mix64(mix64(master ^ fnv1a64(key)) + index);
}

}  // namespace emi::hash
