#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace emi {

/// Content-addressed file cache. Keys are hashed to file names; writes are
/// atomic and the first stored value for a key wins. Safe for concurrent
/// writers within and across processes. A default-constructed cache is
/// disabled (every lookup misses, stores are dropped).
class DiskCache {
 public:
  DiskCache() = default;
  explicit DiskCache(std::filesystem::path dir);

  [[nodiscard]] bool enabled() const noexcept { return !dir_.empty(); }
  [[nodiscard]] std::optional<std::string> get(std::string_view key) const;
  void put(std::string_view key, std::string_view value) const;

 private:
  [[nodiscard]] std::filesystem::path path_for(std::string_view key) const;
  std::filesystem::path dir_;
};

}  // namespace emi
