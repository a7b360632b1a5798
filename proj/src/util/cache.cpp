#include "emi/util/cache.hpp"

#include <fstream>
#include <sstream>

#include "emi/util/hash.hpp"
#include "emi/util/jsonl.hpp"

namespace emi {

DiskCache::DiskCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path DiskCache::path_for(std::string_view key) const {
  const auto h = hash::sha256_hex(key);
  return dir_ / h.substr(0, 2) / h;
}

std::optional<std::string> DiskCache::get(std::string_view key) const {
  if (!enabled()) return std::nullopt;
  const auto p = path_for(key);
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void DiskCache::put(std::string_view key, std::string_view value) const {
  if (!enabled()) return;
  const auto p = path_for(key);
  if (std::filesystem::exists(p)) return;
  std::filesystem::create_directories(p.parent_path());
  io::write_file_atomic(p, value);
}

}  // namespace emi
