#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace emi::io {

using Json = nlohmann::json;

/// Appends one compact JSON object per line.
class JsonlWriter {
 public:
  explicit JsonlWriter(const std::filesystem::path& path);
  void write(const Json& record);
  [[nodiscard]] std::size_t count() const noexcept { return count_; }

 private:
  std::ofstream out_;
  std::size_t count_ = 0;
};

/// Calls `fn(line, line_number)` for every non-empty physical line.
void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::string_view, std::size_t)>& fn);

/// Parses every non-empty line as JSON; a malformed line is fatal.
[[nodiscard]] std::vector<Json> read_jsonl(const std::filesystem::path& path);

[[nodiscard]] Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& value);

[[nodiscard]] std::string read_file(const std::filesystem::path& path);

/// Writes via a temporary sibling and rename, so readers never observe a
/// partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace emi::io
