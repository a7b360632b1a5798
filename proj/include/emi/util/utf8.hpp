#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace emi::utf8 {

/// True when `text` is well-formed UTF-8 (no overlongs, no surrogates).
[[nodiscard]] bool is_valid(std::string_view text);

/// Byte offset of the first invalid sequence, or npos.
[[nodiscard]] std::size_t first_invalid(std::string_view text);

[[nodiscard]] bool is_space(char32_t cp);
[[nodiscard]] bool is_punct(char32_t cp);

/// Splits on any Unicode whitespace. Views point into `text`.
[[nodiscard]] std::vector<std::string_view> split_whitespace(std::string_view text);

/// Trims Unicode whitespace on both ends and collapses interior runs to a
/// single ASCII space.
[[nodiscard]] std::string collapse_whitespace(std::string_view text);

[[nodiscard]] std::string_view trim(std::string_view text);

/// Simple (1:1) case mapping for Latin, Greek and Cyrillic blocks.
[[nodiscard]] std::string to_lower(std::string_view text);
[[nodiscard]] std::string to_upper(std::string_view text);

/// Removes leading and trailing punctuation code points.
[[nodiscard]] std::string_view strip_punct(std::string_view token);

/// Lowercased, punctuation-stripped form used for word-list lookups.
[[nodiscard]] std::string lookup_form(std::string_view token);

}  // namespace emi::utf8
