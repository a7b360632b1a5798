#include "emi/util/utf8.hpp"

namespace emi::utf8 {

namespace {

// Decodes one code point starting at `pos`. Returns the code point and
// advances `pos`; on malformed input returns U+FFFD and sets `ok` false.
char32_t decode(std::string_view s, std::size_t& pos, bool& ok) {
  ok = true;
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  char32_t min = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
    min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
    min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
    min = 0x10000;
  } else {
    ok = false;
    ++pos;
    return 0xFFFD;
  }
  if (pos + len > s.size()) {
    ok = false;
    pos = s.size();
    return 0xFFFD;
  }
  for (int i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) {
      ok = false;
      pos += i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  pos += len;
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ok = false;
    return 0xFFFD;
  }
  return cp;
}

void encode(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

char32_t lower_cp(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 0x20;
  if (c < 0x80) return c;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
  if (c == 0x178) return 0xFF;
  if (c == 0x130) return U'i';
  if ((c >= 0x100 && c <= 0x137) || (c >= 0x14A && c <= 0x177)) {
    return (c % 2 == 0) ? c + 1 : c;
  }
  if ((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E)) {
    return (c % 2 == 1) ? c + 1 : c;
  }
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  return c;
}

char32_t upper_cp(char32_t c) {
  if (c >= U'a' && c <= U'z') return c - 0x20;
  if (c < 0x80) return c;
  if (c >= 0xE0 && c <= 0xFE && c != 0xF7) return c - 0x20;
  if (c == 0xFF) return 0x178;
  if (c == 0x131) return U'I';
  if ((c >= 0x100 && c <= 0x137) || (c >= 0x14A && c <= 0x177)) {
    return (c % 2 == 1) ? c - 1 : c;
  }
  if ((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E)) {
    return (c % 2 == 0) ? c - 1 : c;
  }
  if (c >= 0x3B1 && c <= 0x3C9 && c != 0x3C2) return c - 0x20;
  if (c >= 0x430 && c <= 0x44F) return c - 0x20;
  if (c >= 0x450 && c <= 0x45F) return c - 0x50;
  return c;
}

template <typename F>
std::string map_cps(std::string_view text, F f) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  bool ok = true;
  while (pos < text.size()) {
    const std::size_t start = pos;
    const char32_t cp = decode(text, pos, ok);
    if (!ok) {
      out.append(text.substr(start, pos - start));
      continue;
    }
    encode(f(cp), out);
  }
  return out;
}

}  // namespace

std::size_t first_invalid(std::string_view text) {
  std::size_t pos = 0;
  bool ok = true;
  while (pos < text.size()) {
    const std::size_t start = pos;
    decode(text, pos, ok);
    if (!ok) return start;
  }
  return std::string_view::npos;
}

bool is_valid(std::string_view text) { return first_invalid(text) == std::string_view::npos; }

bool is_space(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_punct(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  switch (cp) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
    case 0x2E2E: case 0x3001: case 0x3002:
      return true;
    default:
      return (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E);
  }
}

std::vector<std::string_view> split_whitespace(std::string_view text) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  std::size_t token_start = std::string_view::npos;
  bool ok = true;
  while (pos < text.size()) {
    const std::size_t start = pos;
    const char32_t cp = decode(text, pos, ok);
    if (ok && is_space(cp)) {
      if (token_start != std::string_view::npos) {
        tokens.push_back(text.substr(token_start, start - token_start));
        token_start = std::string_view::npos;
      }
    } else if (token_start == std::string_view::npos) {
      token_start = start;
    }
  }
  if (token_start != std::string_view::npos) tokens.push_back(text.substr(token_start));
  return tokens;
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (const auto token : split_whitespace(text)) {
    if (!out.empty()) out.push_back(' ');
    out.append(token);
  }
  return out;
}

std::string_view trim(std::string_view text) {
  const auto tokens = split_whitespace(text);
  if (tokens.empty()) return {};
  const auto* begin = tokens.front().data();
  const auto* end = tokens.back().data() + tokens.back().size();
  return {begin, static_cast<std::size_t>(end - begin)};
}

std::string to_lower(std::string_view text) { return map_cps(text, lower_cp); }
std::string to_upper(std::string_view text) { return map_cps(text, upper_cp); }

std::string_view strip_punct(std::string_view token) {
  // Walk code points once, remembering the span between the first and last
  // non-punctuation code point.
  std::size_t pos = 0;
  std::size_t keep_begin = std::string_view::npos;
  std::size_t keep_end = 0;
  bool ok = true;
  while (pos < token.size()) {
    const std::size_t start = pos;
    const char32_t cp = decode(token, pos, ok);
    if (!ok || !is_punct(cp)) {
      if (keep_begin == std::string_view::npos) keep_begin = start;
      keep_end = pos;
    }
  }
  if (keep_begin == std::string_view::npos) return {};
  return token.substr(keep_begin, keep_end - keep_begin);
}

std::string lookup_form(std::string_view token) { return to_lower(strip_punct(token)); }

}  // namespace emi::utf8
