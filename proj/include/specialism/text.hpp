#pragma once

// UTF-8 decoding and the bundled Latin diacritic folding table.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace specialism::text {

inline constexpr char32_t kReplacement = 0xFFFD;

/// Decodes UTF-8; each invalid byte becomes U+FFFD.
inline std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool ok = len > 0 && i + len <= s.size();
    for (int k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
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

namespace detail {

// U+00C0..U+00FF and U+0100..U+017F, already lowercased. '?' marks entries
// that fold to more than one letter (see multi_fold) or have no fold.
inline constexpr std::string_view kLatin1Fold =
    "aaaaaa?ceeeeiiiidnooooo?ouuuuy??aaaaaa?ceeeeiiiidnooooo?ouuuuy?y";
inline constexpr std::string_view kLatinExtAFold =
    "aaaaaaccccccccddddeeeeeeeeeegggggggghhhhiiiiiiiiii??jjkkkllllllllll"
    "nnnnnnnnnoooooo??rrrrrrssssssssttttttuuuuuuuuuuuuwwyyyzzzzzzs";
static_assert(kLatin1Fold.size() == 64);
static_assert(kLatinExtAFold.size() == 128);

inline std::string_view multi_fold(char32_t cp) {
  switch (cp) {
    case 0xC6: case 0xE6: return "ae";
    case 0xDE: case 0xFE: return "th";
    case 0xDF: return "ss";
    case 0x132: case 0x133: return "ij";
    case 0x152: case 0x153: return "oe";
    case 0x218: case 0x219: return "s";
    case 0x21A: case 0x21B: return "t";
    default: return {};
  }
}

}  // namespace detail

/// Lowercase ASCII fold of a single code point, or an empty view when the
/// table has no entry for it.
inline std::string_view fold_codepoint(char32_t cp) {
  static constexpr std::string_view kAsciiLower =
      "abcdefghijklmnopqrstuvwxyz";
  if (cp >= 'A' && cp <= 'Z') return kAsciiLower.substr(cp - 'A', 1);
  if (auto multi = detail::multi_fold(cp); !multi.empty()) return multi;
  std::string_view table;
  char32_t base = 0;
  if (cp >= 0xC0 && cp <= 0xFF) {
    table = detail::kLatin1Fold;
    base = 0xC0;
  } else if (cp >= 0x100 && cp <= 0x17F) {
    table = detail::kLatinExtAFold;
    base = 0x100;
  } else {
    return {};
  }
  const std::size_t idx = cp - base;
  if (table[idx] == '?') return {};
  return table.substr(idx, 1);
}

/// Lowercases ASCII and folds Latin diacritics to ASCII. Code points outside
/// the table pass through unchanged.
inline std::string fold_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : decode_utf8(s)) {
    if (cp < 0x80) {
      out.push_back(cp >= 'A' && cp <= 'Z' ? static_cast<char>(cp - 'A' + 'a')
                                           : static_cast<char>(cp));
      continue;
    }
    if (auto f = fold_codepoint(cp); !f.empty()) {
      out.append(f);
    } else {
      append_utf8(out, cp);
    }
  }
  return out;
}

inline bool is_ascii_alpha(char32_t c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

inline bool is_ascii_digit(char32_t c) { return c >= '0' && c <= '9'; }

// Letters for name handling: ASCII letters plus anything the fold table maps
// and the remaining non-ASCII letter blocks (Greek, Cyrillic, ...).
inline bool is_letter(char32_t c) {
  if (is_ascii_alpha(c)) return true;
  if (c < 0xC0) return false;
  if (c == 0xD7 || c == 0xF7) return false;
  return c != kReplacement;
}

/// Alphanumeric for tokenizing: ASCII letters and digits, plus non-ASCII
/// letters outside the combining-mark, punctuation and symbol blocks.
inline bool is_token_char(char32_t c) {
  if (is_ascii_alpha(c) || is_ascii_digit(c)) return true;
  if (!is_letter(c)) return false;
  if (c >= 0x2B0 && c <= 0x36F) return false;    // modifier letters, combining marks
  if (c >= 0x2000 && c <= 0x2BFF) return false;  // punctuation, symbols, arrows, math
  if (c >= 0x3000 && c <= 0x303F) return false;  // CJK punctuation
  if (c >= 0xFE30 && c <= 0xFE4F) return false;
  if (c >= 0xFF00 && c <= 0xFF0F) return false;
  return true;
}

/// Simple lowercase mapping for ASCII, Latin-1, Latin Extended-A, basic
/// Greek and Cyrillic capitals; other code points are returned unchanged.
inline char32_t to_lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 32;
  if (c < 0xC0) return c;
  if (c <= 0xDE) return c == 0xD7 ? c : c + 0x20;
  if (c == 0x130) return 'i';
  if (c >= 0x100 && c <= 0x137) return c % 2 == 0 ? c + 1 : c;
  if (c >= 0x139 && c <= 0x148) return c % 2 == 1 ? c + 1 : c;
  if (c >= 0x14A && c <= 0x177) return c % 2 == 0 ? c + 1 : c;
  if (c == 0x178) return 0xFF;
  if (c >= 0x179 && c <= 0x17E) return c % 2 == 1 ? c + 1 : c;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  return c;
}

}  // namespace specialism::text
