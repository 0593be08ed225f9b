#include "viramem/utf8.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace viramem::utf8 {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

struct Range {
  char32_t lo;
  char32_t hi;
};

// Sorted, non-overlapping.
constexpr std::array kLetterRanges{
    Range{0x41, 0x5A},     Range{0x61, 0x7A},     Range{0xAA, 0xAA},     Range{0xB5, 0xB5},
    Range{0xBA, 0xBA},     Range{0xC0, 0xD6},     Range{0xD8, 0xF6},     Range{0xF8, 0x2C1},
    Range{0x2C6, 0x2D1},   Range{0x2E0, 0x2E4},   Range{0x370, 0x374},   Range{0x376, 0x377},
    Range{0x37A, 0x37D},   Range{0x37F, 0x37F},   Range{0x386, 0x386},   Range{0x388, 0x38A},
    Range{0x38C, 0x38C},   Range{0x38E, 0x3A1},   Range{0x3A3, 0x3F5},   Range{0x3F7, 0x481},
    Range{0x48A, 0x52F},   Range{0x531, 0x556},   Range{0x560, 0x588},   Range{0x5D0, 0x5EA},
    Range{0x620, 0x64A},   Range{0x671, 0x6D3},   Range{0x904, 0x939},   Range{0x958, 0x961},
    Range{0xE01, 0xE30},   Range{0x1E00, 0x1FBC}, Range{0x1FC2, 0x1FCC}, Range{0x1FD0, 0x1FDB},
    Range{0x1FE0, 0x1FEC}, Range{0x1FF2, 0x1FFC}, Range{0x3041, 0x3096}, Range{0x30A1, 0x30FA},
    Range{0x3400, 0x4DBF}, Range{0x4E00, 0x9FFF}, Range{0xAC00, 0xD7A3}, Range{0xF900, 0xFAFF},
    Range{0xFF21, 0xFF3A}, Range{0xFF41, 0xFF5A},
};

bool in_ranges(char32_t cp) {
  auto it = std::upper_bound(kLetterRanges.begin(), kLetterRanges.end(), cp,
                             [](char32_t v, const Range& r) { return v < r.lo; });
  if (it == kLetterRanges.begin()) return false;
  --it;
  return cp <= it->hi;
}

}  // namespace

std::u32string decode(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    if (i + len > text.size()) {
      out.push_back(kReplacement);
      break;
    }
    bool ok = true;
    for (std::size_t k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(text[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

void append(std::string& out, char32_t cp) {
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

std::string encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) append(out, cp);
  return out;
}

bool is_letter(char32_t cp) { return in_ranges(cp); }

bool is_space(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D:
    case 0x1C: case 0x1D: case 0x1E: case 0x1F: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp < 0x80) return cp;
  if ((cp >= 0xC0 && cp <= 0xD6) || (cp >= 0xD8 && cp <= 0xDE)) return cp + 32;
  if (cp >= 0x100 && cp <= 0x137 && cp % 2 == 0) return cp + 1;
  if (cp >= 0x139 && cp <= 0x148 && cp % 2 == 1) return cp + 1;
  if (cp >= 0x14A && cp <= 0x177 && cp % 2 == 0) return cp + 1;
  if (cp == 0x178) return 0xFF;
  if (cp == 0x179 || cp == 0x17B || cp == 0x17D) return cp + 1;
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 32;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  return cp;
}

char32_t to_upper(char32_t cp) {
  if (cp >= 'a' && cp <= 'z') return cp - 32;
  if (cp < 0x80) return cp;
  if ((cp >= 0xE0 && cp <= 0xF6) || (cp >= 0xF8 && cp <= 0xFE)) return cp - 32;
  if (cp == 0xFF) return 0x178;
  if (cp >= 0x101 && cp <= 0x137 && cp % 2 == 1) return cp - 1;
  if (cp >= 0x13A && cp <= 0x148 && cp % 2 == 0) return cp - 1;
  if (cp >= 0x14B && cp <= 0x177 && cp % 2 == 1) return cp - 1;
  if (cp == 0x17A || cp == 0x17C || cp == 0x17E) return cp - 1;
  if (cp >= 0x3B1 && cp <= 0x3CB && cp != 0x3C2) return cp - 32;
  if (cp >= 0x430 && cp <= 0x44F) return cp - 32;
  if (cp >= 0x450 && cp <= 0x45F) return cp - 80;
  return cp;
}

bool is_upper(char32_t cp) { return to_lower(cp) != cp; }
bool is_lower(char32_t cp) { return to_upper(cp) != cp || cp == 0xDF; }

std::string to_lower(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool ascii = std::all_of(text.begin(), text.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
  if (ascii) {
    for (char c : text) out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c);
    return out;
  }
  for (char32_t cp : decode(text)) append(out, to_lower(cp));
  return out;
}

std::size_t length(std::string_view text) {
  std::size_t n = 0;
  for (char c : text) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char32_t cp : decode(text)) {
    if (is_space(cp)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      append(current, cp);
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

}  // namespace viramem::utf8
