#include "viramem/image_header.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

namespace viramem {

namespace {

std::uint32_t byte_at(std::string_view b, std::size_t i) { return static_cast<unsigned char>(b[i]); }

std::uint32_t be16(std::string_view b, std::size_t i) { return byte_at(b, i) << 8 | byte_at(b, i + 1); }
std::uint32_t be32(std::string_view b, std::size_t i) { return be16(b, i) << 16 | be16(b, i + 2); }
std::uint32_t le16(std::string_view b, std::size_t i) { return byte_at(b, i) | byte_at(b, i + 1) << 8; }
std::uint32_t le24(std::string_view b, std::size_t i) { return le16(b, i) | byte_at(b, i + 2) << 16; }
std::uint32_t le32(std::string_view b, std::size_t i) { return le16(b, i) | le16(b, i + 2) << 16; }

std::optional<ImageInfo> make(const char* format, std::int64_t w, std::int64_t h) {
  if (w <= 0 || h <= 0) return std::nullopt;
  return ImageInfo{format, w, h};
}

std::optional<ImageInfo> png(std::string_view b) {
  if (b.size() < 24 || b.substr(12, 4) != "IHDR") return std::nullopt;
  return make("png", be32(b, 16), be32(b, 20));
}

std::optional<ImageInfo> gif(std::string_view b) {
  if (b.size() < 10) return std::nullopt;
  return make("gif", le16(b, 6), le16(b, 8));
}

std::optional<ImageInfo> bmp(std::string_view b) {
  if (b.size() < 26) return std::nullopt;
  const auto dib = le32(b, 14);
  if (dib == 12) return make("bmp", le16(b, 18), le16(b, 20));
  // Negative height marks a top-down bitmap.
  const auto h = static_cast<std::int32_t>(le32(b, 22));
  return make("bmp", static_cast<std::int32_t>(le32(b, 18)), std::abs(static_cast<std::int64_t>(h)));
}

std::optional<ImageInfo> webp(std::string_view b) {
  if (b.size() < 30) return std::nullopt;
  const auto chunk = b.substr(12, 4);
  if (chunk == "VP8 ") {
    if (byte_at(b, 23) != 0x9d || byte_at(b, 24) != 0x01 || byte_at(b, 25) != 0x2a) return std::nullopt;
    return make("webp", le16(b, 26) & 0x3fff, le16(b, 28) & 0x3fff);
  }
  if (chunk == "VP8L") {
    if (byte_at(b, 20) != 0x2f) return std::nullopt;
    const auto bits = le32(b, 21);
    return make("webp", (bits & 0x3fff) + 1, ((bits >> 14) & 0x3fff) + 1);
  }
  if (chunk == "VP8X") return make("webp", le24(b, 24) + 1, le24(b, 27) + 1);
  return std::nullopt;
}

std::optional<ImageInfo> jpeg(std::string_view b) {
  std::size_t i = 2;
  while (i + 1 < b.size()) {
    if (byte_at(b, i) != 0xff) return std::nullopt;
    while (i < b.size() && byte_at(b, i) == 0xff) ++i;  // fill bytes
    if (i >= b.size()) return std::nullopt;
    const auto marker = byte_at(b, i++);
    if (marker == 0x01 || (marker >= 0xd0 && marker <= 0xd8)) continue;  // no length field
    if (marker == 0xd9 || marker == 0xda) return std::nullopt;  // end or scan before any frame header
    if (i + 2 > b.size()) return std::nullopt;
    const auto length = be16(b, i);
    if (length < 2) return std::nullopt;
    const bool frame = marker >= 0xc0 && marker <= 0xcf && marker != 0xc4 && marker != 0xc8 && marker != 0xcc;
    if (frame) {
      if (i + 7 > b.size()) return std::nullopt;
      return make("jpeg", be16(b, i + 5), be16(b, i + 3));
    }
    i += length;
  }
  return std::nullopt;
}

}  // namespace

std::optional<ImageInfo> decode_image_header(std::string_view b) {
  if (b.size() >= 8 && b.substr(0, 8) == std::string_view("\x89PNG\r\n\x1a\n", 8)) return png(b);
  if (b.size() >= 3 && byte_at(b, 0) == 0xff && byte_at(b, 1) == 0xd8 && byte_at(b, 2) == 0xff) return jpeg(b);
  if (b.size() >= 6 && (b.substr(0, 6) == "GIF87a" || b.substr(0, 6) == "GIF89a")) return gif(b);
  if (b.size() >= 12 && b.substr(0, 4) == "RIFF" && b.substr(8, 4) == "WEBP") return webp(b);
  if (b.size() >= 2 && b.substr(0, 2) == "BM") return bmp(b);
  return std::nullopt;
}

bool is_raster_content_type(std::string_view content_type) {
  std::string t(content_type.substr(0, content_type.find(';')));
  t.erase(std::remove_if(t.begin(), t.end(), [](unsigned char c) { return std::isspace(c); }), t.end());
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  return t == "image/jpeg" || t == "image/jpg" || t == "image/png" || t == "image/gif" || t == "image/webp" ||
         t == "image/bmp";
}

}  // namespace viramem
