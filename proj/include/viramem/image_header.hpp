#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace viramem {

struct ImageInfo {
  std::string format;  // jpeg, png, gif, webp, bmp
  std::int64_t width = 0;
  std::int64_t height = 0;

  std::string extension() const { return format == "jpeg" ? "jpg" : format; }
};

/// Dimensions from the file header alone. Empty when the bytes are not a
/// supported raster format or the header is truncated or reports a zero
/// dimension.
std::optional<ImageInfo> decode_image_header(std::string_view bytes);

/// Raster content types accepted for download (parameters ignored).
bool is_raster_content_type(std::string_view content_type);

}  // namespace viramem
