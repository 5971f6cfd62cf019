#pragma once

#include <filesystem>

#include "aquafuse/raster.hpp"

namespace aquafuse::io {

struct ColorEncoding {
  /// Treat 8-bit files as sRGB-encoded: linearise on read, re-encode on write.
  bool srgb_linearize = false;
};

/// Decodes PNG or JPEG; 8- and 16-bit inputs are scaled to [0, 1]. Throws
/// IoError when the file is missing or undecodable and ParameterError when it
/// is smaller than 8 x 8.
Image read_image(const std::filesystem::path& path, ColorEncoding encoding = {});

/// 8-bit PNG unless the extension is .jpg/.jpeg. Values are rounded as
/// round(v * 255).
void write_image(const std::filesystem::path& path, const Image& image, ColorEncoding encoding = {});

/// Single-channel little-endian PFM ("Pf", scale -1.0, rows bottom to top).
void write_pfm(const std::filesystem::path& path, const DepthMap& depth);
DepthMap read_pfm(const std::filesystem::path& path);

/// 16-bit grayscale PNG with value round(z * 65535).
void write_depth_png16(const std::filesystem::path& path, const DepthMap& depth);
DepthMap read_depth_png16(const std::filesystem::path& path);

/// Dispatches on extension: .pfm or .png.
DepthMap read_depth(const std::filesystem::path& path);

double srgb_to_linear(double v);
double linear_to_srgb(double v);

}  // namespace aquafuse::io
