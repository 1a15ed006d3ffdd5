#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rgbuv/image.hpp"

namespace rgbuv {

struct LoadedImage {
  ImageBuffer image;
  int source_channels = 3;  ///< 1 for grayscale sources (expanded to RGB on load)
  int bit_depth = 8;
};

/// Decodes 8/16-bit PNG or baseline JPEG into [0,1] floats by dividing by the
/// maximum code value. Alpha is dropped; no ICC handling. Throws IoError.
[[nodiscard]] LoadedImage load_image(const std::filesystem::path& path);

/// 8-bit grayscale raster, row-major.
struct GrayRaster {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;
};

[[nodiscard]] std::vector<std::uint8_t> encode_png(const ImageBuffer& image, int bit_depth = 8);
[[nodiscard]] std::vector<std::uint8_t> encode_png(const GrayRaster& raster);

/// Writes through a temporary file in the same directory and renames it into
/// place, so a failed write never leaves a partial file behind.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

void save_png(const std::filesystem::path& path, const ImageBuffer& image, int bit_depth = 8);

[[nodiscard]] std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace rgbuv
