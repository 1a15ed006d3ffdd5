#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rgbuv/histogram.hpp"
#include "rgbuv/image_io.hpp"

namespace rgbuv {

/// "HGF1" magic, little-endian u32 bin count, then h*h*3 little-endian f32 in (u, v, c) order.
[[nodiscard]] std::vector<std::uint8_t> encode_hgf(const HistogramFeature& feature);

/// Decodes and renormalizes in double precision (f32 storage loses ~1e-7 of the sum).
[[nodiscard]] HistogramFeature decode_hgf(std::span<const std::uint8_t> bytes);

void write_hgf(const std::filesystem::path& path, const HistogramFeature& feature);
[[nodiscard]] HistogramFeature read_hgf(const std::filesystem::path& path);

/// True when the file starts with the HGF1 magic.
[[nodiscard]] bool is_hgf_file(const std::filesystem::path& path);

/// Four panels side by side: the R, G and B planes and their max-composite.
/// u runs along x, v along y. Values are scaled by the global maximum and
/// compressed by value^(1/4). Each bin becomes a `cell` x `cell` block.
[[nodiscard]] GrayRaster render_histogram(const HistogramFeature& feature, int cell = 4);

}  // namespace rgbuv
