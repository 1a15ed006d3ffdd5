#include "rgbuv/histogram_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "rgbuv/errors.hpp"

namespace rgbuv {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'H', 'G', 'F', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xffU));
  }
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(bytes[offset + static_cast<std::size_t>(i)]) << (8 * i);
  }
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_hgf(const HistogramFeature& feature) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + feature.size() * 4);
  for (const std::uint8_t ch : kMagic) {
    out.push_back(ch);
  }
  put_u32(out, static_cast<std::uint32_t>(feature.bins()));
  for (const double v : feature.values()) {
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

HistogramFeature decode_hgf(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw IoError("not an HGF1 histogram");
  }
  const std::uint32_t bins = get_u32(bytes, 4);
  if (bins < 2 || bins > 4096) {
    throw IoError("HGF1 bin count out of range: " + std::to_string(bins));
  }
  const std::size_t count = static_cast<std::size_t>(bins) * bins * 3;
  if (bytes.size() != 8 + count * 4) {
    throw IoError("HGF1 payload length does not match bin count");
  }
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = static_cast<double>(std::bit_cast<float>(get_u32(bytes, 8 + i * 4)));
  }
  try {
    return HistogramFeature::normalize(HistogramTensor(static_cast<int>(bins), std::move(values)));
  } catch (const Error& e) {
    throw IoError(std::string("invalid HGF1 contents: ") + e.what());
  }
}

void write_hgf(const std::filesystem::path& path, const HistogramFeature& feature) {
  write_file_atomic(path, encode_hgf(feature));
}

HistogramFeature read_hgf(const std::filesystem::path& path) {
  return decode_hgf(read_file(path));
}

bool is_hgf_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::array<char, 4> head{};
  if (!in.read(head.data(), head.size())) {
    return false;
  }
  return std::memcmp(head.data(), kMagic.data(), kMagic.size()) == 0;
}

GrayRaster render_histogram(const HistogramFeature& feature, int cell) {
  const int h = feature.bins();
  const int gap = cell;
  const int panel = h * cell;
  GrayRaster raster;
  raster.height = panel;
  raster.width = 4 * panel + 3 * gap;
  raster.pixels.assign(static_cast<std::size_t>(raster.height) * static_cast<std::size_t>(raster.width), 0);

  const double peak = *std::max_element(feature.values().begin(), feature.values().end());
  auto shade = [&](double v) {
    const double s = peak > 0.0 ? std::pow(v / peak, 0.25) : 0.0;
    return static_cast<std::uint8_t>(std::lround(std::clamp(s, 0.0, 1.0) * 255.0));
  };

  for (int p = 0; p < 4; ++p) {
    for (int u = 0; u < h; ++u) {
      for (int v = 0; v < h; ++v) {
        double value = 0.0;
        if (p < 3) {
          value = feature.at(u, v, p);
        } else {
          value = std::max({feature.at(u, v, 0), feature.at(u, v, 1), feature.at(u, v, 2)});
        }
        const std::uint8_t g = shade(value);
        for (int dy = 0; dy < cell; ++dy) {
          for (int dx = 0; dx < cell; ++dx) {
            const int y = v * cell + dy;
            const int x = p * (panel + gap) + u * cell + dx;
            raster.pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(raster.width) +
                          static_cast<std::size_t>(x)] = g;
          }
        }
      }
    }
  }
  return raster;
}

}  // namespace rgbuv
