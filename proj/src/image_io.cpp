#include "rgbuv/image_io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <system_error>

#include "rgbuv/errors.hpp"

namespace rgbuv {

namespace fs = std::filesystem;

LoadedImage load_image(const fs::path& path) {
  std::vector<std::uint8_t> bytes = read_file(path);
  cv::Mat mat;
  try {
    mat = cv::imdecode(bytes, cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception& e) {
    throw IoError("cannot decode " + path.string() + ": " + e.what());
  }
  if (mat.empty()) {
    throw IoError("cannot decode " + path.string());
  }

  double max_code = 0.0;
  int depth_bits = 0;
  switch (mat.depth()) {
    case CV_8U:
      max_code = 255.0;
      depth_bits = 8;
      break;
    case CV_16U:
      max_code = 65535.0;
      depth_bits = 16;
      break;
    default:
      throw IoError("unsupported sample type in " + path.string());
  }

  const int channels = mat.channels();
  if (channels != 1 && channels != 2 && channels != 3 && channels != 4) {
    throw IoError("unsupported channel count in " + path.string());
  }

  LoadedImage out;
  out.source_channels = channels <= 2 ? 1 : 3;
  out.bit_depth = depth_bits;
  out.image = ImageBuffer(mat.rows, mat.cols);
  for (int y = 0; y < mat.rows; ++y) {
    for (int x = 0; x < mat.cols; ++x) {
      for (int c = 0; c < 3; ++c) {
        // OpenCV stores BGR(A); gray (+alpha) replicates channel 0.
        const int src = channels <= 2 ? 0 : 2 - c;
        const double code = depth_bits == 8
                                ? static_cast<double>(mat.ptr<std::uint8_t>(y)[x * channels + src])
                                : static_cast<double>(mat.ptr<std::uint16_t>(y)[x * channels + src]);
        out.image.at(y, x, c) = code / max_code;
      }
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_png(const ImageBuffer& image, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw InvalidArgument("PNG bit depth must be 8 or 16");
  }
  const double max_code = bit_depth == 8 ? 255.0 : 65535.0;
  cv::Mat mat(image.height(), image.width(), bit_depth == 8 ? CV_8UC3 : CV_16UC3);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(image.at(y, x, c), 0.0, 1.0);
        const double code = std::round(v * max_code);
        if (bit_depth == 8) {
          mat.ptr<std::uint8_t>(y)[x * 3 + (2 - c)] = static_cast<std::uint8_t>(code);
        } else {
          mat.ptr<std::uint16_t>(y)[x * 3 + (2 - c)] = static_cast<std::uint16_t>(code);
        }
      }
    }
  }
  std::vector<std::uint8_t> out;
  if (!cv::imencode(".png", mat, out)) {
    throw IoError("PNG encoding failed");
  }
  return out;
}

std::vector<std::uint8_t> encode_png(const GrayRaster& raster) {
  cv::Mat mat(raster.height, raster.width, CV_8UC1, const_cast<std::uint8_t*>(raster.pixels.data()));
  std::vector<std::uint8_t> out;
  if (!cv::imencode(".png", mat, out)) {
    throw IoError("PNG encoding failed");
  }
  return out;
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open " + tmp.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw IoError("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

void write_file_atomic(const fs::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void save_png(const fs::path& path, const ImageBuffer& image, int bit_depth) {
  write_file_atomic(path, encode_png(image, bit_depth));
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw IoError("read failed: " + path.string());
  }
  return bytes;
}

}  // namespace rgbuv
