#include "rgbuv/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rgbuv/errors.hpp"

namespace rgbuv {

ImageBuffer::ImageBuffer(int height, int width) : height_(height), width_(width) {
  if (height < 1 || width < 1) {
    throw InvalidArgument("image dimensions must be positive");
  }
  data_.assign(pixel_count() * 3, 0.0);
}

ImageBuffer::ImageBuffer(int height, int width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
  if (height < 1 || width < 1) {
    throw InvalidArgument("image dimensions must be positive");
  }
  if (data_.size() != pixel_count() * 3) {
    throw InvalidArgument("image data length " + std::to_string(data_.size()) + " does not match " +
                          std::to_string(height) + "x" + std::to_string(width) + "x3");
  }
  validate();
}

void ImageBuffer::clamp() {
  for (double& v : data_) {
    v = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
  }
}

void ImageBuffer::validate() const {
  if (height_ < 1 || width_ < 1) {
    throw InvalidArgument("empty image");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const double v = data_[i];
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw InvalidArgument("pixel component " + std::to_string(i) + " is outside [0,1]");
    }
  }
}

void require_same_shape(const ImageBuffer& a, const ImageBuffer& b, const char* what) {
  if (!a.same_shape(b)) {
    throw InvalidArgument(std::string(what) + ": image dimensions differ (" + std::to_string(a.height()) + "x" +
                          std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                          std::to_string(b.width()) + ")");
  }
}

}  // namespace rgbuv
