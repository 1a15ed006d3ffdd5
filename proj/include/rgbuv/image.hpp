#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rgbuv {

/// Interleaved RGB image with double components in [0,1], row-major.
class ImageBuffer {
 public:
  ImageBuffer() = default;

  /// Zero-filled image. Throws InvalidArgument for empty dimensions.
  ImageBuffer(int height, int width);

  /// Takes ownership of `data` (height * width * 3 values) and validates it.
  ImageBuffer(int height, int width, std::vector<double> data);

  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  [[nodiscard]] double& at(int y, int x, int c) noexcept { return data_[index(y, x, c)]; }
  [[nodiscard]] double at(int y, int x, int c) const noexcept { return data_[index(y, x, c)]; }

  [[nodiscard]] std::span<double> data() noexcept { return data_; }
  [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

  [[nodiscard]] bool same_shape(const ImageBuffer& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  /// Clamps every component to [0,1]; non-finite values become 0.
  void clamp();

  /// Throws InvalidArgument unless every component is finite and in [0,1].
  void validate() const;

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  [[nodiscard]] std::size_t index(int y, int x, int c) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3 +
           static_cast<std::size_t>(c);
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

/// Per-pixel gradient with the same layout as an ImageBuffer. Values are unbounded.
struct PixelGradient {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  static PixelGradient zeros_like(const ImageBuffer& image) {
    return {image.height(), image.width(), std::vector<double>(image.size(), 0.0)};
  }
};

void require_same_shape(const ImageBuffer& a, const ImageBuffer& b, const char* what);

}  // namespace rgbuv
