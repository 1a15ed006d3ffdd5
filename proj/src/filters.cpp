#include "rgbuv/filters.hpp"

#include <algorithm>
#include <cmath>

#include "rgbuv/errors.hpp"

namespace rgbuv::filters {

namespace {

inline std::size_t at(int y, int x, int width, int c) {
  return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3 +
         static_cast<std::size_t>(c);
}

void require_raster(std::span<const double> data, int height, int width) {
  if (height < 1 || width < 1 ||
      data.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width) * 3) {
    throw InvalidArgument("raster size does not match dimensions");
  }
}

// One 1-D pass of a symmetric-window correlation along x (horizontal) or y.
// Each line is copied into a replicate-padded buffer first. With `adjoint`
// the taps scatter into the buffer, whose padding then folds back onto the
// end samples.
std::vector<double> pass_1d(std::span<const double> src, int height, int width, std::span<const double> taps,
                            bool horizontal, bool adjoint) {
  const int radius = static_cast<int>(taps.size() / 2);
  const int length = horizontal ? width : height;
  const int lines = horizontal ? height : width;
  const std::size_t stride = horizontal ? 3 : static_cast<std::size_t>(width) * 3;
  std::vector<double> dst(src.size(), 0.0);
  std::vector<double> pad(static_cast<std::size_t>(length + 2 * radius));
  std::vector<double> acc(static_cast<std::size_t>(length));
  const double* tap = taps.data();
  for (int line = 0; line < lines; ++line) {
    for (int c = 0; c < 3; ++c) {
      const std::size_t base = horizontal ? at(line, 0, width, c) : at(0, line, width, c);
      const double* in = src.data() + base;
      double* out = dst.data() + base;
      if (!adjoint) {
        for (int i = 0; i < length + 2 * radius; ++i) {
          pad[static_cast<std::size_t>(i)] = in[static_cast<std::size_t>(std::clamp(i - radius, 0, length - 1)) * stride];
        }
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int k = 0; k <= 2 * radius; ++k) {
          const double w = tap[k];
          const double* window = pad.data() + k;
          for (int x = 0; x < length; ++x) {
            acc[static_cast<std::size_t>(x)] += w * window[x];
          }
        }
        for (int x = 0; x < length; ++x) {
          out[static_cast<std::size_t>(x) * stride] = acc[static_cast<std::size_t>(x)];
        }
      } else {
        std::fill(pad.begin(), pad.end(), 0.0);
        for (int x = 0; x < length; ++x) {
          const double v = in[static_cast<std::size_t>(x) * stride];
          double* window = pad.data() + x;
          for (int k = 0; k <= 2 * radius; ++k) {
            window[k] += tap[k] * v;
          }
        }
        for (int i = 0; i < length + 2 * radius; ++i) {
          out[static_cast<std::size_t>(std::clamp(i - radius, 0, length - 1)) * stride] += pad[static_cast<std::size_t>(i)];
        }
      }
    }
  }
  return dst;
}

}  // namespace

std::vector<double> filter3x3(std::span<const double> image, int height, int width, const Kernel3& kernel) {
  require_raster(image, height, width);
  std::vector<double> out(image.size(), 0.0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int dy = -1; dy <= 1; ++dy) {
        const int sy = std::clamp(y + dy, 0, height - 1);
        for (int dx = -1; dx <= 1; ++dx) {
          const double w = kernel[static_cast<std::size_t>(dy + 1)][static_cast<std::size_t>(dx + 1)];
          if (w == 0.0) {
            continue;
          }
          const int sx = std::clamp(x + dx, 0, width - 1);
          for (int c = 0; c < 3; ++c) {
            out[at(y, x, width, c)] += w * image[at(sy, sx, width, c)];
          }
        }
      }
    }
  }
  return out;
}

std::vector<double> filter3x3_adjoint(std::span<const double> response, int height, int width,
                                      const Kernel3& kernel) {
  require_raster(response, height, width);
  std::vector<double> out(response.size(), 0.0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int dy = -1; dy <= 1; ++dy) {
        const int sy = std::clamp(y + dy, 0, height - 1);
        for (int dx = -1; dx <= 1; ++dx) {
          const double w = kernel[static_cast<std::size_t>(dy + 1)][static_cast<std::size_t>(dx + 1)];
          if (w == 0.0) {
            continue;
          }
          const int sx = std::clamp(x + dx, 0, width - 1);
          for (int c = 0; c < 3; ++c) {
            out[at(sy, sx, width, c)] += w * response[at(y, x, width, c)];
          }
        }
      }
    }
  }
  return out;
}

std::vector<double> gaussian_taps(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("blur sigma must be positive");
  }
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double w = std::exp(-0.5 * (k * k) / (sigma * sigma));
    taps[static_cast<std::size_t>(k + radius)] = w;
    sum += w;
  }
  for (double& w : taps) {
    w /= sum;
  }
  return taps;
}

std::vector<double> gaussian_blur(std::span<const double> image, int height, int width, double sigma) {
  require_raster(image, height, width);
  const auto taps = gaussian_taps(sigma);
  const auto rows = pass_1d(image, height, width, taps, true, false);
  return pass_1d(rows, height, width, taps, false, false);
}

std::vector<double> gaussian_blur_adjoint(std::span<const double> response, int height, int width, double sigma) {
  require_raster(response, height, width);
  const auto taps = gaussian_taps(sigma);
  const auto cols = pass_1d(response, height, width, taps, false, true);
  return pass_1d(cols, height, width, taps, true, true);
}

double channel_stddev(std::span<const double> image, int c) {
  const std::size_t n = image.size() / 3;
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean += image[i * 3 + static_cast<std::size_t>(c)];
  }
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = image[i * 3 + static_cast<std::size_t>(c)] - mean;
    var += d * d;
  }
  return std::sqrt(var / static_cast<double>(n));
}

}  // namespace rgbuv::filters
