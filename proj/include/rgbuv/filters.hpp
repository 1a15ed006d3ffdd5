#pragma once

// Linear filters on interleaved 3-channel rasters with replicate border
// padding, plus their adjoints for backpropagation.

#include <array>
#include <span>
#include <vector>

namespace rgbuv::filters {

/// 3x3 correlation kernel, row-major: k[dy + 1][dx + 1] multiplies pixel (y + dy, x + dx).
using Kernel3 = std::array<std::array<double, 3>, 3>;

inline constexpr Kernel3 kLaplacian{{{0, 1, 0}, {1, -4, 1}, {0, 1, 0}}};
inline constexpr Kernel3 kSobelX{{{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}}};
inline constexpr Kernel3 kSobelY{{{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}}};

[[nodiscard]] std::vector<double> filter3x3(std::span<const double> image, int height, int width,
                                            const Kernel3& kernel);

/// Transpose of filter3x3: maps a response-space gradient back to pixels.
[[nodiscard]] std::vector<double> filter3x3_adjoint(std::span<const double> response, int height, int width,
                                                    const Kernel3& kernel);

/// Normalized Gaussian taps with standard deviation sigma, radius ceil(3 sigma).
[[nodiscard]] std::vector<double> gaussian_taps(double sigma);

/// Separable Gaussian blur (horizontal, then vertical).
[[nodiscard]] std::vector<double> gaussian_blur(std::span<const double> image, int height, int width, double sigma);

[[nodiscard]] std::vector<double> gaussian_blur_adjoint(std::span<const double> response, int height, int width,
                                                        double sigma);

/// Population standard deviation of channel c over all pixels.
[[nodiscard]] double channel_stddev(std::span<const double> image, int c);

}  // namespace rgbuv::filters
