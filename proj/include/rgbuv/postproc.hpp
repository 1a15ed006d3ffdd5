#pragma once

#include <array>
#include <string>

#include "rgbuv/histogram.hpp"
#include "rgbuv/image.hpp"
#include "rgbuv/recolor.hpp"

namespace rgbuv {

/// Global degree-2 polynomial color mapping. Each output channel is a linear
/// combination of the basis (1, R, G, B, R^2, G^2, B^2, RG, RB, GB).
struct ColorMapping {
  static constexpr int kTerms = 10;
  using Coefficients = std::array<std::array<double, kTerms>, 3>;

  Coefficients coefficients{};
  double residual_rmse = 0.0;
  bool constant_offset = false;  ///< fitted with the rank-deficient fallback

  [[nodiscard]] static ColorMapping identity();

  /// Unclamped evaluation of one color.
  [[nodiscard]] std::array<double, 3> evaluate(double r, double g, double b) const noexcept;

  [[nodiscard]] std::string to_json() const;
  [[nodiscard]] static ColorMapping from_json(const std::string& text);
};

[[nodiscard]] std::array<double, ColorMapping::kTerms> mapping_basis(double r, double g, double b) noexcept;

/// Least-squares fit of small_out as a polynomial of small_in colors. Falls
/// back to a per-channel constant offset (with a warning) when the design
/// matrix is rank-deficient, e.g. for images with very few distinct colors.
[[nodiscard]] ColorMapping fit_mapping(const ImageBuffer& small_in, const ImageBuffer& small_out);

/// Pointwise evaluation, clamped to [0,1].
[[nodiscard]] ImageBuffer apply_mapping(const ImageBuffer& full, const ColorMapping& mapping);

/// Bilinear resampling with pixel-center alignment.
[[nodiscard]] ImageBuffer resize_bilinear(const ImageBuffer& image, int height, int width);

inline constexpr int kWorkingResolution = 256;

struct HiresResult {
  ImageBuffer image;
  RecolorResult working;        ///< optimization at the working resolution
  ImageBuffer working_input;    ///< the downsampled input (empty when delegated)
  ColorMapping mapping;
  bool delegated = false;       ///< input was small enough to recolor directly
};

/// Downsample to 256x256, recolor, fit a color mapping from the small
/// (input, output) pair and apply it at full resolution. Images no larger than
/// 256 in both dimensions are recolored directly.
[[nodiscard]] HiresResult recolor_hires_detailed(const ImageBuffer& full, const HistogramFeature& h_target,
                                                 const RecolorConfig& cfg, const HistogramParams& params);

[[nodiscard]] ImageBuffer recolor_hires(const ImageBuffer& full, const HistogramFeature& h_target,
                                        const RecolorConfig& cfg, const HistogramParams& params);

/// Pearson correlation of the Sobel gradient magnitudes of the two images'
/// channel means. Used to check that a color mapping keeps edges in place.
[[nodiscard]] double edge_correlation(const ImageBuffer& a, const ImageBuffer& b);

}  // namespace rgbuv
