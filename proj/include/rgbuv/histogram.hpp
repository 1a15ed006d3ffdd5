#pragma once

// Differentiable RGB-uv histogram: every pixel is projected into three
// log-chroma planes (one per primary channel) and spread over an h x h grid of
// bin centers with an inverse-quadratic kernel, weighted by pixel intensity.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "rgbuv/image.hpp"

namespace rgbuv {

struct HistogramParams {
  int bins = 64;                 ///< h, bins per log-chroma axis
  double tau = 0.02;             ///< kernel fall-off in log-chroma units
  double epsilon = 1.0 / 255.0;  ///< added to every channel inside the log ratios
  double uv_min = -3.0;          ///< first bin center
  double uv_max = 3.0;           ///< last bin center

  void validate() const;

  [[nodiscard]] double bin_center(int i) const noexcept {
    return uv_min + (uv_max - uv_min) * static_cast<double>(i) / static_cast<double>(bins - 1);
  }

  friend bool operator==(const HistogramParams&, const HistogramParams&) = default;
};

/// Dense h x h x 3 tensor in (u, v, c) order, c fastest. No invariants on the
/// values; used for upstream gradients and unnormalized intermediates.
class HistogramTensor {
 public:
  HistogramTensor() = default;
  explicit HistogramTensor(int bins);
  HistogramTensor(int bins, std::vector<double> values);

  [[nodiscard]] int bins() const noexcept { return bins_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

  [[nodiscard]] double& at(int u, int v, int c) noexcept { return values_[index(u, v, c)]; }
  [[nodiscard]] double at(int u, int v, int c) const noexcept { return values_[index(u, v, c)]; }
  [[nodiscard]] double& operator[](std::size_t i) noexcept { return values_[i]; }
  [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }

  [[nodiscard]] std::span<double> values() noexcept { return values_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

  [[nodiscard]] std::size_t index(int u, int v, int c) const noexcept {
    return (static_cast<std::size_t>(u) * static_cast<std::size_t>(bins_) + static_cast<std::size_t>(v)) * 3 +
           static_cast<std::size_t>(c);
  }

  friend bool operator==(const HistogramTensor&, const HistogramTensor&) = default;

 private:
  int bins_ = 0;
  std::vector<double> values_;
};

/// A normalized histogram: non-negative, finite, summing to one within 1e-9.
class HistogramFeature {
 public:
  static constexpr double kSumTolerance = 1e-9;

  HistogramFeature() = default;

  /// Validates that `tensor` already satisfies the invariants.
  explicit HistogramFeature(HistogramTensor tensor);

  /// Divides by the compensated total. Throws DegenerateImage if the total is zero.
  static HistogramFeature normalize(HistogramTensor tensor);

  [[nodiscard]] int bins() const noexcept { return tensor_.bins(); }
  [[nodiscard]] std::size_t size() const noexcept { return tensor_.size(); }
  [[nodiscard]] double at(int u, int v, int c) const noexcept { return tensor_.at(u, v, c); }
  [[nodiscard]] double operator[](std::size_t i) const noexcept { return tensor_[i]; }
  [[nodiscard]] std::span<const double> values() const noexcept { return tensor_.values(); }
  [[nodiscard]] const HistogramTensor& tensor() const noexcept { return tensor_; }

  friend bool operator==(const HistogramFeature&, const HistogramFeature&) = default;

 private:
  HistogramTensor tensor_;
};

/// Log-chroma coordinates of every pixel, one (u, v) plane pair per primary.
/// Primary R: u = log(R/G), v = log(R/B); primary G: u = log(G/R), v = log(G/B);
/// primary B: u = log(B/R), v = log(B/G); every channel offset by epsilon.
struct LogChromaPlanes {
  int height = 0;
  int width = 0;
  std::array<std::vector<double>, 3> u;
  std::array<std::vector<double>, 3> v;
  std::vector<double> intensity;  ///< sqrt(R^2 + G^2 + B^2)
};

/// Channels used as the u and v denominators for each primary.
inline constexpr std::array<int, 3> kUPartner{1, 0, 0};
inline constexpr std::array<int, 3> kVPartner{2, 2, 1};

[[nodiscard]] LogChromaPlanes project_log_chroma(const ImageBuffer& image, const HistogramParams& params);

/// Inverse-quadratic kernel (1 + (du/tau)^2)^-1 (1 + (dv/tau)^2)^-1.
[[nodiscard]] inline double kernel_weight(double du, double dv, double tau) noexcept {
  const double a = du / tau;
  const double b = dv / tau;
  return 1.0 / ((1.0 + a * a) * (1.0 + b * b));
}

/// Forward pass. Pixels are accumulated in a canonical color order, so the
/// result is bit-identical under any permutation of pixel positions.
[[nodiscard]] HistogramFeature compute_histogram(const ImageBuffer& image, const HistogramParams& params);

/// Gradient of sum(upstream * H) with respect to every pixel component,
/// including the normalization by the histogram total.
[[nodiscard]] PixelGradient histogram_backward(const ImageBuffer& image, const HistogramParams& params,
                                               const HistogramTensor& upstream);

namespace detail {

/// Forward result that keeps the normalizer so a later backward pass can skip
/// recomputing it.
struct HistogramForward {
  HistogramFeature feature;
  double total = 0.0;
};

[[nodiscard]] HistogramForward histogram_forward(const ImageBuffer& image, const HistogramParams& params);

/// Backward pass given a forward result computed on the same image.
[[nodiscard]] PixelGradient histogram_backward(const ImageBuffer& image, const HistogramParams& params,
                                               const HistogramForward& forward, const HistogramTensor& upstream);

}  // namespace detail

}  // namespace rgbuv
