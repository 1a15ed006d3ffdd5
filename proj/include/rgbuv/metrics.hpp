#pragma once

#include <span>

#include "rgbuv/histogram.hpp"

namespace rgbuv {

inline constexpr double kDefaultKlSmoothing = 1e-6;

/// Hellinger distance (1/sqrt 2) * || sqrt(a) - sqrt(b) ||_2, in [0, 1].
[[nodiscard]] double hellinger(const HistogramFeature& a, const HistogramFeature& b);

/// Bhattacharyya coefficient sum(sqrt(a * b)); hellinger^2 = 1 - bhattacharyya.
[[nodiscard]] double bhattacharyya(const HistogramFeature& a, const HistogramFeature& b);

/// KL(target || approx) with additive smoothing inside the log ratio:
/// sum(target * log((target + s) / (approx + s))). Smoothing can push the raw
/// sum a hair below zero when the two are nearly equal; the result is clamped at 0.
[[nodiscard]] double kl_divergence(const HistogramFeature& target, const HistogramFeature& approx,
                                   double smoothing = kDefaultKlSmoothing);

/// Same measures over arbitrary normalized distributions of equal length.
[[nodiscard]] double hellinger(std::span<const double> a, std::span<const double> b);
[[nodiscard]] double bhattacharyya(std::span<const double> a, std::span<const double> b);
[[nodiscard]] double kl_divergence(std::span<const double> target, std::span<const double> approx,
                                   double smoothing = kDefaultKlSmoothing);

/// d hellinger(a, b) / d a. Entries of `a` are floored at 1e-12 inside the
/// square-root derivative. Returns zeros when the distance is exactly zero.
[[nodiscard]] HistogramTensor hellinger_backward(const HistogramFeature& a, const HistogramFeature& b);

}  // namespace rgbuv
