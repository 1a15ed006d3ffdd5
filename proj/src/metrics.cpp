#include "rgbuv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rgbuv/errors.hpp"

namespace rgbuv {

namespace {

constexpr double kSqrtFloor = 1e-12;

void require_same_length(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) {
    throw InvalidArgument(std::string(what) + ": histogram shapes differ (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + " entries)");
  }
}

double squared_root_difference(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::sqrt(a[i]) - std::sqrt(b[i]);
    sum += d * d;
  }
  return sum;
}

}  // namespace

double hellinger(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, "hellinger");
  return std::min(1.0, std::sqrt(0.5 * squared_root_difference(a, b)));
}

double bhattacharyya(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, "bhattacharyya");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += std::sqrt(a[i] * b[i]);
  }
  return std::clamp(sum, 0.0, 1.0);
}

double kl_divergence(std::span<const double> target, std::span<const double> approx, double smoothing) {
  require_same_length(target, approx, "kl_divergence");
  if (!(smoothing > 0.0) || !std::isfinite(smoothing)) {
    throw InvalidArgument("kl_divergence: smoothing must be positive");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double t = target[i];
    if (t > 0.0) {
      sum += t * std::log((t + smoothing) / (approx[i] + smoothing));
    }
  }
  return std::max(0.0, sum);
}

double hellinger(const HistogramFeature& a, const HistogramFeature& b) {
  return hellinger(a.values(), b.values());
}

double bhattacharyya(const HistogramFeature& a, const HistogramFeature& b) {
  return bhattacharyya(a.values(), b.values());
}

double kl_divergence(const HistogramFeature& target, const HistogramFeature& approx, double smoothing) {
  return kl_divergence(target.values(), approx.values(), smoothing);
}

HistogramTensor hellinger_backward(const HistogramFeature& a, const HistogramFeature& b) {
  require_same_length(a.values(), b.values(), "hellinger_backward");
  HistogramTensor grad(a.bins());
  const double distance = std::sqrt(0.5 * squared_root_difference(a.values(), b.values()));
  if (distance == 0.0) {
    return grad;
  }
  const double scale = 1.0 / (4.0 * distance);
  for (std::size_t i = 0; i < a.size(); ++i) {
    grad[i] = scale * (std::sqrt(a[i]) - std::sqrt(b[i])) / std::sqrt(std::max(a[i], kSqrtFloor));
  }
  return grad;
}

}  // namespace rgbuv
