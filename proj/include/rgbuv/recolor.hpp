#pragma once

// Histogram-driven recoloring by projected momentum gradient descent on the
// output pixels, along a spatially smoothed gradient. The objective is
//
//   alpha * hellinger(H(out), H_target)      color matching
// + beta  * R(in, out)                       structure (Laplacian or Sobel L1)
// + variance_weight_scale * V(in, out)       discourages a global color cast
//
// with V = -w * sum_c |std(blur(in_c)) - std(blur(out_c))| and
// w = || H_target - H(in) ||_1.

#include <cstdint>
#include <string>
#include <vector>

#include "rgbuv/histogram.hpp"
#include "rgbuv/image.hpp"

namespace rgbuv {

enum class ReconKernel { laplacian, sobel };

[[nodiscard]] const char* to_string(ReconKernel kernel) noexcept;
/// Accepts "laplacian" or "sobel"; throws InvalidArgument otherwise.
[[nodiscard]] ReconKernel parse_recon_kernel(const std::string& name);

struct RecolorConfig {
  double alpha = 2.0;
  double beta = 1.5;
  double variance_weight_scale = 1.0;
  ReconKernel recon_kernel = ReconKernel::laplacian;
  double blur_sigma = 15.0;  ///< Gaussian standard deviation in pixels
  int iterations = 400;
  double step_size = 0.05;   ///< per-pixel step for a unit per-pixel gradient
  double momentum = 0.9;
  /// Standard deviation (pixels) of the Gaussian B in the gradient smoother
  /// B B^T; 0 uses the raw gradient.
  double precondition_sigma = 2.0;
  /// Kernel width used when differentiating the histogram term for the step
  /// direction (0 keeps the histogram's own tau). Steps are still accepted
  /// or rejected on the exact objective.
  double direction_tau = 0.05;
  double jitter = 0.0;       ///< amplitude of the seeded uniform start perturbation
  std::uint64_t seed = 0;
  int max_backtracks = 8;
  double increase_tolerance = 0.0;  ///< accepted steps may raise the total by at most this

  void validate() const;
};

struct LossBreakdown {
  double total = 0.0;
  double hist_term = 0.0;      ///< alpha * hellinger
  double recon_term = 0.0;     ///< beta * R
  double variance_term = 0.0;  ///< variance_weight_scale * V
  double hellinger_raw = 0.0;
  double w = 0.0;
};

/// Mean over pixels of the L1 difference of 3x3 Laplacian responses (summed over channels).
[[nodiscard]] double laplacian_loss(const ImageBuffer& input, const ImageBuffer& output);

/// As laplacian_loss, summing both Sobel responses.
[[nodiscard]] double sobel_loss(const ImageBuffer& input, const ImageBuffer& output);

[[nodiscard]] double reconstruction_loss(const ImageBuffer& input, const ImageBuffer& output, ReconKernel kernel);

/// Gradient of reconstruction_loss with respect to `output` (sign(0) = 0).
[[nodiscard]] PixelGradient reconstruction_loss_gradient(const ImageBuffer& input, const ImageBuffer& output,
                                                         ReconKernel kernel);

[[nodiscard]] double variance_loss(const ImageBuffer& input, const ImageBuffer& output,
                                   const HistogramFeature& h_in, const HistogramFeature& h_target, double sigma);

/// w = || a - b ||_1.
[[nodiscard]] double histogram_l1(const HistogramFeature& a, const HistogramFeature& b);

[[nodiscard]] LossBreakdown recolor_objective(const ImageBuffer& input, const ImageBuffer& output,
                                              const HistogramFeature& h_target, const RecolorConfig& cfg,
                                              const HistogramParams& params);

/// Per-term gradients with respect to `output`; weights are already applied.
struct ObjectiveGradient {
  PixelGradient total;
  PixelGradient hist;
  PixelGradient recon;
  PixelGradient variance;
};

[[nodiscard]] ObjectiveGradient recolor_objective_gradient(const ImageBuffer& input, const ImageBuffer& output,
                                                           const HistogramFeature& h_target,
                                                           const RecolorConfig& cfg, const HistogramParams& params);

struct RecolorResult {
  ImageBuffer image;
  /// trace[0] is the starting point; trace[i] the state after iteration i.
  std::vector<LossBreakdown> trace;
};

/// Starts from the input (plus optional jitter) and runs cfg.iterations steps
/// of momentum descent, clamping to [0,1] after each step. A step that raises
/// the total by more than cfg.increase_tolerance is retried with half the step
/// size and zero momentum, up to cfg.max_backtracks times, then skipped. The
/// step size returns to cfg.step_size after a step accepted at first try.
/// If the final Hellinger distance is above the starting one, the last
/// iterate that did not exceed it is returned instead.
/// Throws NumericalFailure if the loss becomes non-finite.
[[nodiscard]] RecolorResult recolor(const ImageBuffer& input, const HistogramFeature& h_target,
                                    const RecolorConfig& cfg, const HistogramParams& params);

/// CSV with header iteration,total,hist_term,recon_term,variance_term,hellinger_raw,w.
[[nodiscard]] std::string trace_to_csv(const std::vector<LossBreakdown>& trace);

}  // namespace rgbuv
