#include "rgbuv/recolor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <optional>
#include <random>
#include <sstream>

#include "rgbuv/errors.hpp"
#include "rgbuv/filters.hpp"
#include "rgbuv/metrics.hpp"

namespace rgbuv {

namespace {

double sign(double v) {
  return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
}

std::vector<filters::Kernel3> recon_kernels(ReconKernel kernel) {
  if (kernel == ReconKernel::laplacian) {
    return {filters::kLaplacian};
  }
  return {filters::kSobelX, filters::kSobelY};
}

std::array<double, 3> channel_stddevs(std::span<const double> blurred) {
  return {filters::channel_stddev(blurred, 0), filters::channel_stddev(blurred, 1),
          filters::channel_stddev(blurred, 2)};
}

void add_scaled(std::vector<double>& dst, std::span<const double> src, double scale) {
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] += scale * src[i];
  }
}

// Objective with every input-only quantity (filter responses, input
// histogram, blurred input statistics) computed once.
class Objective {
 public:
  struct Evaluation {
    LossBreakdown loss;
    detail::HistogramForward hist;
    std::vector<std::vector<double>> recon_diff;  // F(out) - F(in), per kernel
    std::vector<double> blurred;                  // blur(out), only when the variance term is active
    std::array<double, 3> stddev{};
  };

  Objective(const ImageBuffer& input, const HistogramFeature& target, const RecolorConfig& cfg,
            const HistogramParams& params)
      : input_(input), target_(target), cfg_(cfg), params_(params), kernels_(recon_kernels(cfg.recon_kernel)) {
    cfg_.validate();
    params_.validate();
    input_.validate();
    if (target_.bins() != params_.bins) {
      throw InvalidArgument("target histogram has " + std::to_string(target_.bins()) + " bins, expected " +
                            std::to_string(params_.bins));
    }
    w_ = histogram_l1(target_, compute_histogram(input_, params_));
    for (const auto& k : kernels_) {
      input_responses_.push_back(filters::filter3x3(input_.data(), input_.height(), input_.width(), k));
    }
    if (variance_active()) {
      input_stddev_ = channel_stddevs(
          filters::gaussian_blur(input_.data(), input_.height(), input_.width(), cfg_.blur_sigma));
    }
  }

  [[nodiscard]] double w() const noexcept { return w_; }

  [[nodiscard]] Evaluation evaluate(const ImageBuffer& output) const {
    require_same_shape(input_, output, "recolor objective");
    Evaluation ev;
    ev.hist = detail::histogram_forward(output, params_);
    ev.loss.hellinger_raw = hellinger(ev.hist.feature, target_);
    ev.loss.hist_term = cfg_.alpha * ev.loss.hellinger_raw;

    const double n = static_cast<double>(output.pixel_count());
    double recon = 0.0;
    for (std::size_t k = 0; k < kernels_.size(); ++k) {
      auto diff = filters::filter3x3(output.data(), output.height(), output.width(), kernels_[k]);
      for (std::size_t i = 0; i < diff.size(); ++i) {
        diff[i] -= input_responses_[k][i];
        recon += std::abs(diff[i]);
      }
      ev.recon_diff.push_back(std::move(diff));
    }
    ev.loss.recon_term = cfg_.beta * recon / n;

    ev.loss.w = w_;
    if (variance_active()) {
      ev.blurred = filters::gaussian_blur(output.data(), output.height(), output.width(), cfg_.blur_sigma);
      ev.stddev = channel_stddevs(ev.blurred);
      double spread = 0.0;
      for (std::size_t c = 0; c < 3; ++c) {
        spread += std::abs(input_stddev_[c] - ev.stddev[c]);
      }
      ev.loss.variance_term = cfg_.variance_weight_scale * (-w_ * spread);
    }
    ev.loss.total = ev.loss.hist_term + ev.loss.recon_term + ev.loss.variance_term;
    return ev;
  }

  // With kernel_tau > 0 the histogram term is differentiated as if its
  // kernel had that width; the forward values are unchanged.
  [[nodiscard]] ObjectiveGradient gradient(const ImageBuffer& output, const Evaluation& ev,
                                           double kernel_tau = 0.0) const {
    ObjectiveGradient g{PixelGradient::zeros_like(output), PixelGradient::zeros_like(output),
                        PixelGradient::zeros_like(output), PixelGradient::zeros_like(output)};
    const double n = static_cast<double>(output.pixel_count());

    if (cfg_.alpha != 0.0) {
      HistogramTensor upstream = hellinger_backward(ev.hist.feature, target_);
      for (double& v : upstream.values()) {
        v *= cfg_.alpha;
      }
      HistogramParams backward_params = params_;
      if (kernel_tau > 0.0) {
        backward_params.tau = kernel_tau;
      }
      g.hist = detail::histogram_backward(output, backward_params, ev.hist, upstream);
    }

    if (cfg_.beta != 0.0) {
      for (std::size_t k = 0; k < kernels_.size(); ++k) {
        std::vector<double> signs(ev.recon_diff[k].size());
        std::transform(ev.recon_diff[k].begin(), ev.recon_diff[k].end(), signs.begin(), sign);
        const auto back = filters::filter3x3_adjoint(signs, output.height(), output.width(), kernels_[k]);
        add_scaled(g.recon.data, back, cfg_.beta / n);
      }
    }

    if (variance_active()) {
      // d std / d y_j = (y_j - mean) / (n * std)
      std::vector<double> upstream(ev.blurred.size(), 0.0);
      for (int c = 0; c < 3; ++c) {
        const auto cu = static_cast<std::size_t>(c);
        const double sd = ev.stddev[cu];
        const double coef = -cfg_.variance_weight_scale * w_ * sign(ev.stddev[cu] - input_stddev_[cu]);
        if (coef == 0.0 || sd == 0.0) {
          continue;
        }
        double mean = 0.0;
        for (std::size_t i = 0; i < output.pixel_count(); ++i) {
          mean += ev.blurred[i * 3 + cu];
        }
        mean /= n;
        for (std::size_t i = 0; i < output.pixel_count(); ++i) {
          upstream[i * 3 + cu] = coef * (ev.blurred[i * 3 + cu] - mean) / (n * sd);
        }
      }
      g.variance.data = filters::gaussian_blur_adjoint(upstream, output.height(), output.width(), cfg_.blur_sigma);
    }

    for (std::size_t i = 0; i < g.total.data.size(); ++i) {
      g.total.data[i] = g.hist.data[i] + g.recon.data[i] + g.variance.data[i];
    }
    return g;
  }

 private:
  [[nodiscard]] bool variance_active() const noexcept { return cfg_.variance_weight_scale != 0.0 && w_ != 0.0; }

  const ImageBuffer& input_;
  const HistogramFeature& target_;
  RecolorConfig cfg_;
  HistogramParams params_;
  std::vector<filters::Kernel3> kernels_;
  std::vector<std::vector<double>> input_responses_;
  std::array<double, 3> input_stddev_{};
  double w_ = 0.0;
};

double filtered_l1(const ImageBuffer& input, const ImageBuffer& output, const filters::Kernel3& kernel) {
  const auto a = filters::filter3x3(input.data(), input.height(), input.width(), kernel);
  const auto b = filters::filter3x3(output.data(), output.height(), output.width(), kernel);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += std::abs(a[i] - b[i]);
  }
  return sum;
}

}  // namespace

const char* to_string(ReconKernel kernel) noexcept {
  return kernel == ReconKernel::laplacian ? "laplacian" : "sobel";
}

ReconKernel parse_recon_kernel(const std::string& name) {
  if (name == "laplacian") {
    return ReconKernel::laplacian;
  }
  if (name == "sobel") {
    return ReconKernel::sobel;
  }
  throw InvalidArgument("unknown reconstruction kernel '" + name + "' (expected laplacian or sobel)");
}

void RecolorConfig::validate() const {
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!finite_nonneg(alpha) || !finite_nonneg(beta) || !finite_nonneg(variance_weight_scale)) {
    throw InvalidArgument("loss weights must be finite and non-negative");
  }
  if (iterations < 1) {
    throw InvalidArgument("iterations must be >= 1");
  }
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw InvalidArgument("step size must be positive");
  }
  if (!(blur_sigma > 0.0) || !std::isfinite(blur_sigma)) {
    throw InvalidArgument("blur sigma must be positive");
  }
  if (!finite_nonneg(precondition_sigma)) {
    throw InvalidArgument("precondition sigma must be non-negative");
  }
  if (!finite_nonneg(direction_tau)) {
    throw InvalidArgument("direction tau must be non-negative");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw InvalidArgument("momentum must lie in [0, 1)");
  }
  if (!finite_nonneg(jitter) || max_backtracks < 0 || !finite_nonneg(increase_tolerance)) {
    throw InvalidArgument("invalid optimizer settings");
  }
}

double laplacian_loss(const ImageBuffer& input, const ImageBuffer& output) {
  require_same_shape(input, output, "laplacian_loss");
  return filtered_l1(input, output, filters::kLaplacian) / static_cast<double>(input.pixel_count());
}

double sobel_loss(const ImageBuffer& input, const ImageBuffer& output) {
  require_same_shape(input, output, "sobel_loss");
  return (filtered_l1(input, output, filters::kSobelX) + filtered_l1(input, output, filters::kSobelY)) /
         static_cast<double>(input.pixel_count());
}

double reconstruction_loss(const ImageBuffer& input, const ImageBuffer& output, ReconKernel kernel) {
  return kernel == ReconKernel::laplacian ? laplacian_loss(input, output) : sobel_loss(input, output);
}

PixelGradient reconstruction_loss_gradient(const ImageBuffer& input, const ImageBuffer& output,
                                           ReconKernel kernel) {
  require_same_shape(input, output, "reconstruction_loss_gradient");
  PixelGradient grad = PixelGradient::zeros_like(output);
  const double n = static_cast<double>(output.pixel_count());
  for (const auto& k : recon_kernels(kernel)) {
    const auto a = filters::filter3x3(input.data(), input.height(), input.width(), k);
    auto diff = filters::filter3x3(output.data(), output.height(), output.width(), k);
    for (std::size_t i = 0; i < diff.size(); ++i) {
      diff[i] = sign(diff[i] - a[i]);
    }
    add_scaled(grad.data, filters::filter3x3_adjoint(diff, output.height(), output.width(), k), 1.0 / n);
  }
  return grad;
}

double histogram_l1(const HistogramFeature& a, const HistogramFeature& b) {
  if (a.bins() != b.bins()) {
    throw InvalidArgument("histogram_l1: histogram shapes differ");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += std::abs(a[i] - b[i]);
  }
  return sum;
}

double variance_loss(const ImageBuffer& input, const ImageBuffer& output, const HistogramFeature& h_in,
                     const HistogramFeature& h_target, double sigma) {
  require_same_shape(input, output, "variance_loss");
  const double w = histogram_l1(h_target, h_in);
  const auto in_sd = channel_stddevs(filters::gaussian_blur(input.data(), input.height(), input.width(), sigma));
  const auto out_sd =
      channel_stddevs(filters::gaussian_blur(output.data(), output.height(), output.width(), sigma));
  double spread = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    spread += std::abs(in_sd[c] - out_sd[c]);
  }
  return -w * spread;
}

LossBreakdown recolor_objective(const ImageBuffer& input, const ImageBuffer& output,
                                const HistogramFeature& h_target, const RecolorConfig& cfg,
                                const HistogramParams& params) {
  const Objective objective(input, h_target, cfg, params);
  return objective.evaluate(output).loss;
}

ObjectiveGradient recolor_objective_gradient(const ImageBuffer& input, const ImageBuffer& output,
                                             const HistogramFeature& h_target, const RecolorConfig& cfg,
                                             const HistogramParams& params) {
  const Objective objective(input, h_target, cfg, params);
  return objective.gradient(output, objective.evaluate(output));
}

RecolorResult recolor(const ImageBuffer& input, const HistogramFeature& h_target, const RecolorConfig& cfg,
                      const HistogramParams& params) {
  const Objective objective(input, h_target, cfg, params);
  ImageBuffer current = input;
  if (cfg.jitter > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    for (double& v : current.data()) {
      const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      v += cfg.jitter * (2.0 * unit - 1.0);
    }
    current.clamp();
  }

  auto check_finite = [](const LossBreakdown& loss, int iteration) {
    if (!std::isfinite(loss.total)) {
      throw NumericalFailure("non-finite recoloring loss", iteration);
    }
  };

  Objective::Evaluation ev = objective.evaluate(current);
  check_finite(ev.loss, 0);

  RecolorResult result;
  result.trace.reserve(static_cast<std::size_t>(cfg.iterations) + 1);
  result.trace.push_back(ev.loss);
  const double start_hellinger = ev.loss.hellinger_raw;
  ImageBuffer fallback = current;

  const double n = static_cast<double>(input.pixel_count());
  std::vector<double> velocity(current.size(), 0.0);
  double step = cfg.step_size;
  ImageBuffer candidate = current;

  for (int it = 1; it <= cfg.iterations; ++it) {
    PixelGradient grad = objective.gradient(current, ev, cfg.direction_tau).total;
    if (cfg.precondition_sigma > 0.0) {
      grad.data = filters::gaussian_blur(
          filters::gaussian_blur_adjoint(grad.data, current.height(), current.width(), cfg.precondition_sigma),
          current.height(), current.width(), cfg.precondition_sigma);
    }
    bool accepted = false;
    for (int attempt = 0; attempt <= cfg.max_backtracks && !accepted; ++attempt) {
      auto cand = candidate.data();
      const auto cur = current.data();
      for (std::size_t i = 0; i < cand.size(); ++i) {
        cand[i] = cur[i] + cfg.momentum * velocity[i] - step * n * grad.data[i];
      }
      candidate.clamp();
      Objective::Evaluation trial = objective.evaluate(candidate);
      check_finite(trial.loss, it);
      if (trial.loss.total <= ev.loss.total + cfg.increase_tolerance) {
        for (std::size_t i = 0; i < cand.size(); ++i) {
          velocity[i] = cand[i] - cur[i];
        }
        std::swap(current, candidate);
        ev = std::move(trial);
        accepted = true;
        if (attempt == 0) {
          step = cfg.step_size;
        }
      } else {
        step *= 0.5;
        std::fill(velocity.begin(), velocity.end(), 0.0);
      }
    }
    result.trace.push_back(ev.loss);
    if (ev.loss.hellinger_raw <= start_hellinger) {
      fallback = current;
    }
  }

  result.image = ev.loss.hellinger_raw <= start_hellinger ? std::move(current) : std::move(fallback);
  return result;
}

std::string trace_to_csv(const std::vector<LossBreakdown>& trace) {
  std::ostringstream out;
  out << "iteration,total,hist_term,recon_term,variance_term,hellinger_raw,w\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& t = trace[i];
    out << i << ',' << t.total << ',' << t.hist_term << ',' << t.recon_term << ',' << t.variance_term << ','
        << t.hellinger_raw << ',' << t.w << '\n';
  }
  return out.str();
}

}  // namespace rgbuv
