#include "rgbuv/histogram.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rgbuv/errors.hpp"

namespace rgbuv {

namespace {

using Matrix = Eigen::MatrixXd;

// Neumaier-compensated sum.
double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double carry = 0.0;
  for (const double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  return sum + carry;
}

std::vector<double> bin_centers(const HistogramParams& params) {
  std::vector<double> centers(static_cast<std::size_t>(params.bins));
  for (int i = 0; i < params.bins; ++i) {
    centers[static_cast<std::size_t>(i)] = params.bin_center(i);
  }
  return centers;
}

// Pixel indices sorted by color so that reductions over pixels do not depend
// on where each color sits in the image.
std::vector<std::size_t> canonical_order(const ImageBuffer& image) {
  const auto px = image.data();
  std::vector<std::size_t> order(image.pixel_count());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double* pa = px.data() + a * 3;
    const double* pb = px.data() + b * 3;
    return std::lexicographical_compare(pa, pa + 3, pb, pb + 3);
  });
  return order;
}

Eigen::VectorXd gather(const std::vector<double>& values, const std::vector<std::size_t>* order) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(values.size()));
  for (std::size_t r = 0; r < values.size(); ++r) {
    out(static_cast<Eigen::Index>(r)) = order ? values[(*order)[r]] : values[r];
  }
  return out;
}

// Fills `out` (pixels x bins) with the 1-D inverse-quadratic factor
// (1 + ((x - center)/tau)^2)^-1 for every coordinate.
void fill_kernel(Matrix& out, const Eigen::VectorXd& coords, const std::vector<double>& centers, double tau) {
  const Eigen::Index n = coords.size();
  const double inv_tau = 1.0 / tau;
  out.resize(n, static_cast<Eigen::Index>(centers.size()));
  const double* x = coords.data();
  for (Eigen::Index b = 0; b < out.cols(); ++b) {
    const double center = centers[static_cast<std::size_t>(b)];
    double* col = out.col(b).data();
    for (Eigen::Index r = 0; r < n; ++r) {
      const double d = (x[r] - center) * inv_tau;
      col[r] = 1.0 / (1.0 + d * d);
    }
  }
}

// Row-wise sums of k * a (into `plain`, when given) and of dk/dx * a (into
// `slope`), where dk/dx = -2 (x - center) / tau^2 * k^2.
void reduce_rows(const Matrix& k, const Matrix& a, const Eigen::VectorXd& coords, const std::vector<double>& centers,
                 double tau, Eigen::VectorXd* plain, Eigen::VectorXd& slope) {
  const Eigen::Index n = k.rows();
  const double scale = -2.0 / (tau * tau);
  slope.setZero(n);
  if (plain) {
    plain->setZero(n);
  }
  const double* x = coords.data();
  double* sl = slope.data();
  for (Eigen::Index b = 0; b < k.cols(); ++b) {
    const double center = centers[static_cast<std::size_t>(b)];
    const double* kc = k.col(b).data();
    const double* ac = a.col(b).data();
    for (Eigen::Index r = 0; r < n; ++r) {
      sl[r] += scale * (x[r] - center) * kc[r] * kc[r] * ac[r];
    }
    if (plain) {
      double* pl = plain->data();
      for (Eigen::Index r = 0; r < n; ++r) {
        pl[r] += kc[r] * ac[r];
      }
    }
  }
}

}  // namespace

void HistogramParams::validate() const {
  if (bins < 2) {
    throw InvalidArgument("histogram bins must be >= 2");
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw InvalidArgument("tau must be positive");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidArgument("epsilon must be positive");
  }
  if (!std::isfinite(uv_min) || !std::isfinite(uv_max) || !(uv_min < uv_max)) {
    throw InvalidArgument("uv_min must be below uv_max");
  }
}

HistogramTensor::HistogramTensor(int bins) : bins_(bins) {
  if (bins < 1) {
    throw InvalidArgument("histogram bins must be positive");
  }
  values_.assign(static_cast<std::size_t>(bins) * static_cast<std::size_t>(bins) * 3, 0.0);
}

HistogramTensor::HistogramTensor(int bins, std::vector<double> values) : bins_(bins), values_(std::move(values)) {
  if (bins < 1) {
    throw InvalidArgument("histogram bins must be positive");
  }
  if (values_.size() != static_cast<std::size_t>(bins) * static_cast<std::size_t>(bins) * 3) {
    throw InvalidArgument("histogram tensor length does not match bins");
  }
}

HistogramFeature::HistogramFeature(HistogramTensor tensor) : tensor_(std::move(tensor)) {
  for (const double v : tensor_.values()) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidArgument("histogram entries must be finite and non-negative");
    }
  }
  const double total = compensated_sum(tensor_.values());
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw InvalidArgument("histogram does not sum to one (sum = " + std::to_string(total) + ")");
  }
}

HistogramFeature HistogramFeature::normalize(HistogramTensor tensor) {
  for (const double v : tensor.values()) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidArgument("histogram entries must be finite and non-negative");
    }
  }
  const double total = compensated_sum(tensor.values());
  if (!(total > 0.0)) {
    throw DegenerateImage();
  }
  for (double& v : tensor.values()) {
    v /= total;
  }
  HistogramFeature out;
  out.tensor_ = std::move(tensor);
  return out;
}

LogChromaPlanes project_log_chroma(const ImageBuffer& image, const HistogramParams& params) {
  params.validate();
  image.validate();
  const std::size_t n = image.pixel_count();
  LogChromaPlanes planes;
  planes.height = image.height();
  planes.width = image.width();
  for (std::size_t c = 0; c < 3; ++c) {
    planes.u[c].resize(n);
    planes.v[c].resize(n);
  }
  planes.intensity.resize(n);

  const auto px = image.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* p = px.data() + i * 3;
    std::array<double, 3> logs{};
    for (std::size_t c = 0; c < 3; ++c) {
      logs[c] = std::log(p[c] + params.epsilon);
    }
    for (std::size_t c = 0; c < 3; ++c) {
      planes.u[c][i] = logs[c] - logs[static_cast<std::size_t>(kUPartner[c])];
      planes.v[c][i] = logs[c] - logs[static_cast<std::size_t>(kVPartner[c])];
    }
    planes.intensity[i] = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
  }
  return planes;
}

namespace detail {

HistogramForward histogram_forward(const ImageBuffer& image, const HistogramParams& params) {
  const LogChromaPlanes planes = project_log_chroma(image, params);
  const auto order = canonical_order(image);
  const auto centers = bin_centers(params);
  const int h = params.bins;

  const Eigen::VectorXd weight = gather(planes.intensity, &order);

  HistogramTensor raw(h);
  Matrix ku;
  Matrix kv;
  Matrix plane(h, h);
  for (std::size_t c = 0; c < 3; ++c) {
    fill_kernel(ku, gather(planes.u[c], &order), centers, params.tau);
    fill_kernel(kv, gather(planes.v[c], &order), centers, params.tau);
    ku.array().colwise() *= weight.array();
    plane.noalias() = ku.transpose() * kv;
    for (int u = 0; u < h; ++u) {
      for (int v = 0; v < h; ++v) {
        raw.at(u, v, static_cast<int>(c)) = plane(u, v);
      }
    }
  }

  HistogramForward out;
  out.total = compensated_sum(raw.values());
  out.feature = HistogramFeature::normalize(std::move(raw));
  return out;
}

PixelGradient histogram_backward(const ImageBuffer& image, const HistogramParams& params,
                                 const HistogramForward& forward, const HistogramTensor& upstream) {
  const int h = params.bins;
  if (upstream.bins() != h || forward.feature.bins() != h) {
    throw InvalidArgument("upstream gradient has " + std::to_string(upstream.bins()) + " bins, expected " +
                          std::to_string(h));
  }
  for (const double g : upstream.values()) {
    if (!std::isfinite(g)) {
      throw InvalidArgument("upstream gradient must be finite");
    }
  }

  PixelGradient grad = PixelGradient::zeros_like(image);
  if (std::all_of(upstream.values().begin(), upstream.values().end(), [](double g) { return g == 0.0; })) {
    return grad;
  }

  const LogChromaPlanes planes = project_log_chroma(image, params);
  const auto centers = bin_centers(params);
  const std::size_t n = image.pixel_count();

  // Gradient with respect to the unnormalized histogram: (g - <g, H>) / total.
  double projection = 0.0;
  for (std::size_t i = 0; i < upstream.size(); ++i) {
    projection += upstream[i] * forward.feature[i];
  }

  std::vector<double> grad_intensity(n, 0.0);
  std::array<std::vector<double>, 3> grad_u;
  std::array<std::vector<double>, 3> grad_v;

  Matrix ku;
  Matrix kv;
  Matrix along_u;
  Matrix along_v;
  Eigen::VectorXd s_intensity;
  Eigen::VectorXd s_u;
  Eigen::VectorXd s_v;
  Matrix raw_grad(h, h);
  for (std::size_t c = 0; c < 3; ++c) {
    for (int u = 0; u < h; ++u) {
      for (int v = 0; v < h; ++v) {
        raw_grad(u, v) = (upstream.at(u, v, static_cast<int>(c)) - projection) / forward.total;
      }
    }
    const Eigen::VectorXd u_coords = gather(planes.u[c], nullptr);
    const Eigen::VectorXd v_coords = gather(planes.v[c], nullptr);
    fill_kernel(ku, u_coords, centers, params.tau);
    fill_kernel(kv, v_coords, centers, params.tau);

    along_u.noalias() = kv * raw_grad.transpose();  // (pixel, u)
    along_v.noalias() = ku * raw_grad;              // (pixel, v)
    reduce_rows(ku, along_u, u_coords, centers, params.tau, &s_intensity, s_u);
    reduce_rows(kv, along_v, v_coords, centers, params.tau, nullptr, s_v);

    grad_u[c].resize(n);
    grad_v[c].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      grad_intensity[i] += s_intensity(r);
      grad_u[c][i] = planes.intensity[i] * s_u(r);
      grad_v[c][i] = planes.intensity[i] * s_v(r);
    }
  }

  const auto px = image.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* p = px.data() + i * 3;
    double* g = grad.data.data() + i * 3;
    const double iy = planes.intensity[i];
    if (iy > 0.0) {
      for (int c = 0; c < 3; ++c) {
        g[c] += grad_intensity[i] * p[c] / iy;
      }
    }
    for (std::size_t c = 0; c < 3; ++c) {
      const double gu = grad_u[c][i];
      const double gv = grad_v[c][i];
      const auto pu = static_cast<std::size_t>(kUPartner[c]);
      const auto pv = static_cast<std::size_t>(kVPartner[c]);
      g[c] += (gu + gv) / (p[c] + params.epsilon);
      g[pu] -= gu / (p[pu] + params.epsilon);
      g[pv] -= gv / (p[pv] + params.epsilon);
    }
  }
  return grad;
}

}  // namespace detail

HistogramFeature compute_histogram(const ImageBuffer& image, const HistogramParams& params) {
  return detail::histogram_forward(image, params).feature;
}

PixelGradient histogram_backward(const ImageBuffer& image, const HistogramParams& params,
                                 const HistogramTensor& upstream) {
  return detail::histogram_backward(image, params, detail::histogram_forward(image, params), upstream);
}

}  // namespace rgbuv
