#include "rgbuv/postproc.hpp"

#include <spdlog/spdlog.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "rgbuv/errors.hpp"

namespace rgbuv {

std::array<double, ColorMapping::kTerms> mapping_basis(double r, double g, double b) noexcept {
  return {1.0, r, g, b, r * r, g * g, b * b, r * g, r * b, g * b};
}

ColorMapping ColorMapping::identity() {
  ColorMapping m;
  for (std::size_t c = 0; c < 3; ++c) {
    m.coefficients[c][1 + c] = 1.0;
  }
  return m;
}

std::array<double, 3> ColorMapping::evaluate(double r, double g, double b) const noexcept {
  const auto basis = mapping_basis(r, g, b);
  std::array<double, 3> out{};
  for (std::size_t c = 0; c < 3; ++c) {
    double sum = 0.0;
    for (std::size_t k = 0; k < kTerms; ++k) {
      sum += coefficients[c][k] * basis[k];
    }
    out[c] = sum;
  }
  return out;
}

std::string ColorMapping::to_json() const {
  nlohmann::json j;
  j["kind"] = "global_poly";
  j["basis"] = {"1", "R", "G", "B", "R2", "G2", "B2", "RG", "RB", "GB"};
  auto coeffs = nlohmann::json::array();
  for (const auto& channel : coefficients) {
    for (const double v : channel) {
      coeffs.push_back(v);
    }
  }
  j["coefficients"] = coeffs;
  j["fit_residual"] = residual_rmse;
  j["constant_offset"] = constant_offset;
  return j.dump(2) + "\n";
}

ColorMapping ColorMapping::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("kind").get<std::string>() != "global_poly") {
      throw InvalidArgument("unsupported color mapping kind");
    }
    const auto& coeffs = j.at("coefficients");
    if (!coeffs.is_array() || coeffs.size() != 3 * kTerms) {
      throw InvalidArgument("color mapping needs 30 coefficients");
    }
    ColorMapping m;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      const double v = coeffs[i].get<double>();
      if (!std::isfinite(v)) {
        throw InvalidArgument("color mapping coefficients must be finite");
      }
      m.coefficients[i / kTerms][i % kTerms] = v;
    }
    m.residual_rmse = j.value("fit_residual", 0.0);
    m.constant_offset = j.value("constant_offset", false);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed color mapping JSON: ") + e.what());
  }
}

ColorMapping fit_mapping(const ImageBuffer& small_in, const ImageBuffer& small_out) {
  require_same_shape(small_in, small_out, "fit_mapping");
  const auto n = static_cast<Eigen::Index>(small_in.pixel_count());
  if (n < ColorMapping::kTerms) {
    throw InvalidArgument("fit_mapping needs at least 10 pixels");
  }
  const auto in = small_in.data();
  const auto out = small_out.data();

  Eigen::MatrixXd design(n, ColorMapping::kTerms);
  Eigen::MatrixXd target(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto p = static_cast<std::size_t>(i) * 3;
    const auto basis = mapping_basis(in[p], in[p + 1], in[p + 2]);
    for (Eigen::Index k = 0; k < ColorMapping::kTerms; ++k) {
      design(i, k) = basis[static_cast<std::size_t>(k)];
    }
    for (Eigen::Index c = 0; c < 3; ++c) {
      target(i, c) = out[p + static_cast<std::size_t>(c)];
    }
  }

  ColorMapping mapping;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < ColorMapping::kTerms) {
    spdlog::warn("color mapping fit is rank-deficient (rank {}); using a constant offset", qr.rank());
    mapping = ColorMapping::identity();
    mapping.constant_offset = true;
    for (Eigen::Index c = 0; c < 3; ++c) {
      double offset = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        offset += target(i, c) - design(i, 1 + c);
      }
      mapping.coefficients[static_cast<std::size_t>(c)][0] = offset / static_cast<double>(n);
    }
  } else {
    const Eigen::MatrixXd solution = qr.solve(target);
    for (Eigen::Index c = 0; c < 3; ++c) {
      for (Eigen::Index k = 0; k < ColorMapping::kTerms; ++k) {
        mapping.coefficients[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)] = solution(k, c);
      }
    }
  }

  double sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto p = static_cast<std::size_t>(i) * 3;
    const auto mapped = mapping.evaluate(in[p], in[p + 1], in[p + 2]);
    for (std::size_t c = 0; c < 3; ++c) {
      const double d = mapped[c] - out[p + c];
      sq += d * d;
    }
  }
  mapping.residual_rmse = std::sqrt(sq / static_cast<double>(n * 3));
  return mapping;
}

ImageBuffer apply_mapping(const ImageBuffer& full, const ColorMapping& mapping) {
  ImageBuffer out(full.height(), full.width());
  const auto src = full.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < full.pixel_count(); ++i) {
    const auto mapped = mapping.evaluate(src[i * 3], src[i * 3 + 1], src[i * 3 + 2]);
    for (std::size_t c = 0; c < 3; ++c) {
      dst[i * 3 + c] = mapped[c];
    }
  }
  out.clamp();
  return out;
}

ImageBuffer resize_bilinear(const ImageBuffer& image, int height, int width) {
  ImageBuffer out(height, width);
  const double sy = static_cast<double>(image.height()) / height;
  const double sx = static_cast<double>(image.width()) / width;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(image.height() - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height() - 1);
    const double ty = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(image.width() - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width() - 1);
      const double tx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = (1.0 - tx) * image.at(y0, x0, c) + tx * image.at(y0, x1, c);
        const double bottom = (1.0 - tx) * image.at(y1, x0, c) + tx * image.at(y1, x1, c);
        out.at(y, x, c) = (1.0 - ty) * top + ty * bottom;
      }
    }
  }
  out.clamp();
  return out;
}

HiresResult recolor_hires_detailed(const ImageBuffer& full, const HistogramFeature& h_target,
                                   const RecolorConfig& cfg, const HistogramParams& params) {
  HiresResult result;
  if (full.height() <= kWorkingResolution && full.width() <= kWorkingResolution) {
    result.working = recolor(full, h_target, cfg, params);
    result.image = result.working.image;
    result.mapping = ColorMapping::identity();
    result.delegated = true;
    return result;
  }
  result.working_input = resize_bilinear(full, kWorkingResolution, kWorkingResolution);
  result.working = recolor(result.working_input, h_target, cfg, params);
  result.mapping = fit_mapping(result.working_input, result.working.image);
  result.image = apply_mapping(full, result.mapping);
  return result;
}

ImageBuffer recolor_hires(const ImageBuffer& full, const HistogramFeature& h_target, const RecolorConfig& cfg,
                          const HistogramParams& params) {
  return recolor_hires_detailed(full, h_target, cfg, params).image;
}

namespace {

std::vector<double> sobel_magnitude_of_mean(const ImageBuffer& image) {
  const int h = image.height();
  const int w = image.width();
  auto lum = [&](int y, int x) {
    y = std::clamp(y, 0, h - 1);
    x = std::clamp(x, 0, w - 1);
    return (image.at(y, x, 0) + image.at(y, x, 1) + image.at(y, x, 2)) / 3.0;
  };
  std::vector<double> mag(image.pixel_count());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = (lum(y - 1, x + 1) + 2 * lum(y, x + 1) + lum(y + 1, x + 1)) -
                        (lum(y - 1, x - 1) + 2 * lum(y, x - 1) + lum(y + 1, x - 1));
      const double gy = (lum(y + 1, x - 1) + 2 * lum(y + 1, x) + lum(y + 1, x + 1)) -
                        (lum(y - 1, x - 1) + 2 * lum(y - 1, x) + lum(y - 1, x + 1));
      mag[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] =
          std::hypot(gx, gy);
    }
  }
  return mag;
}

}  // namespace

double edge_correlation(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b, "edge_correlation");
  const auto ma = sobel_magnitude_of_mean(a);
  const auto mb = sobel_magnitude_of_mean(b);
  const double n = static_cast<double>(ma.size());
  double mean_a = 0.0;
  double mean_b = 0.0;
  for (std::size_t i = 0; i < ma.size(); ++i) {
    mean_a += ma[i];
    mean_b += mb[i];
  }
  mean_a /= n;
  mean_b /= n;
  double cov = 0.0;
  double var_a = 0.0;
  double var_b = 0.0;
  for (std::size_t i = 0; i < ma.size(); ++i) {
    const double da = ma[i] - mean_a;
    const double db = mb[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) {
    return var_a == var_b ? 1.0 : 0.0;
  }
  return cov / std::sqrt(var_a * var_b);
}

}  // namespace rgbuv
