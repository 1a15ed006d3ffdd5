#pragma once

// Seeded image generators shared by the unit and acceptance suites.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "rgbuv/histogram.hpp"
#include "rgbuv/image.hpp"

namespace rgbuv::testing {

inline ImageBuffer random_image(int height, int width, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  ImageBuffer image(height, width);
  for (double& v : image.data()) {
    v = dist(rng);
  }
  return image;
}

inline ImageBuffer constant_image(int height, int width, double r, double g, double b) {
  ImageBuffer image(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      image.at(y, x, 0) = r;
      image.at(y, x, 1) = g;
      image.at(y, x, 2) = b;
    }
  }
  return image;
}

using Palette = std::vector<std::array<double, 3>>;

inline const Palette& warm_palette() {
  static const Palette p{{0.85, 0.45, 0.20}, {0.95, 0.75, 0.35}, {0.60, 0.25, 0.15}, {0.90, 0.60, 0.50}};
  return p;
}

inline const Palette& cool_palette() {
  static const Palette p{{0.20, 0.45, 0.80}, {0.30, 0.70, 0.60}, {0.15, 0.25, 0.55}, {0.55, 0.80, 0.90}};
  return p;
}

inline const Palette& forest_palette() {
  static const Palette p{{0.25, 0.45, 0.20}, {0.55, 0.65, 0.30}, {0.35, 0.30, 0.20}, {0.70, 0.80, 0.55}};
  return p;
}

/// Smooth synthetic scene: a vertical gradient between two palette colors,
/// a handful of soft blobs in other palette colors, and light seeded grain.
inline ImageBuffer scene_image(int height, int width, std::uint64_t seed, const Palette& palette,
                               double grain = 0.02) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, palette.size() - 1);
  std::normal_distribution<double> noise(0.0, grain);

  const auto top = palette[pick(rng)];
  const auto bottom = palette[pick(rng)];
  struct Blob {
    double cy, cx, radius;
    std::array<double, 3> color;
  };
  std::vector<Blob> blobs;
  for (int i = 0; i < 5; ++i) {
    blobs.push_back({unit(rng) * height, unit(rng) * width, (0.12 + 0.2 * unit(rng)) * std::min(height, width),
                     palette[pick(rng)]});
  }

  ImageBuffer image(height, width);
  for (int y = 0; y < height; ++y) {
    const double t = height > 1 ? static_cast<double>(y) / (height - 1) : 0.0;
    for (int x = 0; x < width; ++x) {
      std::array<double, 3> color{};
      for (std::size_t c = 0; c < 3; ++c) {
        color[c] = (1.0 - t) * top[c] + t * bottom[c];
      }
      for (const auto& blob : blobs) {
        const double dy = (y - blob.cy) / blob.radius;
        const double dx = (x - blob.cx) / blob.radius;
        const double a = std::exp(-(dx * dx + dy * dy));
        for (std::size_t c = 0; c < 3; ++c) {
          color[c] = (1.0 - a) * color[c] + a * blob.color[c];
        }
      }
      for (int c = 0; c < 3; ++c) {
        image.at(y, x, c) = std::clamp(color[static_cast<std::size_t>(c)] + noise(rng), 0.02, 0.98);
      }
    }
  }
  return image;
}

/// Hard-edged synthetic scene: Voronoi cells, each a palette color at a
/// random brightness, under a soft diagonal shading, with light grain. The
/// layout is defined in relative coordinates so any size shows the same scene.
inline ImageBuffer mosaic_image(int height, int width, std::uint64_t seed, const Palette& palette, int cells = 14,
                                double grain = 0.01) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, palette.size() - 1);
  std::normal_distribution<double> noise(0.0, grain);
  struct Cell {
    double y, x, gain;
    std::array<double, 3> color;
  };
  std::vector<Cell> sites;
  for (int i = 0; i < cells; ++i) {
    sites.push_back({unit(rng), unit(rng), 0.7 + 0.4 * unit(rng), palette[pick(rng)]});
  }
  ImageBuffer image(height, width);
  for (int y = 0; y < height; ++y) {
    const double ry = (y + 0.5) / height;
    for (int x = 0; x < width; ++x) {
      const double rx = (x + 0.5) / width;
      const Cell* nearest = &sites.front();
      double best = 1e9;
      for (const auto& cell : sites) {
        const double d = (cell.y - ry) * (cell.y - ry) + (cell.x - rx) * (cell.x - rx);
        if (d < best) {
          best = d;
          nearest = &cell;
        }
      }
      const double shade = 0.85 + 0.3 * (1.0 - 0.5 * (rx + ry));
      for (int c = 0; c < 3; ++c) {
        const double v = nearest->color[static_cast<std::size_t>(c)] * nearest->gain * shade + noise(rng);
        image.at(y, x, c) = std::clamp(v, 0.02, 0.98);
      }
    }
  }
  return image;
}

/// The recoloring fixture pair: a warm scene and the histogram source, a cool scene.
inline ImageBuffer fixture_input(int size = 64) {
  return scene_image(size, size, 20201, warm_palette());
}

inline ImageBuffer fixture_target_image(int size = 64) {
  return scene_image(size, size, 40402, cool_palette());
}

/// Random normalized histogram-shaped tensor (strictly positive entries).
inline HistogramFeature random_feature(int bins, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.01, 1.0);
  HistogramTensor t(bins);
  for (double& v : t.values()) {
    v = dist(rng);
  }
  return HistogramFeature::normalize(std::move(t));
}

/// Sparse random histogram: most bins exactly zero.
inline HistogramFeature random_sparse_feature(int bins, std::uint64_t seed, double density = 0.2) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  HistogramTensor t(bins);
  for (double& v : t.values()) {
    v = dist(rng) < density ? dist(rng) : 0.0;
  }
  t[0] += 1e-3;
  return HistogramFeature::normalize(std::move(t));
}

inline HistogramFeature one_hot(int bins, std::size_t index) {
  HistogramTensor t(bins);
  t[index] = 1.0;
  return HistogramFeature(std::move(t));
}

}  // namespace rgbuv::testing
