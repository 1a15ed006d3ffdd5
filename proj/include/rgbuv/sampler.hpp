#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "rgbuv/histogram.hpp"

namespace rgbuv {

/// delta * h1 + (1 - delta) * h2. Throws InvalidArgument on shape mismatch or delta outside [0, 1].
[[nodiscard]] HistogramFeature interpolate(const HistogramFeature& h1, const HistogramFeature& h2, double delta);

struct PoolEntry {
  std::string id;
  HistogramFeature feature;
};

struct SampledTarget {
  HistogramFeature feature;
  std::size_t first = 0;   ///< index of H1
  std::size_t second = 0;  ///< index of H2
  double delta = 1.0;
};

/// A set of reference histograms plus the seeded generator used to draw
/// interpolated targets from it.
///
/// Each draw consumes three 64-bit outputs of std::mt19937_64, each mapped to
/// a double in [0, 1) as (x >> 11) * 2^-53: the first picks H1 uniformly, the
/// second picks H2 uniformly among the remaining entries, the third is delta.
/// A single-entry pool returns that entry without consuming any output.
class HistogramPool {
 public:
  explicit HistogramPool(std::uint64_t seed = 0) : seed_(seed), rng_(seed) {}

  /// Throws InvalidArgument if the feature's bin count differs from existing entries.
  void add(std::string id, HistogramFeature feature);

  [[nodiscard]] const std::vector<PoolEntry>& entries() const noexcept { return entries_; }
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

  /// Restarts the draw sequence from `seed`.
  void reseed(std::uint64_t seed) {
    seed_ = seed;
    rng_.seed(seed);
  }

  [[nodiscard]] SampledTarget sample();

 private:
  double next_unit();

  std::vector<PoolEntry> entries_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
};

/// Equivalent to pool.sample(). Throws InvalidArgument on an empty pool.
[[nodiscard]] SampledTarget sample_target(HistogramPool& pool);

struct PoolBuildFailure {
  std::filesystem::path path;
  std::string message;
};

/// Computes one histogram per readable image. Unreadable files are reported in
/// `failures` (when given); degenerate images are skipped with a warning.
[[nodiscard]] HistogramPool pool_from_images(const std::vector<std::filesystem::path>& paths,
                                             const HistogramParams& params, std::uint64_t seed = 0,
                                             std::vector<PoolBuildFailure>* failures = nullptr);

/// Image files (png, jpg, jpeg) directly inside `dir`, sorted by name.
[[nodiscard]] std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

/// Writes one HGF1 file per entry plus pool.json (ids, file names, seed).
void save_pool(const std::filesystem::path& dir, const HistogramPool& pool);
[[nodiscard]] HistogramPool load_pool(const std::filesystem::path& dir);
[[nodiscard]] bool is_saved_pool(const std::filesystem::path& dir);

}  // namespace rgbuv
