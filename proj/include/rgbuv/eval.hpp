#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rgbuv/histogram.hpp"
#include "rgbuv/image.hpp"
#include "rgbuv/metrics.hpp"

namespace rgbuv {

/// Hard-binned b x b x b histogram over [0,1]^3, index (r * b + g) * b + b_idx.
/// A component equal to 1.0 falls in the top bin.
struct RgbHistogram {
  int bins = 0;
  std::vector<double> data;

  [[nodiscard]] double at(int r, int g, int b) const {
    return data[(static_cast<std::size_t>(r) * static_cast<std::size_t>(bins) + static_cast<std::size_t>(g)) *
                    static_cast<std::size_t>(bins) +
                static_cast<std::size_t>(b)];
  }
};

inline constexpr int kDefaultRgbBins = 16;

[[nodiscard]] RgbHistogram rgb_histogram(const ImageBuffer& image, int bins = kDefaultRgbBins);

struct EvalPair {
  std::filesystem::path output;
  std::filesystem::path target;  ///< an image, or an HGF1 histogram (RGB metrics then unavailable)
};

struct EvalItem {
  std::string source_id;
  std::string target_id;
  std::optional<double> kl_uv;
  std::optional<double> hellinger_uv;
  std::optional<double> kl_rgb;
  std::optional<double> hellinger_rgb;
  std::string error;  ///< empty on success

  [[nodiscard]] bool ok() const noexcept { return error.empty(); }
};

struct EvalAggregates {
  std::optional<double> kl_uv;
  std::optional<double> hellinger_uv;
  std::optional<double> kl_rgb;
  std::optional<double> hellinger_rgb;
};

struct EvalReport {
  std::vector<EvalItem> items;
  EvalAggregates means;  ///< arithmetic means over the items that report each metric
  HistogramParams params;
  int rgb_bins = kDefaultRgbBins;
  double kl_smoothing = kDefaultKlSmoothing;

  [[nodiscard]] bool all_ok() const noexcept;
};

struct EvalOptions {
  HistogramParams params;
  int rgb_bins = kDefaultRgbBins;
  double kl_smoothing = kDefaultKlSmoothing;
  int threads = 1;
};

/// Evaluates every pair: KL(target || output) and Hellinger in RGB-uv and RGB
/// histogram space. Per-item failures are recorded, not thrown. Throws
/// InvalidArgument for an empty pair list.
[[nodiscard]] EvalReport evaluate_batch(const std::vector<EvalPair>& pairs, const EvalOptions& options = {});

/// Reads a CSV manifest with header "output,target". Relative paths resolve
/// against the manifest's directory.
[[nodiscard]] std::vector<EvalPair> read_pairs_manifest(const std::filesystem::path& path);

/// CSV with '#' header lines recording the tool version and all parameters.
[[nodiscard]] std::string report_to_csv(const EvalReport& report);
[[nodiscard]] std::string report_to_json(const EvalReport& report);

}  // namespace rgbuv
