#include "rgbuv/sampler.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "rgbuv/errors.hpp"
#include "rgbuv/histogram_io.hpp"
#include "rgbuv/image_io.hpp"

namespace rgbuv {

namespace fs = std::filesystem;

namespace {
constexpr const char* kPoolManifest = "pool.json";
}

HistogramFeature interpolate(const HistogramFeature& h1, const HistogramFeature& h2, double delta) {
  if (h1.bins() != h2.bins()) {
    throw InvalidArgument("interpolate: histogram shapes differ");
  }
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw InvalidArgument("interpolate: delta must lie in [0, 1]");
  }
  HistogramTensor mix(h1.bins());
  for (std::size_t i = 0; i < mix.size(); ++i) {
    mix[i] = delta * h1[i] + (1.0 - delta) * h2[i];
  }
  return HistogramFeature(std::move(mix));
}

void HistogramPool::add(std::string id, HistogramFeature feature) {
  if (!entries_.empty() && entries_.front().feature.bins() != feature.bins()) {
    throw InvalidArgument("pool entries must share one bin count");
  }
  entries_.push_back({std::move(id), std::move(feature)});
}

double HistogramPool::next_unit() {
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

SampledTarget HistogramPool::sample() {
  if (entries_.empty()) {
    throw InvalidArgument("cannot sample from an empty histogram pool");
  }
  const std::size_t n = entries_.size();
  if (n == 1) {
    return {entries_.front().feature, 0, 0, 1.0};
  }
  const auto first = std::min(n - 1, static_cast<std::size_t>(next_unit() * static_cast<double>(n)));
  auto second = std::min(n - 2, static_cast<std::size_t>(next_unit() * static_cast<double>(n - 1)));
  if (second >= first) {
    ++second;
  }
  const double delta = next_unit();
  return {interpolate(entries_[first].feature, entries_[second].feature, delta), first, second, delta};
}

SampledTarget sample_target(HistogramPool& pool) {
  return pool.sample();
}

HistogramPool pool_from_images(const std::vector<fs::path>& paths, const HistogramParams& params,
                               std::uint64_t seed, std::vector<PoolBuildFailure>* failures) {
  HistogramPool pool(seed);
  for (const auto& path : paths) {
    try {
      const LoadedImage loaded = load_image(path);
      pool.add(path.filename().string(), compute_histogram(loaded.image, params));
    } catch (const DegenerateImage&) {
      spdlog::warn("skipping degenerate image {}", path.string());
    } catch (const Error& e) {
      spdlog::warn("skipping {}: {}", path.string(), e.what());
      if (failures) {
        failures->push_back({path, e.what()});
      }
    }
  }
  return pool;
}

std::vector<fs::path> list_images(const fs::path& dir) {
  std::vector<fs::path> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file()) {
      continue;
    }
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") {
      out.push_back(entry.path());
    }
  }
  if (ec) {
    throw IoError("cannot list " + dir.string() + ": " + ec.message());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void save_pool(const fs::path& dir, const HistogramPool& pool) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create " + dir.string() + ": " + ec.message());
  }
  nlohmann::json manifest;
  manifest["format"] = "rgbuv-pool";
  manifest["seed"] = pool.seed();
  manifest["entries"] = nlohmann::json::array();
  for (std::size_t i = 0; i < pool.size(); ++i) {
    std::ostringstream name;
    name << std::setw(4) << std::setfill('0') << i << ".hgf";
    write_hgf(dir / name.str(), pool.entries()[i].feature);
    manifest["entries"].push_back({{"id", pool.entries()[i].id}, {"file", name.str()}});
  }
  write_file_atomic(dir / kPoolManifest, manifest.dump(2) + "\n");
}

HistogramPool load_pool(const fs::path& dir) {
  const auto bytes = read_file(dir / kPoolManifest);
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(bytes.begin(), bytes.end());
    HistogramPool pool(manifest.at("seed").get<std::uint64_t>());
    for (const auto& entry : manifest.at("entries")) {
      pool.add(entry.at("id").get<std::string>(), read_hgf(dir / entry.at("file").get<std::string>()));
    }
    return pool;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed pool manifest in " + dir.string() + ": " + e.what());
  }
}

bool is_saved_pool(const fs::path& dir) {
  return fs::is_regular_file(dir / kPoolManifest);
}

}  // namespace rgbuv
