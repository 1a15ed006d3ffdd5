#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rgbuv/errors.hpp"
#include "rgbuv/eval.hpp"
#include "rgbuv/histogram.hpp"
#include "rgbuv/histogram_io.hpp"
#include "rgbuv/image_io.hpp"
#include "rgbuv/metrics.hpp"
#include "rgbuv/parallel.hpp"
#include "rgbuv/postproc.hpp"
#include "rgbuv/recolor.hpp"
#include "rgbuv/sampler.hpp"
#include "rgbuv/version.hpp"

namespace fs = std::filesystem;
using namespace rgbuv;

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kIo = 2, kNumerical = 3 };

void add_histogram_options(CLI::App& cmd, HistogramParams& params) {
  cmd.add_option("--bins", params.bins, "histogram bins per uv axis")->check(CLI::Range(2, 1024));
  cmd.add_option("--tau", params.tau, "kernel fall-off")->check(CLI::PositiveNumber);
  cmd.add_option("--epsilon", params.epsilon, "offset inside the log-chroma ratios")->check(CLI::PositiveNumber);
}

struct RecolorFlags {
  RecolorConfig cfg;
  std::string kernel = "laplacian";
  bool hires = false;
  int threads = default_thread_count();
};

void add_recolor_options(CLI::App& cmd, RecolorFlags& f) {
  cmd.add_option("--alpha", f.cfg.alpha, "weight of the histogram term")->check(CLI::NonNegativeNumber);
  cmd.add_option("--beta", f.cfg.beta, "weight of the reconstruction term")->check(CLI::NonNegativeNumber);
  cmd.add_option("--variance-scale", f.cfg.variance_weight_scale, "multiplier on the variance term")
      ->check(CLI::NonNegativeNumber);
  cmd.add_option("--blur-sigma", f.cfg.blur_sigma, "Gaussian sigma of the variance term, pixels")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--iters", f.cfg.iterations, "optimization steps")->check(CLI::PositiveNumber);
  cmd.add_option("--step", f.cfg.step_size, "step size")->check(CLI::PositiveNumber);
  cmd.add_option("--momentum", f.cfg.momentum, "momentum")->check(CLI::Range(0.0, 0.999999));
  cmd.add_option("--smooth-sigma", f.cfg.precondition_sigma, "Gaussian sigma used to smooth the gradient, pixels")
      ->check(CLI::NonNegativeNumber);
  cmd.add_option("--jitter", f.cfg.jitter, "amplitude of the seeded start perturbation")
      ->check(CLI::NonNegativeNumber);
  cmd.add_option("--kernel", f.kernel, "reconstruction kernel")->check(CLI::IsMember({"laplacian", "sobel"}));
  cmd.add_flag("--hires", f.hires, "optimize at 256x256 and transfer the colors with a fitted mapping");
}

HistogramFeature load_target(const fs::path& path, const HistogramParams& params) {
  if (is_hgf_file(path)) {
    HistogramFeature feature = read_hgf(path);
    if (feature.bins() != params.bins) {
      throw InvalidArgument(path.string() + " has " + std::to_string(feature.bins()) + " bins, expected " +
                            std::to_string(params.bins));
    }
    return feature;
  }
  return compute_histogram(load_image(path).image, params);
}

LoadedImage load_color_input(const fs::path& path) {
  LoadedImage loaded = load_image(path);
  if (loaded.source_channels == 1) {
    throw InvalidArgument(path.string() +
                          " is grayscale; recoloring needs chroma to start from (colorization is not supported)");
  }
  return loaded;
}

struct RunOutput {
  ImageBuffer image;
  std::vector<LossBreakdown> trace;
  std::optional<ColorMapping> mapping;
};

RunOutput run_recolor(const ImageBuffer& input, const HistogramFeature& target, const RecolorConfig& cfg,
                      const HistogramParams& params, bool hires) {
  RunOutput out;
  if (hires) {
    HiresResult r = recolor_hires_detailed(input, target, cfg, params);
    out.image = std::move(r.image);
    out.trace = std::move(r.working.trace);
    if (!r.delegated) {
      out.mapping = r.mapping;
    }
  } else {
    RecolorResult r = recolor(input, target, cfg, params);
    out.image = std::move(r.image);
    out.trace = std::move(r.trace);
  }
  return out;
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

int cmd_hist(const fs::path& input, const HistogramParams& params, const std::string& out, const std::string& plot,
             int cell) {
  const HistogramFeature feature = compute_histogram(load_image(input).image, params);
  double sum = 0.0;
  for (const double v : feature.values()) {
    sum += v;
  }
  std::cout << "bins " << feature.bins() << "  sum " << std::setprecision(15) << sum << "  |1 - sum| "
            << std::abs(1.0 - sum) << '\n';
  if (!out.empty()) {
    write_hgf(out, feature);
  }
  if (!plot.empty()) {
    write_file_atomic(plot, encode_png(render_histogram(feature, cell)));
  }
  return kOk;
}

int cmd_recolor(const fs::path& input_path, const fs::path& target_path, const RecolorFlags& flags,
                const HistogramParams& params, const fs::path& out, const std::string& trace_path,
                const std::string& mapping_path, int bit_depth) {
  const LoadedImage loaded = load_color_input(input_path);
  const ImageBuffer& input = loaded.image;
  const HistogramFeature target = load_target(target_path, params);

  const double before = hellinger(compute_histogram(input, params), target);
  const RunOutput result = run_recolor(input, target, flags.cfg, params, flags.hires);
  const double after = hellinger(compute_histogram(result.image, params), target);

  save_png(out, result.image, bit_depth > 0 ? bit_depth : loaded.bit_depth);
  if (!trace_path.empty()) {
    write_file_atomic(trace_path, trace_to_csv(result.trace));
  }
  if (!mapping_path.empty()) {
    write_file_atomic(mapping_path, (result.mapping ? *result.mapping : ColorMapping::identity()).to_json());
  }
  std::cout << "hellinger initial " << fixed(before) << "  final " << fixed(after) << '\n';
  return kOk;
}

struct Variant {
  std::string file;
  SampledTarget draw;
  double before = 0.0;
  double after = 0.0;
  std::string error;
  int status = kOk;
};

int cmd_auto(const fs::path& input_path, const fs::path& pool_dir, int count, std::uint64_t seed,
             const fs::path& outdir, const RecolorFlags& flags, const HistogramParams& params) {
  const ImageBuffer input = load_color_input(input_path).image;

  HistogramPool pool(seed);
  if (is_saved_pool(pool_dir)) {
    pool = load_pool(pool_dir);
    pool.reseed(seed);
  } else {
    std::vector<PoolBuildFailure> failures;
    pool = pool_from_images(list_images(pool_dir), params, seed, &failures);
    for (const auto& f : failures) {
      spdlog::warn("skipping {}: {}", f.path.string(), f.message);
    }
  }
  if (pool.empty()) {
    throw InvalidArgument("no usable histograms in " + pool_dir.string());
  }
  if (pool.entries().front().feature.bins() != params.bins) {
    throw InvalidArgument("pool histograms have " + std::to_string(pool.entries().front().feature.bins()) +
                          " bins, expected " + std::to_string(params.bins));
  }

  const HistogramFeature h_input = compute_histogram(input, params);
  std::vector<Variant> variants(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    std::ostringstream name;
    name << "variant_" << std::setw(3) << std::setfill('0') << i << ".png";
    variants[static_cast<std::size_t>(i)].file = name.str();
    variants[static_cast<std::size_t>(i)].draw = pool.sample();
  }

  fs::create_directories(outdir);
  parallel_for(variants.size(), flags.threads, [&](std::size_t i) {
    Variant& v = variants[i];
    try {
      v.before = hellinger(h_input, v.draw.feature);
      const RunOutput r = run_recolor(input, v.draw.feature, flags.cfg, params, flags.hires);
      v.after = hellinger(compute_histogram(r.image, params), v.draw.feature);
      save_png(outdir / v.file, r.image);
    } catch (const NumericalFailure& e) {
      v.error = std::string(e.what()) + " at iteration " + std::to_string(e.iteration());
      v.status = kNumerical;
    } catch (const std::exception& e) {
      v.error = e.what();
      v.status = kIo;
    }
  });

  std::ostringstream manifest;
  manifest << "variant,first,second,delta,hellinger_initial,hellinger_final,status\n";
  manifest << std::setprecision(17);
  int status = kOk;
  for (const Variant& v : variants) {
    const auto& entries = pool.entries();
    manifest << v.file << ',' << entries[v.draw.first].id << ',' << entries[v.draw.second].id << ','
             << v.draw.delta << ',';
    if (v.error.empty()) {
      manifest << v.before << ',' << v.after << ",ok\n";
      std::cout << v.file << "  delta " << fixed(v.draw.delta, 4) << "  hellinger " << fixed(v.before) << " -> "
                << fixed(v.after) << '\n';
    } else {
      std::string message = v.error;
      for (char& ch : message) {
        if (ch == ',' || ch == '\n') {
          ch = ' ';
        }
      }
      manifest << ",,error: " << message << '\n';
      std::cout << v.file << "  failed: " << v.error << '\n';
      status = std::max(status, v.status);
    }
  }
  write_file_atomic(outdir / "manifest.csv", manifest.str());
  return status;
}

int cmd_pool(const fs::path& images, const fs::path& out, std::uint64_t seed, const HistogramParams& params) {
  std::vector<PoolBuildFailure> failures;
  const HistogramPool pool = pool_from_images(list_images(images), params, seed, &failures);
  for (const auto& f : failures) {
    spdlog::warn("skipping {}: {}", f.path.string(), f.message);
  }
  if (pool.empty()) {
    throw InvalidArgument("no usable images in " + images.string());
  }
  save_pool(out, pool);
  std::cout << "saved " << pool.size() << " histograms to " << out.string() << '\n';
  return failures.empty() ? kOk : kIo;
}

int cmd_eval(const fs::path& pairs, const EvalOptions& options, const fs::path& out) {
  const EvalReport report = evaluate_batch(read_pairs_manifest(pairs), options);
  const bool json = out.extension() == ".json";
  const std::string text = json ? report_to_json(report) : report_to_csv(report);
  if (out.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(out, text);
  }
  std::size_t failed = 0;
  for (const auto& item : report.items) {
    if (!item.ok()) {
      ++failed;
      std::cerr << item.source_id << ": " << item.error << '\n';
    }
  }
  if (report.means.hellinger_uv) {
    std::cerr << report.items.size() << " pairs, mean hellinger_uv " << fixed(*report.means.hellinger_uv)
              << ", " << failed << " failed\n";
  }
  return failed == 0 ? kOk : kIo;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Histogram-guided image recoloring in RGB-uv space", "rgbuv"};
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "TOML/INI file with option values (one section per subcommand)");
  app.require_subcommand(1);
  int verbosity = 0;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbosity, "more log output (repeatable)");
  app.add_flag("-q,--quiet", quiet, "errors only");

  HistogramParams params;

  auto* hist = app.add_subcommand("hist", "Compute the RGB-uv histogram of an image");
  hist->option_defaults()->always_capture_default();
  std::string hist_input;
  std::string hist_out;
  std::string hist_plot;
  int cell = 4;
  hist->add_option("input", hist_input, "image file")->required()->check(CLI::ExistingFile);
  add_histogram_options(*hist, params);
  hist->add_option("--out", hist_out, "write the histogram as HGF1");
  hist->add_option("--plot", hist_plot, "write a PNG visualization");
  hist->add_option("--cell", cell, "pixels per bin in the plot")->check(CLI::Range(1, 64));

  RecolorFlags flags;
  auto* rec = app.add_subcommand("recolor", "Recolor an image toward a target histogram");
  rec->option_defaults()->always_capture_default();
  std::string rec_input;
  std::string rec_target;
  std::string rec_out;
  std::string rec_trace;
  std::string rec_mapping;
  int bit_depth = 0;
  rec->add_option("input", rec_input, "image to recolor")->required()->check(CLI::ExistingFile);
  rec->add_option("--target", rec_target, "target image or HGF1 histogram")->required()->check(CLI::ExistingFile);
  rec->add_option("--out", rec_out, "output PNG")->required();
  rec->add_option("--trace", rec_trace, "write the per-iteration loss trace as CSV");
  rec->add_option("--mapping", rec_mapping, "with --hires, write the fitted color mapping as JSON");
  rec->add_option("--bit-depth", bit_depth, "output bit depth, 0 keeps the input's")->check(CLI::IsMember({0, 8, 16}));
  rec->add_option("--seed", flags.cfg.seed, "seed for the start perturbation");
  add_recolor_options(*rec, flags);
  add_histogram_options(*rec, params);

  auto* aut = app.add_subcommand("auto", "Recolor toward targets sampled from a histogram pool");
  aut->option_defaults()->always_capture_default();
  std::string auto_input;
  std::string auto_pool;
  std::string auto_outdir;
  int count = 5;
  std::uint64_t auto_seed = 0;
  aut->add_option("input", auto_input, "image to recolor")->required()->check(CLI::ExistingFile);
  aut->add_option("--pool", auto_pool, "directory of images or a saved pool")->required()->check(CLI::ExistingDirectory);
  aut->add_option("--count", count, "number of variants")->check(CLI::Range(1, 10000));
  aut->add_option("--seed", auto_seed, "seed for target sampling");
  aut->add_option("--outdir", auto_outdir, "output directory")->required();
  aut->add_option("--threads", flags.threads, "variants recolored in parallel (env RGBUV_THREADS)")
      ->check(CLI::PositiveNumber);
  add_recolor_options(*aut, flags);
  add_histogram_options(*aut, params);

  auto* pool_cmd = app.add_subcommand("pool", "Save the histograms of a directory of images as a pool");
  pool_cmd->option_defaults()->always_capture_default();
  std::string pool_images;
  std::string pool_out;
  std::uint64_t pool_seed = 0;
  pool_cmd->add_option("images", pool_images, "directory of images")->required()->check(CLI::ExistingDirectory);
  pool_cmd->add_option("--out", pool_out, "output directory")->required();
  pool_cmd->add_option("--seed", pool_seed, "seed stored with the pool");
  add_histogram_options(*pool_cmd, params);

  EvalOptions eval_options;
  eval_options.threads = default_thread_count();
  auto* ev = app.add_subcommand("eval", "KL divergence and Hellinger distance over output/target pairs");
  ev->option_defaults()->always_capture_default();
  std::string pairs;
  std::string report;
  ev->add_option("--pairs", pairs, "CSV manifest with header output,target")->required()->check(CLI::ExistingFile);
  ev->add_option("--out", report, "report path (.csv or .json); stdout when omitted");
  ev->add_option("--rgb-bins", eval_options.rgb_bins, "bins per axis of the RGB histogram")
      ->check(CLI::Range(1, 256));
  ev->add_option("--kl-smoothing", eval_options.kl_smoothing, "added to both sides inside the KL log")
      ->check(CLI::NonNegativeNumber);
  ev->add_option("--threads", eval_options.threads, "worker threads (env RGBUV_THREADS)")->check(CLI::PositiveNumber);
  add_histogram_options(*ev, params);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  spdlog::set_level(quiet ? spdlog::level::err
                          : verbosity >= 2 ? spdlog::level::debug
                          : verbosity == 1 ? spdlog::level::info
                                           : spdlog::level::warn);

  try {
    params.validate();
    flags.cfg.recon_kernel = parse_recon_kernel(flags.kernel);
    flags.cfg.validate();
    if (*hist) {
      return cmd_hist(hist_input, params, hist_out, hist_plot, cell);
    }
    if (*rec) {
      return cmd_recolor(rec_input, rec_target, flags, params, rec_out, rec_trace, rec_mapping, bit_depth);
    }
    if (*aut) {
      return cmd_auto(auto_input, auto_pool, count, auto_seed, auto_outdir, flags, params);
    }
    if (*pool_cmd) {
      return cmd_pool(pool_images, pool_out, pool_seed, params);
    }
    if (*ev) {
      eval_options.params = params;
      return cmd_eval(pairs, eval_options, report);
    }
  } catch (const NumericalFailure& e) {
    std::cerr << "error: " << e.what() << " (iteration " << e.iteration() << ")\n";
    return kNumerical;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
