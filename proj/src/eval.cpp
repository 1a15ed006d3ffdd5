#include "rgbuv/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "rgbuv/errors.hpp"
#include "rgbuv/histogram_io.hpp"
#include "rgbuv/image_io.hpp"
#include "rgbuv/parallel.hpp"
#include "rgbuv/version.hpp"

namespace rgbuv {

namespace fs = std::filesystem;

RgbHistogram rgb_histogram(const ImageBuffer& image, int bins) {
  if (bins < 2) {
    throw InvalidArgument("RGB histogram needs at least 2 bins per channel");
  }
  image.validate();
  RgbHistogram hist;
  hist.bins = bins;
  hist.data.assign(static_cast<std::size_t>(bins) * static_cast<std::size_t>(bins) * static_cast<std::size_t>(bins),
                   0.0);
  auto bin_of = [bins](double v) { return std::min(bins - 1, static_cast<int>(v * bins)); };
  const auto px = image.data();
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    const auto r = static_cast<std::size_t>(bin_of(px[i * 3]));
    const auto g = static_cast<std::size_t>(bin_of(px[i * 3 + 1]));
    const auto b = static_cast<std::size_t>(bin_of(px[i * 3 + 2]));
    hist.data[(r * static_cast<std::size_t>(bins) + g) * static_cast<std::size_t>(bins) + b] += 1.0;
  }
  const double n = static_cast<double>(image.pixel_count());
  for (double& v : hist.data) {
    v /= n;
  }
  return hist;
}

bool EvalReport::all_ok() const noexcept {
  return std::all_of(items.begin(), items.end(), [](const EvalItem& item) { return item.ok(); });
}

namespace {

EvalItem evaluate_pair(const EvalPair& pair, const EvalOptions& options) {
  EvalItem item;
  item.source_id = pair.output.filename().string();
  item.target_id = pair.target.filename().string();
  try {
    const ImageBuffer output = load_image(pair.output).image;
    const HistogramFeature out_uv = compute_histogram(output, options.params);

    std::optional<HistogramFeature> target_uv;
    std::optional<RgbHistogram> target_rgb;
    if (is_hgf_file(pair.target)) {
      target_uv = read_hgf(pair.target);
      if (target_uv->bins() != options.params.bins) {
        throw InvalidArgument("target histogram has " + std::to_string(target_uv->bins()) + " bins, expected " +
                              std::to_string(options.params.bins));
      }
    } else {
      const ImageBuffer target = load_image(pair.target).image;
      target_uv = compute_histogram(target, options.params);
      target_rgb = rgb_histogram(target, options.rgb_bins);
    }

    item.kl_uv = kl_divergence(*target_uv, out_uv, options.kl_smoothing);
    item.hellinger_uv = hellinger(*target_uv, out_uv);
    if (target_rgb) {
      const RgbHistogram out_rgb = rgb_histogram(output, options.rgb_bins);
      item.kl_rgb = kl_divergence(target_rgb->data, out_rgb.data, options.kl_smoothing);
      item.hellinger_rgb = hellinger(target_rgb->data, out_rgb.data);
    }
  } catch (const std::exception& e) {
    item = EvalItem{item.source_id, item.target_id, {}, {}, {}, {}, e.what()};
    if (item.error.empty()) {
      item.error = "unknown error";
    }
  }
  return item;
}

std::optional<double> mean_of(const std::vector<EvalItem>& items, std::optional<double> EvalItem::*field) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& item : items) {
    if (item.*field) {
      sum += *(item.*field);
      ++count;
    }
  }
  if (count == 0) {
    return std::nullopt;
  }
  return sum / static_cast<double>(count);
}

std::string format_number(std::optional<double> v) {
  if (!v) {
    return "";
  }
  std::ostringstream out;
  out << std::setprecision(12) << *v;
  return out.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    return s;
  }
  std::string quoted = "\"";
  for (const char ch : s) {
    if (ch == '"') {
      quoted += '"';
    }
    quoted += ch;
  }
  return quoted + "\"";
}

nlohmann::json optional_json(std::optional<double> v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field += ch;
    }
  }
  fields.push_back(field);
  return fields;
}

}  // namespace

EvalReport evaluate_batch(const std::vector<EvalPair>& pairs, const EvalOptions& options) {
  if (pairs.empty()) {
    throw InvalidArgument("empty evaluation set");
  }
  options.params.validate();
  if (options.rgb_bins < 2) {
    throw InvalidArgument("RGB histogram needs at least 2 bins per channel");
  }
  if (!(options.kl_smoothing > 0.0)) {
    throw InvalidArgument("KL smoothing must be positive");
  }

  EvalReport report;
  report.params = options.params;
  report.rgb_bins = options.rgb_bins;
  report.kl_smoothing = options.kl_smoothing;
  report.items.resize(pairs.size());
  parallel_for(pairs.size(), options.threads,
               [&](std::size_t i) { report.items[i] = evaluate_pair(pairs[i], options); });

  report.means.kl_uv = mean_of(report.items, &EvalItem::kl_uv);
  report.means.hellinger_uv = mean_of(report.items, &EvalItem::hellinger_uv);
  report.means.kl_rgb = mean_of(report.items, &EvalItem::kl_rgb);
  report.means.hellinger_rgb = mean_of(report.items, &EvalItem::hellinger_rgb);
  return report;
}

std::vector<EvalPair> read_pairs_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open manifest " + path.string());
  }
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

  std::vector<EvalPair> pairs;
  std::string line;
  bool header_seen = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r" || line.front() == '#') {
      continue;
    }
    const auto fields = split_csv_line(line);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() >= 2 && fields[0] == "output" && fields[1] == "target") {
        continue;
      }
      throw IoError("manifest " + path.string() + " must start with header 'output,target'");
    }
    if (fields.size() != 2) {
      throw IoError("manifest " + path.string() + " line " + std::to_string(line_no) + ": expected 2 fields");
    }
    pairs.push_back({resolve(fields[0]), resolve(fields[1])});
  }
  return pairs;
}

std::string report_to_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "# rgbuv " << kVersion << '\n';
  out << "# bins=" << report.params.bins << " tau=" << report.params.tau << " epsilon=" << std::setprecision(12)
      << report.params.epsilon << " uv_min=" << report.params.uv_min << " uv_max=" << report.params.uv_max
      << " rgb_bins=" << report.rgb_bins << " kl_smoothing=" << report.kl_smoothing << '\n';
  out << "source,target,kl_uv,hellinger_uv,kl_rgb,hellinger_rgb,status\n";
  for (const auto& item : report.items) {
    out << csv_field(item.source_id) << ',' << csv_field(item.target_id) << ',' << format_number(item.kl_uv) << ','
        << format_number(item.hellinger_uv) << ',' << format_number(item.kl_rgb) << ','
        << format_number(item.hellinger_rgb) << ',' << (item.ok() ? "ok" : csv_field("error: " + item.error))
        << '\n';
  }
  out << "mean,," << format_number(report.means.kl_uv) << ',' << format_number(report.means.hellinger_uv) << ','
      << format_number(report.means.kl_rgb) << ',' << format_number(report.means.hellinger_rgb) << ','
      << (report.all_ok() ? "ok" : "incomplete") << '\n';
  return out.str();
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["tool"] = "rgbuv";
  j["version"] = kVersion;
  j["params"] = {{"bins", report.params.bins},
                 {"tau", report.params.tau},
                 {"epsilon", report.params.epsilon},
                 {"uv_min", report.params.uv_min},
                 {"uv_max", report.params.uv_max},
                 {"rgb_bins", report.rgb_bins},
                 {"kl_smoothing", report.kl_smoothing},
                 {"kl_direction", "target||output"}};
  auto items = nlohmann::json::array();
  for (const auto& item : report.items) {
    nlohmann::json e = {{"source", item.source_id},
                        {"target", item.target_id},
                        {"kl_uv", optional_json(item.kl_uv)},
                        {"hellinger_uv", optional_json(item.hellinger_uv)},
                        {"kl_rgb", optional_json(item.kl_rgb)},
                        {"hellinger_rgb", optional_json(item.hellinger_rgb)},
                        {"ok", item.ok()}};
    if (!item.ok()) {
      e["error"] = item.error;
    }
    items.push_back(std::move(e));
  }
  j["items"] = std::move(items);
  j["means"] = {{"kl_uv", optional_json(report.means.kl_uv)},
                {"hellinger_uv", optional_json(report.means.hellinger_uv)},
                {"kl_rgb", optional_json(report.means.kl_rgb)},
                {"hellinger_rgb", optional_json(report.means.hellinger_rgb)}};
  j["all_ok"] = report.all_ok();
  return j.dump(2) + "\n";
}

}  // namespace rgbuv
