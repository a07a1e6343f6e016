#include "evcam/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <system_error>

#include "byte_io.hpp"
#include "evcam/error.hpp"
#include "evcam/event_io.hpp"
#include "evcam/hash.hpp"
#include "evcam/image_io.hpp"
#include "evcam/parallel.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace evcam {

namespace {

// Shortest decimal that round-trips the value.
std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, end) : std::to_string(v);
}

// A float config value as the double its shortest decimal denotes (0.1f -> 0.1).
double widen(float v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  double out = v;
  if (ec == std::errc()) std::from_chars(buf, end, out);
  return out;
}

double parse_double(std::string_view text, std::string_view what) {
  std::string s(text);
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("invalid " + std::string(what) + " '" + std::string(text) + "'");
  }
  return v;
}

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

void collect(const fs::path& root, const fs::path& dir, bool recursive, std::vector<fs::path>& out) {
  auto add = [&](const fs::directory_entry& e) {
    if (e.is_regular_file() && is_image_file(e.path())) out.push_back(fs::relative(e.path(), root));
  };
  if (recursive) {
    for (const auto& e : fs::recursive_directory_iterator(dir)) add(e);
  } else {
    for (const auto& e : fs::directory_iterator(dir)) add(e);
  }
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Writes via a temporary sibling and rename so a crash never leaves a
// half-written file under its final name.
void write_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  detail::write_file_bytes(tmp.string(), bytes);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " into place");
  }
}

struct Task {
  std::size_t image;
  std::size_t slot;
};

}  // namespace

std::string_view to_string(DatasetLayout layout) {
  switch (layout) {
    case DatasetLayout::voc: return "voc";
    case DatasetLayout::coco: return "coco";
    default: return "flat";
  }
}

DatasetLayout parse_layout(std::string_view text) {
  if (text == "voc") return DatasetLayout::voc;
  if (text == "coco") return DatasetLayout::coco;
  if (text == "flat") return DatasetLayout::flat;
  throw ConfigError("unknown layout '" + std::string(text) + "' (expected voc|coco|flat)");
}

std::string AlphaSpec::text() const {
  return is_range ? "[" + shortest(lo) + "," + shortest(hi) + "]" : shortest(value);
}

std::vector<AlphaSpec> parse_alpha_list(std::string_view text) {
  std::vector<std::string> items;
  std::string cur;
  int depth = 0;
  for (char ch : text) {
    if (ch == '[') ++depth;
    if (ch == ']') --depth;
    if (depth < 0) throw ConfigError("unbalanced ']' in alpha list '" + std::string(text) + "'");
    if (ch == ',' && depth == 0) {
      items.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (depth != 0) throw ConfigError("unbalanced '[' in alpha list '" + std::string(text) + "'");
  items.push_back(cur);

  std::vector<AlphaSpec> out;
  for (const std::string& item : items) {
    const auto open = item.find('[');
    if (open == std::string::npos) {
      out.push_back(AlphaSpec::fixed(parse_double(item, "alpha")));
      continue;
    }
    const auto close = item.find(']');
    const std::string body = item.substr(open + 1, close - open - 1);
    const auto comma = body.find(',');
    if (comma == std::string::npos) throw ConfigError("alpha range '" + item + "' must be [lo,hi]");
    out.push_back(AlphaSpec::range(parse_double(body.substr(0, comma), "alpha range bound"),
                                   parse_double(body.substr(comma + 1), "alpha range bound")));
  }
  return out;
}

void DatasetJob::validate() const {
  if (alphas.empty()) throw ConfigError("at least one alpha is required");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const AlphaSpec& a = alphas[i];
    if (a.is_range) {
      if (!(a.lo > 0.0) || !(a.lo < a.hi) || !std::isfinite(a.hi)) {
        throw ConfigError("alpha range " + a.text() + " needs 0 < lo < hi");
      }
    } else if (!(a.value > 0.0) || !std::isfinite(a.value)) {
      throw ConfigError("alpha must be positive, got " + a.text());
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (!a.is_range && alphas[j] == a) throw ConfigError("duplicate alpha " + a.text());
    }
  }
  event_cfg.validate();
  if ((resize_width == 0) != (resize_height == 0)) {
    throw ConfigError("resize width and height must both be zero or both positive");
  }
  if (output_root.empty()) throw ConfigError("output root is required");
}

std::vector<fs::path> discover(const fs::path& root, DatasetLayout layout, const std::vector<std::string>& coco_splits) {
  if (!fs::is_directory(root)) throw LayoutError("input root " + root.string() + " is not a directory");
  std::vector<fs::path> out;
  switch (layout) {
    case DatasetLayout::voc: {
      const fs::path images = root / "JPEGImages";
      if (!fs::is_directory(images)) throw LayoutError("voc layout: missing directory " + images.string());
      collect(root, images, false, out);
      break;
    }
    case DatasetLayout::coco: {
      std::vector<fs::path> splits;
      if (!coco_splits.empty()) {
        for (const auto& s : coco_splits) {
          if (!fs::is_directory(root / s)) throw LayoutError("coco layout: missing directory " + (root / s).string());
          splits.push_back(root / s);
        }
      } else {
        for (const auto& e : fs::directory_iterator(root)) {
          if (e.is_directory() && e.path().filename() != "annotations") splits.push_back(e.path());
        }
        if (splits.empty()) {
          throw LayoutError("coco layout: no split directories (e.g. " + (root / "train2017").string() + ") under " +
                            root.string());
        }
      }
      for (const auto& dir : splits) collect(root, dir, false, out);
      break;
    }
    case DatasetLayout::flat:
      collect(root, root, true, out);
      break;
  }
  std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) {
    return a.generic_string() < b.generic_string();
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::uint64_t per_image_seed(std::uint64_t global_seed, std::string_view rel_path) {
  return hash_combine(mix64(global_seed), fnv1a64(rel_path));
}

double resolve_alpha(const AlphaSpec& spec, std::uint64_t image_seed, std::size_t slot) {
  if (!spec.is_range) return spec.value;
  const double u = unit_interval(counter_hash(image_seed, 0xA1FA, slot));
  const double drawn = spec.lo + (spec.hi - spec.lo) * u;
  return std::clamp(std::round(drawn * 1e4) / 1e4, spec.lo, spec.hi);
}

PairResult synthesize_pair(const Image& rgb, double alpha, const EventGenConfig& cfg, std::size_t width,
                           std::size_t height) {
  const Image sized = (width > 0 && height > 0) ? resize(rgb, width, height) : rgb;
  // Events are computed from the 8-bit image that is written to disk, so the
  // stored pair is self-consistent.
  Image exposed = quantize_u8(apply_exposure(sized, ExposureConfig{static_cast<float>(alpha)}));
  EventFrame events = synthesize_events(exposed, cfg, 1);
  return PairResult{std::move(exposed), std::move(events)};
}

JobResult run_job(const DatasetJob& job) {
  job.validate();
  std::vector<fs::path> images = discover(job.input_root, job.layout, job.coco_splits);

  // An output tree nested in the input tree must not feed back into a rerun.
  std::error_code ec;
  const fs::path out_abs = fs::weakly_canonical(job.output_root, ec);
  const fs::path in_abs = ec ? fs::path() : fs::weakly_canonical(job.input_root, ec);
  if (!ec && in_abs != out_abs) {
    std::erase_if(images, [&](const fs::path& rel) {
      const fs::path rel_to_out = (in_abs / rel).lexically_relative(out_abs);
      return !rel_to_out.empty() && *rel_to_out.begin() != "..";
    });
  }
  ec.clear();
  fs::create_directories(job.output_root, ec);
  if (ec || !fs::is_directory(job.output_root)) {
    throw IoError("cannot create output root " + job.output_root.string());
  }
  const fs::path manifest_path = job.output_root / std::string(kManifestName);
  {
    // Probe writability before doing any work.
    fs::path probe = manifest_path;
    probe += ".tmp";
    std::ofstream out(probe, std::ios::trunc);
    if (!out) throw IoError("output root " + job.output_root.string() + " is not writable");
  }

  std::vector<Task> tasks;
  tasks.reserve(images.size() * job.alphas.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    for (std::size_t s = 0; s < job.alphas.size(); ++s) tasks.push_back({i, s});
  }
  std::vector<ManifestEntry> entries(tasks.size());

  parallel_tasks(tasks.size(), job.workers, [&](std::size_t t) {
    const Task task = tasks[t];
    const fs::path& rel = images[task.image];
    const std::string src = rel.generic_string();
    const AlphaSpec& spec = job.alphas[task.slot];

    ManifestEntry e;
    e.src = src;
    e.alpha_spec = spec.text();
    e.seed = per_image_seed(job.global_seed, src);
    e.alpha = resolve_alpha(spec, e.seed, task.slot);
    e.threshold_c = widen(job.event_cfg.threshold_c);
    e.dt = widen(job.event_cfg.dt);
    e.count_cap = job.event_cfg.count_cap;
    e.flow_mode = std::string(to_string(job.event_cfg.flow.mode));
    e.theta = job.event_cfg.flow.mode == FlowMode::fixed ? job.event_cfg.flow.theta : 0.0;

    std::string stem = rel.stem().string() + "_a" + shortest(e.alpha);
    if (spec.is_range) stem += "_r" + std::to_string(task.slot);
    const fs::path rel_dir = rel.parent_path();
    const fs::path exposed_rel = rel_dir / (stem + ".png");
    const fs::path event_rel = rel_dir / (stem + ".evtf");
    const fs::path viz_rel = rel_dir / (stem + "_events.png");
    std::vector<fs::path> written;
    try {
      EventGenConfig cfg = job.event_cfg;
      cfg.flow.seed = e.seed;
      const Image rgb = read_image((job.input_root / rel).string(), 3);
      const PairResult pair = synthesize_pair(rgb, e.alpha, cfg, job.resize_width, job.resize_height);
      e.width = pair.exposed.width();
      e.height = pair.exposed.height();
      e.events_on = pair.events.on_total();
      e.events_off = pair.events.off_total();

      const auto evtf = encode_evtf(pair.events);
      e.checksum = hex64(fnv1a64(evtf));
      fs::create_directories(job.output_root / rel_dir);
      write_atomic(job.output_root / exposed_rel, encode_png(pair.exposed));
      written.push_back(job.output_root / exposed_rel);
      write_atomic(job.output_root / event_rel, evtf);
      written.push_back(job.output_root / event_rel);
      if (job.emit_viz) {
        write_atomic(job.output_root / viz_rel, encode_png(render_events(pair.events)));
        e.out_viz = viz_rel.generic_string();
      }
      e.out_exposed = exposed_rel.generic_string();
      e.out_event = event_rel.generic_string();
      e.status = "ok";
    } catch (const std::exception& ex) {
      std::error_code rm;
      for (const auto& p : written) fs::remove(p, rm);
      e.width = e.height = 0;
      e.events_on = e.events_off = 0;
      e.out_exposed.clear();
      e.out_event.clear();
      e.out_viz.clear();
      e.checksum.clear();
      e.status = "failed";
      e.error = ex.what();
    }
    entries[t] = std::move(e);
  });

  // entries[t] belongs to tasks[t]: sorted by (src, alpha slot) whatever the
  // completion order was.
  std::string body;
  for (const auto& e : entries) body += manifest_line(e) + "\n";
  write_atomic(manifest_path, std::span(reinterpret_cast<const std::uint8_t*>(body.data()), body.size()));

  JobResult result;
  result.entries = std::move(entries);
  result.manifest_path = manifest_path;
  result.failed = static_cast<std::size_t>(
      std::count_if(result.entries.begin(), result.entries.end(), [](const ManifestEntry& e) { return !e.ok(); }));
  return result;
}

std::string manifest_line(const ManifestEntry& e) {
  ojson j;
  j["src"] = e.src;
  j["alpha_spec"] = e.alpha_spec;
  j["alpha"] = e.alpha;
  j["seed"] = e.seed;
  j["threshold_c"] = e.threshold_c;
  j["dt"] = e.dt;
  j["count_cap"] = e.count_cap;
  j["flow_mode"] = e.flow_mode;
  j["theta"] = e.theta;
  j["width"] = e.width;
  j["height"] = e.height;
  j["out_exposed"] = e.out_exposed;
  j["out_event"] = e.out_event;
  if (!e.out_viz.empty()) j["out_viz"] = e.out_viz;
  j["checksum"] = e.checksum;
  j["events_on"] = e.events_on;
  j["events_off"] = e.events_off;
  j["status"] = e.status;
  if (!e.error.empty()) j["error"] = e.error;
  return j.dump();
}

ManifestEntry parse_manifest_line(std::string_view line) {
  ojson j;
  try {
    j = ojson::parse(line);
    ManifestEntry e;
    e.src = j.at("src").get<std::string>();
    e.alpha_spec = j.at("alpha_spec").get<std::string>();
    e.alpha = j.at("alpha").get<double>();
    e.seed = j.at("seed").get<std::uint64_t>();
    e.threshold_c = j.at("threshold_c").get<double>();
    e.dt = j.at("dt").get<double>();
    e.count_cap = j.at("count_cap").get<std::uint32_t>();
    e.flow_mode = j.at("flow_mode").get<std::string>();
    e.theta = j.at("theta").get<double>();
    e.width = j.at("width").get<std::size_t>();
    e.height = j.at("height").get<std::size_t>();
    e.out_exposed = j.at("out_exposed").get<std::string>();
    e.out_event = j.at("out_event").get<std::string>();
    e.out_viz = j.value("out_viz", std::string());
    e.checksum = j.at("checksum").get<std::string>();
    e.events_on = j.at("events_on").get<std::uint64_t>();
    e.events_off = j.at("events_off").get<std::uint64_t>();
    e.status = j.at("status").get<std::string>();
    e.error = j.value("error", std::string());
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("manifest line: ") + ex.what());
  }
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::vector<ManifestEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(parse_manifest_line(line));
  }
  return out;
}

ThroughputResult measure_throughput(std::size_t images, std::size_t width, std::size_t height, unsigned workers,
                                    const EventGenConfig& cfg, double alpha, std::uint64_t seed) {
  if (images == 0) throw ConfigError("throughput run needs at least one image");
  cfg.validate();
  std::vector<Image> inputs;
  inputs.reserve(images);
  for (std::size_t i = 0; i < images; ++i) inputs.push_back(random_image(width, height, 3, hash_combine(seed, i)));
  std::vector<std::uint64_t> sink(images);

  const auto start = std::chrono::steady_clock::now();
  parallel_tasks(images, workers, [&](std::size_t i) {
    EventGenConfig local = cfg;
    local.flow.seed = hash_combine(seed, i);
    sink[i] = synthesize_pair(inputs[i], alpha, local, 0, 0).events.event_count();
  });
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  ThroughputResult r;
  r.images = images;
  r.width = width;
  r.height = height;
  r.workers = resolve_workers(workers);
  r.seconds = seconds;
  r.images_per_second = seconds > 0.0 ? static_cast<double>(images) / seconds : 0.0;
  return r;
}

}  // namespace evcam
