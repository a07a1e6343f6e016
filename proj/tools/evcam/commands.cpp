#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>
#include <json.hpp>

#include "evcam/error.hpp"
#include "evcam/event_io.hpp"
#include "evcam/eventgen.hpp"
#include "evcam/flow.hpp"
#include "evcam/fusion_check.hpp"
#include "evcam/image_io.hpp"
#include "evcam/pipeline.hpp"
#include "evcam/snn.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace evcam::cli {

namespace {

EventGenConfig to_config(const EventFlags& f) {
  EventGenConfig cfg;
  cfg.threshold_c = static_cast<float>(f.threshold);
  cfg.dt = static_cast<float>(f.dt);
  cfg.count_cap = f.cap;
  cfg.flow.mode = parse_flow_mode(f.flow);
  cfg.flow.theta = f.theta;
  cfg.flow.seed = f.seed;
  if (f.luma == "rec601") {
    cfg.luma = LumaMode::rec601;
  } else if (f.luma == "value") {
    cfg.luma = LumaMode::hsv_value;
  } else {
    throw UsageError("--luma must be rec601 or value");
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

void emit_json(const ojson& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

std::pair<std::size_t, std::size_t> parse_size(const std::string& text) {
  if (text == "none" || text == "0") return {0, 0};
  std::size_t w = 0, h = 0;
  char sep = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%zu%c%zu%c", &w, &sep, &h, &tail) != 3 || (sep != 'x' && sep != 'X') || w == 0 ||
      h == 0) {
    throw UsageError("--size must look like 320x320 or 'none', got '" + text + "'");
  }
  return {w, h};
}

}  // namespace

int run_expose(const ExposeOptions& opt) {
  if (!(opt.alpha > 0.0)) throw UsageError("--alpha must be positive, got " + std::to_string(opt.alpha));
  const Image in = read_image(opt.input, 3);
  write_png(opt.output, apply_exposure(in, ExposureConfig{static_cast<float>(opt.alpha)}));
  return kExitOk;
}

int run_events(const EventsOptions& opt) {
  const EventGenConfig cfg = to_config(opt.events);
  const Image in = read_image(opt.input, 3);
  const EventFrame frame = synthesize_events(in, cfg, opt.workers);

  fs::path out = opt.output;
  for (const std::string& fmt : opt.emit) {
    fs::path target = out;
    target.replace_extension(fmt == "evtf" ? ".evtf" : fmt == "csv" ? ".csv" : ".png");
    if (fmt == "evtf") {
      write_evtf(target.string(), frame);
    } else if (fmt == "csv") {
      write_event_csv(target.string(), frame);
    } else if (fmt == "png") {
      write_png(target.string(), render_events(frame));
    } else {
      throw UsageError("unknown --emit format '" + fmt + "'");
    }
  }
  if (!opt.flow_png.empty()) write_png(opt.flow_png, flow_to_image(generate_flow(in.width(), in.height(), cfg.flow)));

  ojson summary;
  summary["width"] = frame.width();
  summary["height"] = frame.height();
  summary["events_on"] = frame.on_total();
  summary["events_off"] = frame.off_total();
  std::cout << summary.dump() << '\n';
  return kExitOk;
}

int run_dataset(const DatasetOptions& opt) {
  DatasetJob job;
  job.input_root = opt.input;
  job.output_root = opt.output;
  try {
    job.layout = parse_layout(opt.layout);
    job.alphas = parse_alpha_list(opt.alphas);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  job.event_cfg = to_config(opt.events);
  job.global_seed = opt.events.seed;
  job.workers = opt.workers;
  std::tie(job.resize_width, job.resize_height) = parse_size(opt.size);
  job.emit_viz = opt.viz;
  job.coco_splits = opt.splits;
  try {
    job.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }

  const JobResult result = run_job(job);
  for (const auto& e : result.entries) {
    if (!e.ok()) std::cerr << "evcam dataset: failed " << e.src << " (alpha " << e.alpha_spec << "): " << e.error << '\n';
  }
  ojson summary;
  summary["entries"] = result.entries.size();
  summary["failed"] = result.failed;
  summary["manifest"] = result.manifest_path.string();
  std::cout << summary.dump() << '\n';
  return result.exit_code();
}

int run_snn_demo(const SnnDemoOptions& opt) {
  if (opt.steps == 0) throw UsageError("--t must be at least 1");
  LifParams p;
  p.tau = static_cast<float>(opt.tau);
  p.v_threshold = static_cast<float>(opt.threshold);
  p.v_reset = static_cast<float>(opt.reset);
  p.leak = opt.paper_literal ? LeakMode::paper_literal : LeakMode::decay;
  try {
    p.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }

  const EventFrame frame = read_evtf(opt.input);
  const SpikeTensor coded = constant_code(frame, opt.steps);
  const SpikeTensor out = lif_run(scale(coded.tensor(), static_cast<float>(opt.gain)), p);

  const std::size_t h = frame.height(), w = frame.width(), plane = h * w;
  ojson steps = ojson::array();
  std::uint64_t total = 0;
  for (std::size_t t = 0; t < opt.steps; ++t) {
    std::uint64_t counts[2] = {0, 0};
    for (std::size_t c = 0; c < 2; ++c) {
      const std::size_t base = (c * opt.steps + t) * plane;
      for (std::size_t i = 0; i < plane; ++i) counts[c] += out.tensor()[base + i] > 0.0f ? 1 : 0;
    }
    total += counts[0] + counts[1];
    ojson s;
    s["step"] = t;
    s["spikes_on"] = counts[0];
    s["spikes_off"] = counts[1];
    s["spikes"] = counts[0] + counts[1];
    s["rate"] = static_cast<double>(counts[0] + counts[1]) / static_cast<double>(2 * plane);
    steps.push_back(s);
  }

  ojson report;
  report["input"] = opt.input;
  report["width"] = w;
  report["height"] = h;
  report["t_steps"] = opt.steps;
  report["input_events"] = {{"on", frame.on_total()}, {"off", frame.off_total()}};
  report["lif"] = {{"tau", opt.tau},
                   {"v_threshold", opt.threshold},
                   {"v_reset", opt.reset},
                   {"leak", opt.paper_literal ? "paper-literal" : "decay"},
                   {"lambda", p.lambda()},
                   {"gain", opt.gain}};
  report["steps"] = steps;
  report["total_spikes"] = total;
  emit_json(report, opt.json_out);

  if (!opt.raster.empty()) {
    // One panel per time step, left to right, separated by a gray column.
    const std::size_t panel = w + 1;
    Image raster(panel * opt.steps - 1, h, 3, 1.0f);
    for (std::size_t t = 0; t < opt.steps; ++t) {
      for (std::size_t y = 0; y < h; ++y) {
        if (t + 1 < opt.steps) {
          for (std::size_t c = 0; c < 3; ++c) raster.at(t * panel + w, y, c) = 0.5f;
        }
        for (std::size_t x = 0; x < w; ++x) {
          const bool on = out.at(0, t, y, x) > 0.0f;
          const bool off = out.at(1, t, y, x) > 0.0f;
          if (!on && !off) continue;
          raster.at(t * panel + x, y, 0) = on ? 1.0f : 0.0f;
          raster.at(t * panel + x, y, 1) = 0.0f;
          raster.at(t * panel + x, y, 2) = off ? 1.0f : 0.0f;
        }
      }
    }
    write_png(opt.raster, raster);
  }
  return kExitOk;
}

int run_fusion_check(const FusionCheckOptions& opt) {
  FusionCheckConfig cfg;
  cfg.channels = opt.channels;
  cfg.steps = opt.steps;
  cfg.height = cfg.width = opt.hw;
  cfg.trials = opt.trials;
  cfg.seed = opt.seed;
  FusionCheckReport report;
  try {
    report = evcam::run_fusion_check(cfg);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }

  ojson j;
  j["config"] = {{"c", cfg.channels}, {"t", cfg.steps}, {"h", cfg.height}, {"w", cfg.width},
                 {"trials", cfg.trials}, {"seed", cfg.seed}};
  ojson results = ojson::array();
  for (const auto& r : report.results) {
    results.push_back({{"name", r.name},
                       {"passed", r.passed},
                       {"measured", r.measured},
                       {"tolerance", r.tolerance},
                       {"detail", r.detail}});
  }
  j["invariants"] = results;
  j["all_passed"] = report.all_passed();
  emit_json(j, opt.json_out);
  return report.all_passed() ? kExitOk : kExitFatal;
}

int run_bench(const BenchOptions& opt) {
  if (opt.images == 0 || opt.size == 0) throw UsageError("--images and --size must be positive");
  const EventGenConfig cfg = to_config(opt.events);
  const ThroughputResult r = measure_throughput(opt.images, opt.size, opt.size, opt.workers, cfg, opt.alpha, opt.events.seed);
  const char* status = r.images_per_second >= opt.target ? "pass" : r.images_per_second >= opt.floor ? "warn" : "fail";

  ojson j;
  j["images"] = r.images;
  j["width"] = r.width;
  j["height"] = r.height;
  j["workers"] = r.workers;
  j["hardware_threads"] = std::thread::hardware_concurrency();
  j["seconds"] = r.seconds;
  j["images_per_second"] = r.images_per_second;
  j["target"] = opt.target;
  j["hard_floor"] = opt.floor;
  j["status"] = status;
  emit_json(j, opt.json_out);
  if (std::string(status) == "warn") {
    std::cerr << "evcam bench: warning: " << r.images_per_second << " images/s is below the " << opt.target
              << " images/s target\n";
  }
  return std::string(status) == "fail" ? kExitFatal : kExitOk;
}

}  // namespace evcam::cli
