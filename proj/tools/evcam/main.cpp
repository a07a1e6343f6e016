#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "config_file.hpp"
#include "evcam/error.hpp"

using namespace evcam::cli;

namespace {

const CLI::Validator kPositive(
    [](std::string& text) -> std::string {
      double v = 0.0;
      if (!CLI::detail::lexical_cast(text, v) || !(v > 0.0)) return "must be a positive number, got " + text;
      return {};
    },
    "POSITIVE");

void add_event_flags(CLI::App* sub, EventFlags& f) {
  sub->add_option("--threshold", f.threshold, "Contrast threshold C on the [0,1] luminance scale");
  sub->add_option("--dt", f.dt, "Time step multiplying the flow");
  sub->add_option("--flow", f.flow, "Flow field mode")->check(CLI::IsMember({"random", "fixed"}));
  sub->add_option("--theta", f.theta, "Flow angle in radians for --flow fixed")
      ->check(CLI::Range(-3.14159265358979323846, 3.14159265358979323846));
  sub->add_option("--seed", f.seed, "Seed for the random flow field");
  sub->add_option("--cap", f.cap, "Maximum event count per pixel")->check(CLI::Range(1, 65535));
  sub->add_option("--luma", f.luma, "Intensity used for gradients")->check(CLI::IsMember({"rec601", "value"}));
}

void add_workers(CLI::App* sub, unsigned& workers) {
  sub->add_option("--workers", workers, "Worker threads (0 = all hardware threads)")->envname("EVCAM_WORKERS");
}

// Appends `--key value` for every config entry whose flag was not given on
// the command line, so explicit flags always win.
std::vector<std::string> merge_config(CLI::App* sub, const std::string& path, std::vector<std::string> args) {
  for (const auto& [key, value] : read_config_file(path)) {
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) throw UsageError(path + ": unknown key '" + key + "' for " + sub->get_name());
    if (opt->count() > 0) continue;
    if (opt->get_expected_min() == 0) {
      if (value == "true" || value == "1" || value == "yes" || value == "on") {
        args.push_back("--" + key);
      } else if (!(value == "false" || value == "0" || value == "no" || value == "off")) {
        throw UsageError(path + ": '" + key + "' expects true or false, got '" + value + "'");
      }
      continue;
    }
    args.push_back("--" + key);
    args.push_back(value);
  }
  return args;
}

void log_config(const CLI::App* sub, const std::string& config_path) {
  nlohmann::ordered_json j;
  j["command"] = sub->get_name();
  if (!config_path.empty()) j["config_file"] = config_path;
  nlohmann::ordered_json flags = nlohmann::ordered_json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->get_name() == "--help" || opt->get_name() == "--help-all") continue;
    std::string name = opt->get_single_name();
    if (opt->count() == 0) {
      flags[name] = opt->get_expected_min() == 0 ? "false" : opt->get_default_str();
      continue;
    }
    if (opt->get_expected_min() == 0) {
      flags[name] = "true";
      continue;
    }
    const auto& res = opt->results();
    std::string joined;
    for (std::size_t i = 0; i < res.size(); ++i) joined += (i ? "," : "") + res[i];
    flags[name] = joined;
  }
  j["flags"] = flags;
  std::cerr << "evcam: config " << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthesize exposure-shifted images and event frames, and check LIF/fusion math.", "evcam"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  app.add_option("--config", "key=value file whose keys mirror long flags; flags on the command line win");

  ExposeOptions expose;
  auto* s_expose = app.add_subcommand("expose", "Scale the HSV value channel of an image by alpha");
  s_expose->add_option("input", expose.input, "Input PNG or JPEG")->required();
  s_expose->add_option("output", expose.output, "Output PNG")->required();
  s_expose->add_option("--alpha", expose.alpha, "Exposure factor (< 1 darker, > 1 brighter)")
      ->check(kPositive);

  EventsOptions events;
  auto* s_events = app.add_subcommand("events", "Synthesize an event frame from one image");
  s_events->add_option("input", events.input, "Input PNG or JPEG")->required();
  s_events->add_option("output", events.output, "Output path; extension is replaced per --emit format")->required();
  add_event_flags(s_events, events.events);
  s_events->add_option("--emit", events.emit, "Output formats")
      ->delimiter(',')
      ->check(CLI::IsMember({"evtf", "csv", "png"}))
      ->default_str("evtf");
  s_events->add_option("--flow-png", events.flow_png, "Also write a hue-coded flow field PNG")
      ->default_str("none");
  add_workers(s_events, events.workers);

  DatasetOptions dataset;
  auto* s_dataset = app.add_subcommand("dataset", "Build a paired exposure/event dataset from an image tree");
  s_dataset->add_option("input", dataset.input, "Dataset root")->required();
  s_dataset->add_option("output", dataset.output, "Output root")->required();
  s_dataset->add_option("--layout", dataset.layout, "Input layout")->check(CLI::IsMember({"voc", "coco", "flat"}));
  s_dataset->add_option("--alphas", dataset.alphas, "Comma-separated alphas; [lo,hi] draws one per image");
  s_dataset->add_option("--size", dataset.size, "Resize target WxH, or 'none' to keep the original size");
  s_dataset->add_option("--splits", dataset.splits, "COCO split directories (default: all but annotations)")
      ->delimiter(',')
      ->default_str("all");
  add_event_flags(s_dataset, dataset.events);
  s_dataset->add_flag("--viz", dataset.viz, "Also write an event visualization PNG per entry")
      ->default_str("false");
  add_workers(s_dataset, dataset.workers);

  SnnDemoOptions snn;
  auto* s_snn = app.add_subcommand("snn-demo", "Constant-code an EVTF file and run LIF neurons over it");
  s_snn->add_option("input", snn.input, "EVTF file")->required();
  s_snn->add_option("--t", snn.steps, "Time steps")->check(kPositive);
  s_snn->add_option("--tau", snn.tau, "Membrane time constant");
  s_snn->add_option("--v-threshold", snn.threshold, "Firing threshold");
  s_snn->add_option("--v-reset", snn.reset, "Reset potential");
  s_snn->add_option("--gain", snn.gain, "Input current per spike");
  s_snn->add_flag("--paper-literal", snn.paper_literal, "Use the growing exp(+1/tau) leak instead of decay")
      ->default_str("false");
  s_snn->add_option("--json", snn.json_out, "Write the report here instead of stdout")->default_str("stdout");
  s_snn->add_option("--raster", snn.raster, "Write a spike raster PNG")->default_str("none");

  FusionCheckOptions fusion;
  auto* s_fusion = app.add_subcommand("fusion-check", "Run the fusion invariant suite on seeded random inputs");
  s_fusion->add_option("--c", fusion.channels, "Channels")->check(kPositive);
  s_fusion->add_option("--t", fusion.steps, "Spike time steps")->check(kPositive);
  s_fusion->add_option("--hw", fusion.hw, "Height and width")->check(kPositive);
  s_fusion->add_option("--trials", fusion.trials, "Random trials")->check(kPositive);
  s_fusion->add_option("--seed", fusion.seed, "Seed");
  s_fusion->add_option("--json", fusion.json_out, "Write the report here instead of stdout")->default_str("stdout");

  BenchOptions bench;
  auto* s_bench = app.add_subcommand("bench", "Measure event synthesis throughput on random images");
  s_bench->add_option("--images", bench.images, "Number of images");
  s_bench->add_option("--size", bench.size, "Square image side");
  s_bench->add_option("--alpha", bench.alpha, "Exposure factor")->check(kPositive);
  s_bench->add_option("--target", bench.target, "Images/s below which a warning is printed");
  s_bench->add_option("--floor", bench.floor, "Images/s below which the run fails");
  add_event_flags(s_bench, bench.events);
  add_workers(s_bench, bench.workers);
  s_bench->add_option("--json", bench.json_out, "Write the report here instead of stdout")->default_str("stdout");

  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  try {
    std::tie(config_path, args) = take_config_flag(args);
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
    CLI::App* sub = app.get_subcommands().front();
    if (!config_path.empty()) {
      args = merge_config(sub, config_path, args);
      app.clear();
      std::vector<std::string> again(args.rbegin(), args.rend());
      app.parse(again);
    }
    log_config(sub, config_path);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "evcam: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*s_expose) return run_expose(expose);
    if (*s_events) return run_events(events);
    if (*s_dataset) return run_dataset(dataset);
    if (*s_snn) return run_snn_demo(snn);
    if (*s_fusion) return run_fusion_check(fusion);
    if (*s_bench) return run_bench(bench);
  } catch (const UsageError& e) {
    std::cerr << "evcam: " << e.what() << '\n';
    return kExitUsage;
  } catch (const evcam::ConfigError& e) {
    std::cerr << "evcam: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "evcam: error: " << e.what() << '\n';
    return kExitFatal;
  }
  return kExitUsage;
}
