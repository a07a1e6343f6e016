#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "evcam/snn.hpp"

namespace evcam::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitPartial = 2;
inline constexpr int kExitUsage = 64;

/// Bad flag value detected after parsing; maps to exit code 64.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flags shared by every subcommand that synthesizes events.
struct EventFlags {
  double threshold = 0.1;
  double dt = 1.0;
  std::string flow = "random";
  double theta = std::numbers::pi / 4;
  std::uint64_t seed = 0;
  std::uint32_t cap = 1;
  std::string luma = "rec601";
};

struct ExposeOptions {
  std::string input;
  std::string output;
  double alpha = 1.0;
};

struct EventsOptions {
  std::string input;
  std::string output;
  EventFlags events;
  std::vector<std::string> emit{"evtf"};
  std::string flow_png;
  unsigned workers = 0;
};

struct DatasetOptions {
  std::string input;
  std::string output;
  std::string layout = "flat";
  std::string alphas = "1";
  std::string size = "320x320";
  std::vector<std::string> splits;
  EventFlags events;
  bool viz = false;
  unsigned workers = 0;
};

struct SnnDemoOptions {
  std::string input;
  std::size_t steps = kDefaultTimeSteps;
  double tau = 2.0;
  double threshold = 1.0;
  double reset = 0.0;
  double gain = 1.0;
  bool paper_literal = false;
  std::string json_out;
  std::string raster;
};

struct FusionCheckOptions {
  std::size_t channels = 8;
  std::size_t steps = kDefaultTimeSteps;
  std::size_t hw = 16;
  std::size_t trials = 20;
  std::uint64_t seed = 0;
  std::string json_out;
};

struct BenchOptions {
  std::size_t images = 256;
  std::size_t size = 320;
  double alpha = 1.0;
  double target = 100.0;
  double floor = 25.0;
  EventFlags events;
  unsigned workers = 0;
  std::string json_out;
};

int run_expose(const ExposeOptions& opt);
int run_events(const EventsOptions& opt);
int run_dataset(const DatasetOptions& opt);
int run_snn_demo(const SnnDemoOptions& opt);
int run_fusion_check(const FusionCheckOptions& opt);
int run_bench(const BenchOptions& opt);

}  // namespace evcam::cli
