#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evcam/eventgen.hpp"

namespace evcam {

enum class DatasetLayout { voc, coco, flat };

std::string_view to_string(DatasetLayout layout);
DatasetLayout parse_layout(std::string_view text);

/// One exposure setting: a fixed factor, or a range [lo, hi] from which each
/// image draws its own factor.
struct AlphaSpec {
  double value = 1.0;  // fixed factor (unused for ranges)
  double lo = 0.0;
  double hi = 0.0;
  bool is_range = false;

  static AlphaSpec fixed(double a) { return AlphaSpec{a, 0.0, 0.0, false}; }
  static AlphaSpec range(double lo, double hi) { return AlphaSpec{0.0, lo, hi, true}; }

  /// "0.2" or "[0.2,5]".
  std::string text() const;
  friend bool operator==(const AlphaSpec&, const AlphaSpec&) = default;
};

/// Parses a comma-separated list such as "0.2,5.0,[0.2,5]" (commas inside
/// brackets belong to the range). Throws ConfigError.
std::vector<AlphaSpec> parse_alpha_list(std::string_view text);

struct DatasetJob {
  std::filesystem::path input_root;
  DatasetLayout layout = DatasetLayout::flat;
  std::vector<AlphaSpec> alphas{AlphaSpec::fixed(1.0)};
  EventGenConfig event_cfg;
  std::uint64_t global_seed = 0;
  std::filesystem::path output_root;
  unsigned workers = 1;
  std::size_t resize_width = 320;  // 0 keeps the source size
  std::size_t resize_height = 320;
  bool emit_viz = false;                  // also write <stem>_a<alpha>_events.png
  std::vector<std::string> coco_splits;  // empty: every subdirectory except annotations/

  void validate() const;
};

struct ManifestEntry {
  std::string src;  // relative to input_root, '/'-separated
  std::string alpha_spec;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  double threshold_c = 0.0;
  double dt = 0.0;
  std::uint32_t count_cap = 0;
  std::string flow_mode;
  double theta = 0.0;  // meaningful for fixed flow only
  std::size_t width = 0;
  std::size_t height = 0;
  std::string out_exposed;  // relative to output_root
  std::string out_event;
  std::string out_viz;  // empty unless visualizations were requested
  std::string checksum;  // FNV-1a 64 of the EVTF bytes, 16 hex digits
  std::uint64_t events_on = 0;
  std::uint64_t events_off = 0;
  std::string status;  // "ok" | "failed"
  std::string error;

  bool ok() const noexcept { return status == "ok"; }
  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct JobResult {
  std::vector<ManifestEntry> entries;
  std::filesystem::path manifest_path;
  std::size_t failed = 0;

  /// 0 when every entry succeeded, 2 when some failed.
  int exit_code() const noexcept { return failed == 0 ? 0 : 2; }
};

inline constexpr std::string_view kManifestName = "manifest.jsonl";

/// Image files (png/jpg/jpeg, case-insensitive) under the layout's image
/// directories, as paths relative to root, sorted lexicographically.
/// voc: JPEGImages/; coco: split subdirectories; flat: recursive.
/// Throws LayoutError naming a missing directory.
std::vector<std::filesystem::path> discover(const std::filesystem::path& root, DatasetLayout layout,
                                            const std::vector<std::string>& coco_splits = {});

/// Stable 64-bit key of (global_seed, relative path).
std::uint64_t per_image_seed(std::uint64_t global_seed, std::string_view rel_path);

/// Exposure factor for alpha slot `slot` of an image with seed `image_seed`.
/// Ranges draw uniformly from [lo, hi], rounded to 4 decimals.
double resolve_alpha(const AlphaSpec& spec, std::uint64_t image_seed, std::size_t slot);

/// Processes every (image, alpha) pair and writes outputs plus the manifest.
/// Per-image failures are recorded; an unwritable output root throws IoError.
JobResult run_job(const DatasetJob& job);

std::string manifest_line(const ManifestEntry& entry);
ManifestEntry parse_manifest_line(std::string_view line);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

/// The per-pair transformation run_job applies (resize, exposure, 8-bit
/// quantization, event synthesis) without any I/O.
struct PairResult {
  Image exposed;
  EventFrame events;
};
PairResult synthesize_pair(const Image& rgb, double alpha, const EventGenConfig& cfg, std::size_t width,
                           std::size_t height);

struct ThroughputResult {
  std::size_t images = 0;
  std::size_t width = 0;
  std::size_t height = 0;
  unsigned workers = 0;
  double seconds = 0.0;
  double images_per_second = 0.0;
};

/// In-memory exposure + event synthesis over `images` random frames.
ThroughputResult measure_throughput(std::size_t images, std::size_t width, std::size_t height, unsigned workers,
                                    const EventGenConfig& cfg, double alpha = 1.0, std::uint64_t seed = 0);

}  // namespace evcam
