#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

#include "evcam/image.hpp"

namespace evcam {

enum class FlowMode { random, fixed };

std::string_view to_string(FlowMode mode);
/// "random" or "fixed"; throws ConfigError otherwise.
FlowMode parse_flow_mode(std::string_view text);

struct FlowConfig {
  FlowMode mode = FlowMode::random;
  double theta = std::numbers::pi / 4;  // radians, fixed mode only
  std::uint64_t seed = 0;

  /// theta must lie in [-pi, pi] in fixed mode.
  void validate() const;
};

/// Per-pixel unit velocity (cos theta, sin theta).
class FlowField {
 public:
  FlowField() = default;
  FlowField(std::size_t width, std::size_t height);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }

  std::span<float> vx() noexcept { return vx_; }
  std::span<float> vy() noexcept { return vy_; }
  std::span<const float> vx() const noexcept { return vx_; }
  std::span<const float> vy() const noexcept { return vy_; }

  /// Flow with every vector reversed (v -> -v).
  FlowField negated() const;

  friend bool operator==(const FlowField&, const FlowField&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<float> vx_;
  std::vector<float> vy_;
};

/// Angle of pixel (x, y) in random mode: uniform on [-pi, pi), a pure
/// function of (seed, x, y).
double random_flow_angle(std::uint64_t seed, std::size_t x, std::size_t y) noexcept;

/// Bit-identical output for any worker count.
FlowField generate_flow(std::size_t width, std::size_t height, const FlowConfig& cfg, unsigned workers = 1);

/// Debug rendering: direction as hue, full saturation and value.
Image flow_to_image(const FlowField& flow);

}  // namespace evcam
