#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "evcam/flow.hpp"
#include "evcam/image.hpp"
#include "evcam/tensor.hpp"

namespace evcam {

/// Spatial luminance gradient (Sobel), same size as the source image.
struct GradientField {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<float> gx;
  std::vector<float> gy;
};

/// Per-pixel brightness change; positive means the pixel gets brighter.
struct DeltaField {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<float> values;
};

/// ON/OFF event counts per pixel, row-major planes.
class EventFrame {
 public:
  EventFrame() = default;
  EventFrame(std::size_t width, std::size_t height);
  /// Throws InvalidInput on size mismatch or a pixel carrying both polarities.
  EventFrame(std::size_t width, std::size_t height, std::vector<std::uint16_t> on, std::vector<std::uint16_t> off);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }

  std::span<std::uint16_t> on() noexcept { return on_; }
  std::span<std::uint16_t> off() noexcept { return off_; }
  std::span<const std::uint16_t> on() const noexcept { return on_; }
  std::span<const std::uint16_t> off() const noexcept { return off_; }

  std::uint16_t on_at(std::size_t x, std::size_t y) const noexcept { return on_[y * width_ + x]; }
  std::uint16_t off_at(std::size_t x, std::size_t y) const noexcept { return off_[y * width_ + x]; }

  std::uint64_t on_total() const noexcept;
  std::uint64_t off_total() const noexcept;
  std::uint64_t event_count() const noexcept { return on_total() + off_total(); }
  std::uint16_t max_count() const noexcept;
  bool empty() const noexcept { return event_count() == 0; }

  friend bool operator==(const EventFrame&, const EventFrame&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint16_t> on_;
  std::vector<std::uint16_t> off_;
};

struct EventGenConfig {
  float threshold_c = 0.1f;  // contrast threshold on the [0, 1] intensity scale
  float dt = 1.0f;
  std::uint32_t count_cap = 1;  // 1 gives binary frames; max 65535
  FlowConfig flow;
  LumaMode luma = LumaMode::rec601;

  void validate() const;
};

/// Binary (C, T, H, W) spike volume.
class SpikeTensor {
 public:
  SpikeTensor() = default;
  /// Throws InvalidInput unless rank 4 with every entry in {0, 1}.
  explicit SpikeTensor(Tensor values);

  std::size_t channels() const { return values_.dim(0); }
  std::size_t steps() const { return values_.dim(1); }
  std::size_t height() const { return values_.dim(2); }
  std::size_t width() const { return values_.dim(3); }

  const Tensor& tensor() const noexcept { return values_; }
  float at(std::size_t c, std::size_t t, std::size_t y, std::size_t x) const {
    return values_[((c * steps() + t) * height() + y) * width() + x];
  }

  /// Rows [0, t) of the time axis.
  SpikeTensor first_steps(std::size_t t) const;

  friend bool operator==(const SpikeTensor&, const SpikeTensor&) = default;

 private:
  Tensor values_;
};

/// 3x3 Sobel with replicate padding: gx from [[-1,0,1],[-2,0,2],[-1,0,1]],
/// gy from its transpose. Input must be single-channel.
GradientField sobel(const Image& lum, unsigned workers = 1);

/// dL(u) = -(grad L(u) . v(u)) * dt
DeltaField delta_l(const GradientField& grad, const FlowField& flow, float dt, unsigned workers = 1);

/// n = min(floor(|dL| / C), cap), assigned to ON for dL > 0 and OFF for dL < 0.
EventFrame threshold_events(const DeltaField& dl, const EventGenConfig& cfg, unsigned workers = 1);

/// luminance -> sobel -> flow -> delta_l -> threshold. Output is a pure
/// function of (img, cfg); `workers` only changes scheduling.
EventFrame synthesize_events(const Image& img, const EventGenConfig& cfg, unsigned workers = 1);

/// Same pipeline with a caller-supplied flow field (cfg.flow is ignored).
EventFrame synthesize_events(const Image& img, const FlowField& flow, const EventGenConfig& cfg,
                             unsigned workers = 1);

/// Binarize ON/OFF planes and replicate T times: shape (2, T, H, W).
SpikeTensor constant_code(const EventFrame& frame, std::size_t t_steps);

}  // namespace evcam
