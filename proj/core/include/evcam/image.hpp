#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace evcam {

/// Interleaved row-major float raster with samples in [0, 1].
/// channels is 1 (intensity) or 3 (RGB or HSV, depending on context).
class Image {
 public:
  Image() = default;
  Image(std::size_t width, std::size_t height, std::size_t channels, float fill = 0.0f);
  /// Validates dimensions, length and sample range; throws InvalidInput.
  Image(std::size_t width, std::size_t height, std::size_t channels, std::vector<float> data);

  /// 8-bit interleaved samples mapped by /255.
  static Image from_u8(std::size_t width, std::size_t height, std::size_t channels,
                       std::span<const std::uint8_t> samples);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept { return width_ * height_; }
  bool empty() const noexcept { return data_.empty(); }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }

  float& at(std::size_t x, std::size_t y, std::size_t c = 0) noexcept {
    return data_[(y * width_ + x) * channels_ + c];
  }
  float at(std::size_t x, std::size_t y, std::size_t c = 0) const noexcept {
    return data_[(y * width_ + x) * channels_ + c];
  }

  /// round(v * 255) per sample.
  std::vector<std::uint8_t> to_u8() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t channels_ = 0;
  std::vector<float> data_;
};

struct ExposureConfig {
  float alpha = 1.0f;  // V multiplier; < 1 underexposes, > 1 overexposes
};

enum class LumaMode {
  rec601,  // 0.299 R + 0.587 G + 0.114 B
  hsv_value,  // max(R, G, B)
};

struct Rgb {
  float r, g, b;
};
struct Hsv {
  float h, s, v;  // h in [0, 1)
};

/// Hexcone model; hue is 0 on the achromatic axis.
Hsv rgb_to_hsv(Rgb rgb) noexcept;
Rgb hsv_to_rgb(Hsv hsv) noexcept;

Image rgb_to_hsv(const Image& rgb);
Image hsv_to_rgb(const Image& hsv);

/// V' = clamp(V * alpha, 0, 1) in HSV space, back to RGB.
/// Throws ConfigError for alpha <= 0 (or non-finite).
Image apply_exposure(const Image& rgb, const ExposureConfig& cfg);

/// Single-channel intensity. 1-channel input passes through unchanged.
Image luminance(const Image& img, LumaMode mode = LumaMode::rec601);

/// Bilinear resampling with pixel-center alignment and edge clamping.
Image resize(const Image& img, std::size_t width, std::size_t height);

/// Snaps every sample to the nearest k/255, i.e. what an 8-bit PNG stores.
Image quantize_u8(const Image& img);

/// Uniform noise; sample i depends only on (seed, i).
Image random_image(std::size_t width, std::size_t height, std::size_t channels, std::uint64_t seed);

}  // namespace evcam
