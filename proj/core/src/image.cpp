#include "evcam/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "evcam/error.hpp"
#include "evcam/hash.hpp"

namespace evcam {

namespace {

void check_dims(std::size_t width, std::size_t height, std::size_t channels) {
  if (width == 0 || height == 0) throw InvalidInput("image dimensions must be positive");
  if (channels != 1 && channels != 3) {
    throw InvalidInput("image must have 1 or 3 channels, got " + std::to_string(channels));
  }
}

void require_rgb(const Image& img, const char* op) {
  if (img.channels() != 3) {
    throw InvalidInput(std::string(op) + " expects a 3-channel image, got " + std::to_string(img.channels()));
  }
}

inline float clamp01(float v) noexcept { return std::clamp(v, 0.0f, 1.0f); }

}  // namespace

Image::Image(std::size_t width, std::size_t height, std::size_t channels, float fill)
    : width_(width), height_(height), channels_(channels) {
  check_dims(width, height, channels);
  if (!(fill >= 0.0f && fill <= 1.0f)) throw InvalidInput("image fill value outside [0, 1]");
  data_.assign(width * height * channels, fill);
}

Image::Image(std::size_t width, std::size_t height, std::size_t channels, std::vector<float> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  check_dims(width, height, channels);
  if (data_.size() != width * height * channels) {
    throw InvalidInput("image data length " + std::to_string(data_.size()) + " != " +
                       std::to_string(width) + "x" + std::to_string(height) + "x" + std::to_string(channels));
  }
  for (float v : data_) {
    if (!(v >= 0.0f && v <= 1.0f)) throw InvalidInput("image sample outside [0, 1]");
  }
}

Image Image::from_u8(std::size_t width, std::size_t height, std::size_t channels,
                     std::span<const std::uint8_t> samples) {
  check_dims(width, height, channels);
  if (samples.size() != width * height * channels) throw InvalidInput("u8 sample count does not match dimensions");
  Image img(width, height, channels);
  for (std::size_t i = 0; i < samples.size(); ++i) img.data_[i] = static_cast<float>(samples[i]) / 255.0f;
  return img;
}

std::vector<std::uint8_t> Image::to_u8() const {
  std::vector<std::uint8_t> out(data_.size());
  for (std::size_t i = 0; i < data_.size(); ++i) {
    // Same as lround for non-negative input; the double sum is exact.
    out[i] = static_cast<std::uint8_t>(static_cast<double>(clamp01(data_[i]) * 255.0f) + 0.5);
  }
  return out;
}

Hsv rgb_to_hsv(Rgb c) noexcept {
  const float mx = std::max({c.r, c.g, c.b});
  const float mn = std::min({c.r, c.g, c.b});
  const float chroma = mx - mn;
  Hsv out{0.0f, 0.0f, mx};
  if (mx > 0.0f) out.s = chroma / mx;
  if (chroma > 0.0f) {
    float h;
    if (mx == c.r) {
      h = (c.g - c.b) / chroma;
      if (h < 0.0f) h += 6.0f;
    } else if (mx == c.g) {
      h = (c.b - c.r) / chroma + 2.0f;
    } else {
      h = (c.r - c.g) / chroma + 4.0f;
    }
    out.h = h / 6.0f;
    if (out.h >= 1.0f) out.h -= 1.0f;
  }
  return out;
}

Rgb hsv_to_rgb(Hsv c) noexcept {
  if (c.s <= 0.0f) return {c.v, c.v, c.v};
  const float h6 = c.h * 6.0f;
  // Inline floor; std::floor is a libm call on baseline x86-64.
  int sector = static_cast<int>(h6);
  if (static_cast<float>(sector) > h6) --sector;
  const float f = h6 - static_cast<float>(sector);
  const float p = c.v * (1.0f - c.s);
  const float q = c.v * (1.0f - c.s * f);
  const float t = c.v * (1.0f - c.s * (1.0f - f));
  switch (sector % 6) {
    case 0: return {c.v, t, p};
    case 1: return {q, c.v, p};
    case 2: return {p, c.v, t};
    case 3: return {p, q, c.v};
    case 4: return {t, p, c.v};
    default: return {c.v, p, q};
  }
}

Image rgb_to_hsv(const Image& rgb) {
  require_rgb(rgb, "rgb_to_hsv");
  Image out(rgb.width(), rgb.height(), 3);
  auto src = rgb.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); i += 3) {
    const Hsv hsv = rgb_to_hsv(Rgb{src[i], src[i + 1], src[i + 2]});
    dst[i] = hsv.h;
    dst[i + 1] = hsv.s;
    dst[i + 2] = hsv.v;
  }
  return out;
}

Image hsv_to_rgb(const Image& hsv) {
  require_rgb(hsv, "hsv_to_rgb");
  Image out(hsv.width(), hsv.height(), 3);
  auto src = hsv.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); i += 3) {
    const Rgb rgb = hsv_to_rgb(Hsv{src[i], src[i + 1], src[i + 2]});
    dst[i] = clamp01(rgb.r);
    dst[i + 1] = clamp01(rgb.g);
    dst[i + 2] = clamp01(rgb.b);
  }
  return out;
}

Image apply_exposure(const Image& rgb, const ExposureConfig& cfg) {
  if (!(cfg.alpha > 0.0f) || !std::isfinite(cfg.alpha)) {
    throw ConfigError("exposure alpha must be a positive finite number, got " + std::to_string(cfg.alpha));
  }
  require_rgb(rgb, "apply_exposure");
  Image out(rgb.width(), rgb.height(), 3);
  auto src = rgb.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); i += 3) {
    Hsv hsv = rgb_to_hsv(Rgb{src[i], src[i + 1], src[i + 2]});
    hsv.v = clamp01(hsv.v * cfg.alpha);
    const Rgb back = hsv_to_rgb(hsv);
    dst[i] = clamp01(back.r);
    dst[i + 1] = clamp01(back.g);
    dst[i + 2] = clamp01(back.b);
  }
  return out;
}

Image luminance(const Image& img, LumaMode mode) {
  if (img.channels() == 1) return img;
  require_rgb(img, "luminance");
  Image out(img.width(), img.height(), 1);
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t p = 0, i = 0; p < dst.size(); ++p, i += 3) {
    const float r = src[i], g = src[i + 1], b = src[i + 2];
    dst[p] = mode == LumaMode::rec601 ? clamp01(0.299f * r + 0.587f * g + 0.114f * b) : std::max({r, g, b});
  }
  return out;
}

Image resize(const Image& img, std::size_t width, std::size_t height) {
  if (width == 0 || height == 0) throw InvalidInput("resize target dimensions must be positive");
  if (img.empty()) throw InvalidInput("resize of an empty image");
  if (width == img.width() && height == img.height()) return img;

  struct Tap {
    std::size_t i0, i1;
    float f;
  };
  auto taps = [](std::size_t out_len, std::size_t in_len) {
    std::vector<Tap> t(out_len);
    const double ratio = static_cast<double>(in_len) / static_cast<double>(out_len);
    const double last = static_cast<double>(in_len - 1);
    for (std::size_t o = 0; o < out_len; ++o) {
      const double src = std::clamp((static_cast<double>(o) + 0.5) * ratio - 0.5, 0.0, last);
      const auto i0 = static_cast<std::size_t>(std::floor(src));
      t[o] = {i0, std::min(i0 + 1, in_len - 1), static_cast<float>(src - static_cast<double>(i0))};
    }
    return t;
  };
  const auto tx = taps(width, img.width());
  const auto ty = taps(height, img.height());
  const std::size_t ch = img.channels();

  Image out(width, height, ch);
  for (std::size_t y = 0; y < height; ++y) {
    const Tap& vy = ty[y];
    for (std::size_t x = 0; x < width; ++x) {
      const Tap& vx = tx[x];
      for (std::size_t c = 0; c < ch; ++c) {
        const float top = img.at(vx.i0, vy.i0, c) * (1.0f - vx.f) + img.at(vx.i1, vy.i0, c) * vx.f;
        const float bottom = img.at(vx.i0, vy.i1, c) * (1.0f - vx.f) + img.at(vx.i1, vy.i1, c) * vx.f;
        out.at(x, y, c) = clamp01(top * (1.0f - vy.f) + bottom * vy.f);
      }
    }
  }
  return out;
}

Image quantize_u8(const Image& img) {
  if (img.empty()) return img;
  const auto bytes = img.to_u8();
  return Image::from_u8(img.width(), img.height(), img.channels(), bytes);
}

Image random_image(std::size_t width, std::size_t height, std::size_t channels, std::uint64_t seed) {
  Image img(width, height, channels);
  auto data = img.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = static_cast<float>(unit_interval(counter_hash(seed, 0x1AA6E, i)));
  }
  return img;
}

}  // namespace evcam
