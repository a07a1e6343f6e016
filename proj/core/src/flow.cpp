#include "evcam/flow.hpp"

#include <cmath>
#include <string>

#include "evcam/error.hpp"
#include "evcam/hash.hpp"
#include "evcam/parallel.hpp"

namespace evcam {

std::string_view to_string(FlowMode mode) { return mode == FlowMode::random ? "random" : "fixed"; }

FlowMode parse_flow_mode(std::string_view text) {
  if (text == "random") return FlowMode::random;
  if (text == "fixed") return FlowMode::fixed;
  throw ConfigError("unknown flow mode '" + std::string(text) + "' (expected random|fixed)");
}

void FlowConfig::validate() const {
  if (mode == FlowMode::fixed && !(theta >= -std::numbers::pi && theta <= std::numbers::pi)) {
    throw ConfigError("fixed flow theta must lie in [-pi, pi], got " + std::to_string(theta));
  }
}

FlowField::FlowField(std::size_t width, std::size_t height)
    : width_(width), height_(height), vx_(width * height), vy_(width * height) {
  if (width == 0 || height == 0) throw InvalidInput("flow field dimensions must be positive");
}

FlowField FlowField::negated() const {
  FlowField out = *this;
  for (float& v : out.vx_) v = -v;
  for (float& v : out.vy_) v = -v;
  return out;
}

double random_flow_angle(std::uint64_t seed, std::size_t x, std::size_t y) noexcept {
  const double u = unit_interval(counter_hash(seed, x, y));
  return -std::numbers::pi + 2.0 * std::numbers::pi * u;
}

FlowField generate_flow(std::size_t width, std::size_t height, const FlowConfig& cfg, unsigned workers) {
  cfg.validate();
  FlowField flow(width, height);
  auto vx = flow.vx();
  auto vy = flow.vy();
  if (cfg.mode == FlowMode::fixed) {
    const auto cx = static_cast<float>(std::cos(cfg.theta));
    const auto cy = static_cast<float>(std::sin(cfg.theta));
    std::fill(vx.begin(), vx.end(), cx);
    std::fill(vy.begin(), vy.end(), cy);
    return flow;
  }
  parallel_for(height, workers, [&](std::size_t y0, std::size_t y1) {
    for (std::size_t y = y0; y < y1; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        const double theta = random_flow_angle(cfg.seed, x, y);
        vx[y * width + x] = static_cast<float>(std::cos(theta));
        vy[y * width + x] = static_cast<float>(std::sin(theta));
      }
    }
  });
  return flow;
}

Image flow_to_image(const FlowField& flow) {
  Image out(flow.width(), flow.height(), 3);
  auto vx = flow.vx();
  auto vy = flow.vy();
  for (std::size_t i = 0; i < vx.size(); ++i) {
    double hue = std::atan2(vy[i], vx[i]) / (2.0 * std::numbers::pi);
    if (hue < 0.0) hue += 1.0;
    const Rgb rgb = hsv_to_rgb(Hsv{static_cast<float>(hue), 1.0f, 1.0f});
    out.data()[3 * i] = rgb.r;
    out.data()[3 * i + 1] = rgb.g;
    out.data()[3 * i + 2] = rgb.b;
  }
  return out;
}

}  // namespace evcam
