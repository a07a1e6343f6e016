#pragma once

// Straight-line reference implementations used as test oracles. They are
// written independently of the library (own index math, own hash, no
// parallelism) and kept deliberately naive.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

#include "evcam/eventgen.hpp"
#include "evcam/image.hpp"
#include "evcam/snn.hpp"
#include "evcam/tensor.hpp"

namespace oracle {

inline std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Angle of pixel (x, y): keyed hash of (seed, x, y) mapped to [-pi, pi).
inline double flow_angle(std::uint64_t seed, std::uint64_t x, std::uint64_t y) {
  std::uint64_t h = splitmix(seed);
  h = splitmix(h ^ splitmix(x));
  h = splitmix(h ^ splitmix(y));
  const double u = static_cast<double>(h >> 11) / 9007199254740992.0;
  return -std::numbers::pi + 2.0 * std::numbers::pi * u;
}

// 6-nested-loop cross-correlation, accumulated in double.
inline evcam::Tensor conv2d(const evcam::Tensor& x, const evcam::ConvSpec& s) {
  const std::size_t cin = x.dim(0), h = x.dim(1), w = x.dim(2);
  const std::size_t cout = s.kernel.dim(0), k = s.kernel.dim(2);
  const long pad = static_cast<long>(s.padding), stride = static_cast<long>(s.stride);
  const std::size_t oh = (h + 2 * s.padding - k) / s.stride + 1;
  const std::size_t ow = (w + 2 * s.padding - k) / s.stride + 1;
  evcam::Tensor out({cout, oh, ow});
  for (std::size_t o = 0; o < cout; ++o) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        double acc = s.bias[o];
        for (std::size_t i = 0; i < cin; ++i) {
          for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx) {
              const long iy = static_cast<long>(oy) * stride + static_cast<long>(ky) - pad;
              const long ix = static_cast<long>(ox) * stride + static_cast<long>(kx) - pad;
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(w)) continue;
              acc += static_cast<double>(s.kernel[((o * cin + i) * k + ky) * k + kx]) *
                     x[(i * h + static_cast<std::size_t>(iy)) * w + static_cast<std::size_t>(ix)];
            }
          }
        }
        out[(o * oh + oy) * ow + ox] = static_cast<float>(acc);
      }
    }
  }
  return out;
}

inline double batchnorm(double x, double gamma, double beta, double mean, double var, double eps) {
  return gamma * (x - mean) / std::sqrt(var + eps) + beta;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Single-threaded per-pixel event synthesis. Float operations: luma weights
// left to right; Sobel as weighted differences of opposite taps, summed in
// kernel order; then the dot product, dt scaling and floor/cap.
inline evcam::EventFrame events(const evcam::Image& img, const evcam::EventGenConfig& cfg,
                                const std::vector<float>* vx_override = nullptr,
                                const std::vector<float>* vy_override = nullptr) {
  const std::size_t w = img.width(), h = img.height();
  auto lum = [&](long x, long y) -> float {
    x = std::clamp(x, 0L, static_cast<long>(w) - 1);
    y = std::clamp(y, 0L, static_cast<long>(h) - 1);
    const auto ux = static_cast<std::size_t>(x), uy = static_cast<std::size_t>(y);
    if (img.channels() == 1) return img.at(ux, uy, 0);
    const float r = img.at(ux, uy, 0), g = img.at(ux, uy, 1), b = img.at(ux, uy, 2);
    if (cfg.luma == evcam::LumaMode::hsv_value) return std::max(r, std::max(g, b));
    return std::clamp(0.299f * r + 0.587f * g + 0.114f * b, 0.0f, 1.0f);
  };
  static const float weight[3] = {1.0f, 2.0f, 1.0f};

  std::vector<std::uint16_t> on(w * h), off(w * h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const long cx = static_cast<long>(x), cy = static_cast<long>(y);
      float gx = 0.0f, gy = 0.0f;
      for (int k = 0; k < 3; ++k) {
        const float dx = lum(cx + 1, cy + k - 1) - lum(cx - 1, cy + k - 1);
        const float dy = lum(cx + k - 1, cy + 1) - lum(cx + k - 1, cy - 1);
        gx = k == 0 ? dx : gx + weight[k] * dx;
        gy = k == 0 ? dy : gy + weight[k] * dy;
      }
      float vx, vy;
      if (vx_override != nullptr) {
        vx = (*vx_override)[y * w + x];
        vy = (*vy_override)[y * w + x];
      } else {
        const double theta =
            cfg.flow.mode == evcam::FlowMode::fixed ? cfg.flow.theta : flow_angle(cfg.flow.seed, x, y);
        vx = static_cast<float>(std::cos(theta));
        vy = static_cast<float>(std::sin(theta));
      }
      const float dl = -(gx * vx + gy * vy) * cfg.dt;
      const float n = std::min(std::floor(std::fabs(dl) / cfg.threshold_c), static_cast<float>(cfg.count_cap));
      if (dl > 0.0f) on[y * w + x] = static_cast<std::uint16_t>(n);
      if (dl < 0.0f) off[y * w + x] = static_cast<std::uint16_t>(n);
    }
  }
  return evcam::EventFrame(w, h, std::move(on), std::move(off));
}

struct LifTrace {
  std::vector<int> spikes;
  std::vector<float> v;  // post-step potential
};

// One neuron driven by `input[t]`, starting from V = 0.
inline LifTrace lif(const std::vector<float>& input, float lambda, float threshold, float reset) {
  LifTrace tr;
  float v = 0.0f;
  for (float i : input) {
    const float u = lambda * v + i;
    const bool s = u >= threshold;
    v = s ? reset : u;
    tr.spikes.push_back(s ? 1 : 0);
    tr.v.push_back(v);
  }
  return tr;
}

inline float leak(const evcam::LifParams& p) {
  const double e = 1.0 / static_cast<double>(p.tau);
  return static_cast<float>(std::exp(p.leak == evcam::LeakMode::decay ? -e : e));
}

}  // namespace oracle
