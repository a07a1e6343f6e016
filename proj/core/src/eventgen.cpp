#include "evcam/eventgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "evcam/error.hpp"
#include "evcam/parallel.hpp"

namespace evcam {

EventFrame::EventFrame(std::size_t width, std::size_t height)
    : width_(width), height_(height), on_(width * height, 0), off_(width * height, 0) {}

EventFrame::EventFrame(std::size_t width, std::size_t height, std::vector<std::uint16_t> on,
                       std::vector<std::uint16_t> off)
    : width_(width), height_(height), on_(std::move(on)), off_(std::move(off)) {
  if (on_.size() != width * height || off_.size() != width * height) {
    throw InvalidInput("event frame planes do not match " + std::to_string(width) + "x" + std::to_string(height));
  }
  for (std::size_t i = 0; i < on_.size(); ++i) {
    if (on_[i] != 0 && off_[i] != 0) {
      throw InvalidInput("event frame pixel " + std::to_string(i) + " has both ON and OFF events");
    }
  }
}

std::uint64_t EventFrame::on_total() const noexcept {
  return std::accumulate(on_.begin(), on_.end(), std::uint64_t{0});
}

std::uint64_t EventFrame::off_total() const noexcept {
  return std::accumulate(off_.begin(), off_.end(), std::uint64_t{0});
}

std::uint16_t EventFrame::max_count() const noexcept {
  std::uint16_t m = 0;
  for (auto v : on_) m = std::max(m, v);
  for (auto v : off_) m = std::max(m, v);
  return m;
}

void EventGenConfig::validate() const {
  if (!(threshold_c > 0.0f) || !std::isfinite(threshold_c)) {
    throw ConfigError("contrast threshold must be positive, got " + std::to_string(threshold_c));
  }
  if (!(dt > 0.0f) || !std::isfinite(dt)) throw ConfigError("dt must be positive, got " + std::to_string(dt));
  if (count_cap < 1 || count_cap > std::numeric_limits<std::uint16_t>::max()) {
    throw ConfigError("count cap must be in [1, 65535], got " + std::to_string(count_cap));
  }
  flow.validate();
}

SpikeTensor::SpikeTensor(Tensor values) : values_(std::move(values)) {
  if (values_.rank() != 4) {
    throw InvalidInput("spike tensor must be (C, T, H, W), got " + shape_string(values_.shape()));
  }
  for (float v : values_.data()) {
    if (v != 0.0f && v != 1.0f) throw InvalidInput("spike tensor entries must be 0 or 1");
  }
}

SpikeTensor SpikeTensor::first_steps(std::size_t t) const {
  if (t == 0 || t > steps()) throw InvalidInput("first_steps: t out of range");
  const std::size_t plane = height() * width();
  Tensor out({channels(), t, height(), width()});
  for (std::size_t c = 0; c < channels(); ++c) {
    const auto src = values_.data().begin() + static_cast<std::ptrdiff_t>(c * steps() * plane);
    std::copy_n(src, t * plane, out.data().begin() + static_cast<std::ptrdiff_t>(c * t * plane));
  }
  return SpikeTensor(std::move(out));
}

GradientField sobel(const Image& lum, unsigned workers) {
  if (lum.channels() != 1) {
    throw InvalidInput("sobel expects a 1-channel image, got " + std::to_string(lum.channels()));
  }
  if (lum.empty()) throw InvalidInput("sobel of an empty image");
  const std::size_t w = lum.width(), h = lum.height();
  GradientField g{w, h, std::vector<float>(w * h), std::vector<float>(w * h)};
  const auto src = lum.data();

  parallel_for(h, workers, [&](std::size_t y0, std::size_t y1) {
    for (std::size_t y = y0; y < y1; ++y) {
      const float* up = src.data() + (y == 0 ? 0 : y - 1) * w;
      const float* mid = src.data() + y * w;
      const float* dn = src.data() + std::min(y + 1, h - 1) * w;
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t xl = x == 0 ? 0 : x - 1;
        const std::size_t xr = std::min(x + 1, w - 1);
        // Opposite taps are differenced first, so flat regions give exactly 0.
        const float gx = (up[xr] - up[xl]) + 2.0f * (mid[xr] - mid[xl]) + (dn[xr] - dn[xl]);
        const float gy = (dn[xl] - up[xl]) + 2.0f * (dn[x] - up[x]) + (dn[xr] - up[xr]);

        g.gx[y * w + x] = gx;
        g.gy[y * w + x] = gy;
      }
    }
  });
  return g;
}

DeltaField delta_l(const GradientField& grad, const FlowField& flow, float dt, unsigned workers) {
  if (grad.width != flow.width() || grad.height != flow.height()) {
    throw InvalidInput("delta_l: gradient is " + std::to_string(grad.width) + "x" + std::to_string(grad.height) +
                       " but flow is " + std::to_string(flow.width()) + "x" + std::to_string(flow.height()));
  }
  const std::size_t n = grad.width * grad.height;
  if (grad.gx.size() != n || grad.gy.size() != n) throw InvalidInput("delta_l: malformed gradient field");
  DeltaField out{grad.width, grad.height, std::vector<float>(n)};
  const auto vx = flow.vx();
  const auto vy = flow.vy();
  parallel_for(n, workers, [&](std::size_t i0, std::size_t i1) {
    for (std::size_t i = i0; i < i1; ++i) {
      out.values[i] = -(grad.gx[i] * vx[i] + grad.gy[i] * vy[i]) * dt;
    }
  });
  return out;
}

EventFrame threshold_events(const DeltaField& dl, const EventGenConfig& cfg, unsigned workers) {
  cfg.validate();
  const std::size_t n = dl.width * dl.height;
  if (dl.values.size() != n) throw InvalidInput("threshold_events: malformed delta field");
  EventFrame frame(dl.width, dl.height);
  auto on = frame.on();
  auto off = frame.off();
  const float c = cfg.threshold_c;
  const auto cap = static_cast<float>(cfg.count_cap);
  parallel_for(n, workers, [&](std::size_t i0, std::size_t i1) {
    for (std::size_t i = i0; i < i1; ++i) {
      const float d = dl.values[i];
      if (!std::isfinite(d)) throw InvalidInput("threshold_events: non-finite brightness change");
      // The quotient is non-negative, so truncation equals floor once it is
      // known to be below the cap.
      const float q = std::fabs(d) / c;
      const auto count = static_cast<std::uint16_t>(q >= cap ? cap : q);
      if (d > 0.0f) {
        on[i] = count;
      } else if (d < 0.0f) {
        off[i] = count;
      }
    }
  });
  return frame;
}

EventFrame synthesize_events(const Image& img, const FlowField& flow, const EventGenConfig& cfg,
                             unsigned workers) {
  cfg.validate();
  const Image lum = luminance(img, cfg.luma);
  const GradientField grad = sobel(lum, workers);
  const DeltaField dl = delta_l(grad, flow, cfg.dt, workers);
  return threshold_events(dl, cfg, workers);
}

EventFrame synthesize_events(const Image& img, const EventGenConfig& cfg, unsigned workers) {
  cfg.validate();
  if (img.empty()) throw InvalidInput("synthesize_events of an empty image");
  const FlowField flow = generate_flow(img.width(), img.height(), cfg.flow, workers);
  return synthesize_events(img, flow, cfg, workers);
}

SpikeTensor constant_code(const EventFrame& frame, std::size_t t_steps) {
  if (t_steps == 0) throw ConfigError("constant coding needs at least one time step");
  const std::size_t plane = frame.width() * frame.height();
  if (plane == 0) throw InvalidInput("constant coding of an empty event frame");
  Tensor out({2, t_steps, frame.height(), frame.width()});
  auto data = out.data();
  const auto on = frame.on();
  const auto off = frame.off();
  for (std::size_t t = 0; t < t_steps; ++t) {
    float* on_plane = data.data() + (0 * t_steps + t) * plane;
    float* off_plane = data.data() + (1 * t_steps + t) * plane;
    for (std::size_t i = 0; i < plane; ++i) {
      on_plane[i] = on[i] > 0 ? 1.0f : 0.0f;
      off_plane[i] = off[i] > 0 ? 1.0f : 0.0f;
    }
  }
  return SpikeTensor(std::move(out));
}

}  // namespace evcam
