#include "evcam/snn.hpp"

#include <cmath>
#include <string>

#include "evcam/error.hpp"

namespace evcam {

void LifParams::validate() const {
  if (!(tau > 0.0f) || !std::isfinite(tau)) throw ConfigError("LIF tau must be positive");
  if (!(v_reset < v_threshold)) {
    throw ConfigError("LIF requires v_reset < v_threshold (got " + std::to_string(v_reset) + " >= " +
                      std::to_string(v_threshold) + ")");
  }
}

float LifParams::lambda() const {
  const double exponent = (leak == LeakMode::decay ? -1.0 : 1.0) / static_cast<double>(tau);
  return static_cast<float>(std::exp(exponent));
}

namespace {

inline float integrate(float& v, float input, float lambda, const LifParams& p) {
  const float u = lambda * v + input;
  const float s = u >= p.v_threshold ? 1.0f : 0.0f;
  v = s > 0.0f ? p.v_reset : u;
  return s;
}

}  // namespace

LifStep lif_step(const LifState& state, std::span<const float> input, const LifParams& p) {
  p.validate();
  if (state.v.size() != input.size()) {
    throw InvalidInput("lif_step: state has " + std::to_string(state.v.size()) + " neurons, input has " +
                       std::to_string(input.size()));
  }
  const float lambda = p.lambda();
  LifStep out{state, std::vector<float>(input.size())};
  for (std::size_t i = 0; i < input.size(); ++i) out.spikes[i] = integrate(out.state.v[i], input[i], lambda, p);
  return out;
}

SpikeTensor lif_run(const Tensor& currents, const LifParams& p) {
  p.validate();
  if (currents.rank() != 4) {
    throw InvalidInput("lif_run expects (C, T, H, W) input, got " + shape_string(currents.shape()));
  }
  const std::size_t c = currents.dim(0), t = currents.dim(1), plane = currents.dim(2) * currents.dim(3);
  if (t == 0) throw InvalidInput("lif_run needs at least one time step");
  const float lambda = p.lambda();
  Tensor out(currents.shape());
  std::vector<float> v(plane);
  for (std::size_t ch = 0; ch < c; ++ch) {
    std::fill(v.begin(), v.end(), 0.0f);
    for (std::size_t step = 0; step < t; ++step) {
      const std::size_t base = (ch * t + step) * plane;
      for (std::size_t i = 0; i < plane; ++i) out[base + i] = integrate(v[i], currents[base + i], lambda, p);
    }
  }
  return SpikeTensor(std::move(out));
}

SpikeTensor lif_run(const SpikeTensor& spikes, const LifParams& p) { return lif_run(spikes.tensor(), p); }

}  // namespace evcam
