#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "evcam/eventgen.hpp"
#include "evcam/tensor.hpp"

namespace evcam {

/// Time steps used when a static frame is constant-coded for the SNN.
inline constexpr std::size_t kDefaultTimeSteps = 4;

enum class LeakMode {
  decay,          // lambda = exp(-1 / tau)
  paper_literal,  // lambda = exp(+1 / tau), amplifying
};

struct LifParams {
  float tau = 2.0f;
  float v_threshold = 1.0f;
  float v_reset = 0.0f;
  LeakMode leak = LeakMode::decay;

  /// tau > 0 and v_reset < v_threshold; throws ConfigError.
  void validate() const;
  /// Membrane leak coefficient, rounded to float once.
  float lambda() const;
};

/// Post-reset membrane potentials V[n], one per neuron.
struct LifState {
  std::vector<float> v;

  static LifState zeros(std::size_t neurons) { return LifState{std::vector<float>(neurons, 0.0f)}; }
};

struct LifStep {
  LifState state;
  std::vector<float> spikes;  // 0 or 1 per neuron
};

// U = lambda * V + I;  S = [U >= threshold];  V' = U (1 - S) + V_reset S
LifStep lif_step(const LifState& state, std::span<const float> input, const LifParams& p);

/// Runs the neuron population over the T axis of a (C, T, H, W) input
/// current volume from V = 0; one neuron per (c, y, x).
SpikeTensor lif_run(const Tensor& currents, const LifParams& p);
SpikeTensor lif_run(const SpikeTensor& spikes, const LifParams& p);

}  // namespace evcam
