#pragma once

#include <cstddef>
#include <cstdint>

#include "evcam/eventgen.hpp"
#include "evcam/tensor.hpp"
#include "evcam/weights_io.hpp"

namespace evcam {

/// Cross-modality alignment parameters for one modality.
struct CmaWeights {
  ConvSpec spatial;  // 1x1, C -> 1: spatial attention logits
  ConvSpec squeeze;  // 1x1, C -> max(C / 4, 1)
  ConvSpec excite;   // 1x1, max(C / 4, 1) -> C
};

/// Every convolution / batch-norm site of the temporal attention and
/// symmetric fusion blocks.
///
/// When `shared_cma` is set, both modalities use `cma_event` and `cma_rgb`
/// is ignored; likewise `shared_branch` makes `branch_event` serve both
/// fusion branches. Serialized names:
///
///   eta.conv.{weight,bias}  eta.bn.{gamma,beta,running_mean,running_var,epsilon}
///   cma.* (shared) | cma_event.*, cma_rgb.*   with spatial/squeeze/excite.{weight,bias}
///   smf.branch.* (shared) | smf.branch_event.*, smf.branch_rgb.*
///   smf.out.{weight,bias}
struct FusionWeights {
  std::size_t channels = 0;
  bool shared_cma = true;
  bool shared_branch = true;

  ConvSpec eta_conv;  // 1x1, 2C -> C
  BatchNormSpec eta_bn;
  CmaWeights cma_event;
  CmaWeights cma_rgb;
  ConvSpec branch_event;  // 1x1, C -> C
  ConvSpec branch_rgb;
  ConvSpec out_conv;  // 3x3, 2C -> C, padding 1

  /// Seeded uniform(+-1/sqrt(fan_in)) convolutions, identity batch-norm.
  static FusionWeights seeded(std::size_t channels, std::uint64_t seed, bool shared_cma = true,
                              bool shared_branch = true);

  const CmaWeights& rgb_cma() const noexcept { return shared_cma ? cma_event : cma_rgb; }
  const ConvSpec& rgb_branch() const noexcept { return shared_branch ? branch_event : branch_rgb; }

  /// Throws InvalidInput if any site has the wrong shape for `channels`.
  void validate() const;

  TensorMap to_tensors() const;
  /// Requires exactly the site names above; unknown or missing names throw.
  static FusionWeights from_tensors(const TensorMap& tensors);
};

std::size_t cma_bottleneck(std::size_t channels) noexcept;

struct EtaTrace {
  Tensor f_max;  // (C, H, W) max over T
  Tensor f_avg;  // (C, H, W) mean over T
  Tensor out;    // sigmoid(BN(conv1x1([f_max, f_avg])))
};

EtaTrace eta_trace(const SpikeTensor& f_e, const FusionWeights& w);
Tensor eta(const SpikeTensor& f_e, const FusionWeights& w);

struct CmaTrace {
  Tensor attention;  // (1, H, W), softmax over all H*W positions
  Tensor pooled;     // (C) attention-weighted spatial sum per channel
  Tensor gate;       // (C, 1, 1) sigmoid channel gate
  Tensor out;        // (C, H, W) gate * f
};

CmaTrace cma_trace(const Tensor& f, const CmaWeights& w);
Tensor cma(const Tensor& f, const CmaWeights& w);

/// sigmoid(f_ec) * f_r + f_r
Tensor basic_fusion(const Tensor& f_ec, const Tensor& f_r);

struct ScfTrace {
  CmaTrace cma_rgb;
  CmaTrace cma_event;
  Tensor gate_rgb;      // sigmoid(cma_event.out), multiplies f_r
  Tensor gate_event;    // sigmoid(cma_rgb.out), multiplies f_e
  Tensor fusion_rgb;    // gate_rgb * f_r + f_r
  Tensor fusion_event;  // gate_event * f_e + f_e
  Tensor fusion_sum;    // fusion_rgb + fusion_event
  Tensor branch_rgb;    // conv1x1(fusion_rgb)
  Tensor branch_event;  // conv1x1(fusion_event)
  Tensor f_max;         // elementwise max of the branches
  Tensor f_avg;         // elementwise mean of the branches
  Tensor out;           // conv3x3([f_max, f_avg])
};

/// Symmetric fusion of RGB features f_r and (temporally refined) event
/// features f_e, both (C, H, W).
ScfTrace scf_trace(const Tensor& f_r, const Tensor& f_e, const FusionWeights& w);
Tensor scf(const Tensor& f_r, const Tensor& f_e, const FusionWeights& w);

/// Full fusion block: scf(f_r, eta(spikes)).
Tensor sref(const Tensor& f_r, const SpikeTensor& spikes, const FusionWeights& w);

}  // namespace evcam
