#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "evcam/snn.hpp"

namespace evcam {

struct FusionCheckConfig {
  std::size_t channels = 8;
  std::size_t steps = kDefaultTimeSteps;
  std::size_t height = 16;
  std::size_t width = 16;
  std::size_t trials = 20;
  std::uint64_t seed = 0;
};

struct InvariantResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;  // worst observed value of the checked quantity
  double tolerance = 0.0;
  std::string detail;
};

struct FusionCheckReport {
  FusionCheckConfig config;
  std::vector<InvariantResult> results;

  bool all_passed() const;
};

/// Evaluates the fusion invariants on `trials` seeded random inputs:
/// swap symmetry under shared weights, softmax normalization, gate range,
/// the basic-fusion asymmetry witness, shape contract and finiteness.
FusionCheckReport run_fusion_check(const FusionCheckConfig& cfg);

}  // namespace evcam
