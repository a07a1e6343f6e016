#include "evcam/fusion_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "evcam/error.hpp"
#include "evcam/fusion.hpp"
#include "evcam/hash.hpp"

namespace evcam {

bool FusionCheckReport::all_passed() const {
  return std::all_of(results.begin(), results.end(), [](const InvariantResult& r) { return r.passed; });
}

namespace {

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::fabs(double(a[i]) - double(b[i])));
  return worst;
}

double max_abs(const Tensor& a) {
  double m = 0.0;
  for (float v : a.data()) m = std::max(m, std::fabs(double(v)));
  return m;
}

// Smallest distance of any entry to the boundary of (0, 1); <= 0 means violated.
double gate_margin(const Tensor& g) {
  double m = std::numeric_limits<double>::infinity();
  for (float v : g.data()) m = std::min({m, double(v), 1.0 - double(v)});
  return m;
}

}  // namespace

FusionCheckReport run_fusion_check(const FusionCheckConfig& cfg) {
  if (cfg.channels == 0 || cfg.steps == 0 || cfg.height == 0 || cfg.width == 0 || cfg.trials == 0) {
    throw ConfigError("fusion-check dimensions and trial count must be positive");
  }
  const std::size_t c = cfg.channels, h = cfg.height, w = cfg.width;
  const Shape chw{c, h, w};

  double swap_err = 0.0, softmax_err = 0.0, softmax_min = std::numeric_limits<double>::infinity();
  double margin = std::numeric_limits<double>::infinity();
  double basic_zero = 0.0, scf_zero_rgb_min = std::numeric_limits<double>::infinity();
  bool shapes_ok = true, finite_ok = true;
  std::string shape_detail;

  auto expect_shape = [&](const Tensor& t, const Shape& s, const char* name) {
    if (t.shape() != s && shapes_ok) {
      shapes_ok = false;
      shape_detail = std::string(name) + " has shape " + shape_string(t.shape()) + ", expected " + shape_string(s);
    }
  };

  for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
    const std::uint64_t key = counter_hash(cfg.seed, 0xF05E, trial);
    const FusionWeights weights = FusionWeights::seeded(c, hash_combine(key, 1));
    const Tensor f_r = random_uniform(chw, -1.0f, 1.0f, hash_combine(key, 2));
    const SpikeTensor spikes(random_binary({c, cfg.steps, h, w}, 0.3, hash_combine(key, 3)));

    const EtaTrace et = eta_trace(spikes, weights);
    const Tensor& f_e = et.out;
    const ScfTrace fwd = scf_trace(f_r, f_e, weights);
    const ScfTrace rev = scf_trace(f_e, f_r, weights);

    swap_err = std::max(swap_err, max_abs_diff(fwd.out, rev.out));

    for (const CmaTrace* t : {&fwd.cma_rgb, &fwd.cma_event, &rev.cma_rgb, &rev.cma_event}) {
      double sum = 0.0;
      for (float v : t->attention.data()) {
        sum += v;
        softmax_min = std::min(softmax_min, double(v));
      }
      softmax_err = std::max(softmax_err, std::fabs(sum - 1.0));
      margin = std::min(margin, gate_margin(t->gate));
      expect_shape(t->attention, {1, h, w}, "cma.attention");
      expect_shape(t->pooled, {c}, "cma.pooled");
      expect_shape(t->gate, {c, 1, 1}, "cma.gate");
      expect_shape(t->out, chw, "cma.out");
    }
    margin = std::min({margin, gate_margin(et.out), gate_margin(fwd.gate_rgb), gate_margin(fwd.gate_event)});

    basic_zero = std::max(basic_zero, max_abs(basic_fusion(fwd.cma_event.out, Tensor(chw))));
    scf_zero_rgb_min = std::min(scf_zero_rgb_min, max_abs(scf(Tensor(chw), f_e, weights)));

    expect_shape(et.f_max, chw, "eta.f_max");
    expect_shape(et.f_avg, chw, "eta.f_avg");
    expect_shape(et.out, chw, "eta.out");
    for (const Tensor* t : {&fwd.gate_rgb, &fwd.gate_event, &fwd.fusion_rgb, &fwd.fusion_event, &fwd.fusion_sum,
                            &fwd.branch_rgb, &fwd.branch_event, &fwd.f_max, &fwd.f_avg, &fwd.out}) {
      expect_shape(*t, chw, "scf intermediate");
      finite_ok = finite_ok && t->all_finite();
    }
  }

  FusionCheckReport report;
  report.config = cfg;
  report.results.push_back({"scf_swap_symmetry", swap_err <= 1e-5, swap_err, 1e-5,
                            "max |scf(a,b) - scf(b,a)| with shared weights"});
  report.results.push_back({"softmax_sums_to_one", softmax_err <= 1e-5 && softmax_min > 0.0, softmax_err, 1e-5,
                            "max |sum(attention) - 1|; every entry > 0"});
  report.results.push_back({"gates_in_open_unit_interval", margin > 0.0, margin, 0.0,
                            "min distance of any sigmoid gate to {0, 1}"});
  report.results.push_back({"basic_fusion_rgb_zero_is_zero", basic_zero == 0.0, basic_zero, 0.0,
                            "max |basic_fusion(f_ec, 0)|"});
  report.results.push_back({"scf_rgb_zero_is_nonzero", scf_zero_rgb_min > 0.0, scf_zero_rgb_min, 0.0,
                            "min over trials of max |scf(0, f_e)|"});
  report.results.push_back({"shape_contract", shapes_ok, shapes_ok ? 0.0 : 1.0, 0.0,
                            shapes_ok ? "all intermediates (C,H,W) / (1,H,W) / (C) / (C,1,1)" : shape_detail});
  report.results.push_back({"finite_outputs", finite_ok, finite_ok ? 0.0 : 1.0, 0.0, "no NaN/Inf in any stage"});
  return report;
}

}  // namespace evcam
