#include <doctest.h>

#include <cmath>

#include "evcam/error.hpp"
#include "evcam/fusion.hpp"
#include "evcam/fusion_check.hpp"
#include "support/gen.hpp"
#include "support/oracles.hpp"

using namespace evcam;

namespace {

float max_abs_diff(const Tensor& a, const Tensor& b) {
  REQUIRE(a.shape() == b.shape());
  float m = 0.0f;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

Tensor map(const Tensor& x, double (*f)(double)) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = static_cast<float>(f(x[i]));
  return y;
}

// Reference CMA in double, from the naive convolution up.
Tensor ref_cma(const Tensor& f, const CmaWeights& w) {
  const std::size_t c = f.dim(0), hw = f.dim(1) * f.dim(2);
  const Tensor logits = oracle::conv2d(f, w.spatial);
  double peak = logits[0];
  for (std::size_t i = 0; i < hw; ++i) peak = std::max(peak, static_cast<double>(logits[i]));
  std::vector<double> a(hw);
  double total = 0.0;
  for (std::size_t i = 0; i < hw; ++i) total += a[i] = std::exp(logits[i] - peak);
  Tensor pooled({c, 1, 1});
  for (std::size_t ch = 0; ch < c; ++ch) {
    double acc = 0.0;
    for (std::size_t i = 0; i < hw; ++i) acc += f[ch * hw + i] * a[i] / total;
    pooled[ch] = static_cast<float>(acc);
  }
  const Tensor gate = map(oracle::conv2d(oracle::conv2d(pooled, w.squeeze), w.excite), oracle::sigmoid);
  Tensor out(f.shape());
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < hw; ++i) out[ch * hw + i] = gate[ch] * f[ch * hw + i];
  return out;
}

Tensor ref_scf(const Tensor& f_r, const Tensor& f_e, const FusionWeights& w) {
  const Tensor ce = ref_cma(f_e, w.cma_event);
  const Tensor cr = ref_cma(f_r, w.rgb_cma());
  Tensor fr(f_r.shape()), fe(f_e.shape());
  for (std::size_t i = 0; i < f_r.size(); ++i) {
    fr[i] = static_cast<float>(oracle::sigmoid(ce[i]) * f_r[i] + f_r[i]);
    fe[i] = static_cast<float>(oracle::sigmoid(cr[i]) * f_e[i] + f_e[i]);
  }
  const Tensor br = oracle::conv2d(fr, w.rgb_branch());
  const Tensor be = oracle::conv2d(fe, w.branch_event);
  Tensor cat({2 * br.dim(0), br.dim(1), br.dim(2)});
  for (std::size_t i = 0; i < br.size(); ++i) {
    cat[i] = std::max(br[i], be[i]);
    cat[br.size() + i] = static_cast<float>((static_cast<double>(br[i]) + be[i]) / 2.0);
  }
  return oracle::conv2d(cat, w.out_conv);
}

}  // namespace

TEST_SUITE("fusion") {

TEST_CASE("eta with a single step reduces to the slice") {
  gen::Gen g(81);
  const FusionWeights w = FusionWeights::seeded(3, 1);
  const SpikeTensor s(g.binary({3, 1, 4, 5}));
  const EtaTrace t = eta_trace(s, w);
  const Tensor slice = s.tensor().reshaped({3, 4, 5});
  CHECK(t.f_max == slice);
  CHECK(t.f_avg == slice);
}

TEST_CASE("eta of silence with zero bias is one half") {
  FusionWeights w = FusionWeights::seeded(4, 2);
  for (float& b : w.eta_conv.bias.data()) b = 0.0f;
  const Tensor out = eta(SpikeTensor(Tensor({4, 4, 3, 3})), w);
  for (float v : out.data()) CHECK(v == 0.5f);
}

TEST_CASE("eta reductions match a direct scan") {
  gen::Gen g(82);
  const FusionWeights w = FusionWeights::seeded(4, 3);
  const SpikeTensor s(g.binary({4, 4, 8, 8}));
  const EtaTrace t = eta_trace(s, w);
  for (std::size_t c = 0; c < 4; ++c) {
    for (std::size_t y = 0; y < 8; ++y) {
      for (std::size_t x = 0; x < 8; ++x) {
        float mx = 0.0f, sum = 0.0f;
        for (std::size_t k = 0; k < 4; ++k) {
          mx = std::max(mx, s.at(c, k, y, x));
          sum += s.at(c, k, y, x);
        }
        const float avg = t.f_avg.at({c, y, x});
        CHECK(t.f_max.at({c, y, x}) == mx);
        CHECK((t.f_max.at({c, y, x}) == 0.0f || t.f_max.at({c, y, x}) == 1.0f));
        CHECK(avg == sum / 4.0f);
        CHECK((avg >= 0.0f && avg <= 1.0f));
      }
    }
  }
  for (float v : t.out.data()) CHECK((v > 0.0f && v < 1.0f));
}

TEST_CASE("cma on a constant map pools the constant") {
  const FusionWeights w = FusionWeights::seeded(8, 4);
  const CmaTrace t = cma_trace(Tensor({8, 5, 5}, 0.75f), w.cma_event);
  for (float a : t.attention.data()) CHECK(a == doctest::Approx(1.0 / 25).epsilon(1e-5));
  for (float p : t.pooled.data()) CHECK(p == doctest::Approx(0.75).epsilon(1e-5));
}

TEST_CASE("cma pooling equals the explicit weighted sum") {
  gen::for_all(10, 83, [](gen::Gen& g, std::size_t) {
    const Tensor f = g.tensor({8, 6, 6});
    const FusionWeights w = FusionWeights::seeded(8, g.u64());
    const CmaTrace t = cma_trace(f, w.cma_event);
    double total = 0.0;
    for (float a : t.attention.data()) {
      CHECK(a > 0.0f);
      total += a;
    }
    CHECK(std::fabs(total - 1.0) <= 1e-5);
    for (std::size_t c = 0; c < 8; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < 36; ++i) acc += static_cast<double>(f[c * 36 + i]) * t.attention[i];
      CHECK(std::fabs(t.pooled[c] - acc) <= 1e-5);
    }
    for (float v : t.gate.data()) CHECK((v > 0.0f && v < 1.0f));
    CHECK(t.gate.shape() == Shape{8, 1, 1});
    CHECK(max_abs_diff(t.out, ref_cma(f, w.cma_event)) <= 1e-5f);
  });
}

TEST_CASE("basic fusion examples") {
  gen::Gen g(84);
  const Tensor f_r = g.tensor({3, 4, 4});
  const Tensor zero({3, 4, 4});
  const Tensor half = basic_fusion(zero, f_r);
  for (std::size_t i = 0; i < f_r.size(); ++i) CHECK(half[i] == doctest::Approx(1.5 * f_r[i]).epsilon(1e-6));
  const Tensor witness = basic_fusion(g.tensor({3, 4, 4}, -5, 5), zero);
  for (float v : witness.data()) CHECK(v == 0.0f);

  const Tensor f_ec = g.tensor({3, 4, 4}, -3, 3);
  const Tensor out = basic_fusion(f_ec, f_r);
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(std::fabs(out[i] - (oracle::sigmoid(f_ec[i]) * f_r[i] + f_r[i])) <= 1e-6);
  }
  CHECK_THROWS_AS(basic_fusion(f_ec, Tensor({3, 4, 5})), InvalidInput);
}

TEST_CASE("scf sum stage and output are swap-symmetric under shared weights") {
  gen::for_all(20, 85, [](gen::Gen& g, std::size_t) {
    const FusionWeights w = FusionWeights::seeded(8, g.u64());
    const Tensor a = g.tensor({8, 6, 5});
    const Tensor b = g.tensor({8, 6, 5});
    const ScfTrace ab = scf_trace(a, b, w);
    const ScfTrace ba = scf_trace(b, a, w);
    CHECK(ab.fusion_sum == ba.fusion_sum);
    CHECK(max_abs_diff(ab.out, ba.out) <= 1e-5f);
  });
}

TEST_CASE("equal inputs collapse the branches") {
  gen::Gen g(86);
  const FusionWeights w = FusionWeights::seeded(4, 5);
  const Tensor x = g.tensor({4, 5, 5});
  const ScfTrace t = scf_trace(x, x, w);
  CHECK(t.fusion_rgb == t.fusion_event);
  CHECK(t.f_max == t.branch_rgb);
  CHECK(max_abs_diff(t.f_avg, t.branch_rgb) == 0.0f);
}

TEST_CASE("scf matches a straight-line double-precision reference") {
  gen::for_all(10, 87, [](gen::Gen& g, std::size_t t) {
    const bool shared = t % 2 == 0;
    const FusionWeights w = FusionWeights::seeded(g.size(1, 8), g.u64(), shared, shared);
    const Tensor a = g.tensor({w.channels, g.size(1, 7), 6});
    const Tensor b = g.tensor(a.shape());
    CHECK(max_abs_diff(scf(a, b, w), ref_scf(a, b, w)) <= 1e-5f);
  });
}

TEST_CASE("scf with zero rgb features still carries the event branch") {
  gen::Gen g(88);
  const FusionWeights w = FusionWeights::seeded(8, 6);
  const Tensor zero({8, 6, 6});
  const Tensor f_e = g.tensor({8, 6, 6});
  const Tensor with_events = scf(zero, f_e, w);
  const Tensor without = scf(zero, zero, w);
  CHECK(max_abs_diff(with_events, without) > 1e-3f);
}

TEST_CASE("unshared weights break the symmetry") {
  gen::Gen g(89);
  const FusionWeights w = FusionWeights::seeded(8, 7, false, false);
  const Tensor a = g.tensor({8, 5, 5});
  const Tensor b = g.tensor({8, 5, 5});
  CHECK(max_abs_diff(scf(a, b, w), scf(b, a, w)) > 1e-4f);
}

TEST_CASE("shape contract") {
  const FusionWeights w = FusionWeights::seeded(6, 8);
  gen::Gen g(90);
  const SpikeTensor s(g.binary({6, 4, 7, 9}));
  const Tensor f_r = g.tensor({6, 7, 9});
  const EtaTrace e = eta_trace(s, w);
  CHECK(e.out.shape() == Shape{6, 7, 9});
  const ScfTrace t = scf_trace(f_r, e.out, w);
  CHECK(t.cma_rgb.attention.shape() == Shape{1, 7, 9});
  CHECK(t.cma_rgb.pooled.shape() == Shape{6});
  CHECK(t.cma_rgb.gate.shape() == Shape{6, 1, 1});
  for (const Tensor* x : {&t.cma_rgb.out, &t.gate_rgb, &t.fusion_rgb, &t.fusion_sum, &t.branch_event, &t.f_max,
                          &t.f_avg, &t.out}) {
    CHECK(x->shape() == Shape{6, 7, 9});
  }
  CHECK(sref(f_r, s, w) == t.out);
  CHECK_THROWS_AS(scf(f_r, g.tensor({6, 7, 8}), w), InvalidInput);
  CHECK_THROWS_AS(scf(g.tensor({5, 7, 9}), g.tensor({5, 7, 9}), w), InvalidInput);
  CHECK_THROWS_AS(eta(SpikeTensor(Tensor({5, 4, 7, 9})), w), InvalidInput);
  CHECK(cma_bottleneck(8) == 2);
  CHECK(cma_bottleneck(3) == 1);
}

TEST_CASE("weights serialize through the tensor map") {
  for (bool shared : {true, false}) {
    const FusionWeights w = FusionWeights::seeded(4, 9, shared, shared);
    const TensorMap m = w.to_tensors();
    CHECK(m.count("eta.conv.weight") == 1);
    CHECK(m.count("smf.out.bias") == 1);
    CHECK(m.count(shared ? "cma.spatial.weight" : "cma_rgb.spatial.weight") == 1);
    const FusionWeights back = FusionWeights::from_tensors(decode_weights(encode_weights(m)));
    gen::Gen g(91);
    const Tensor a = g.tensor({4, 5, 5}), b = g.tensor({4, 5, 5});
    CHECK(scf(a, b, back) == scf(a, b, w));
    TensorMap extra = m;
    extra["stray"] = Tensor({1});
    CHECK_THROWS_AS(FusionWeights::from_tensors(extra), InvalidInput);
    TensorMap missing = m;
    missing.erase("smf.out.bias");
    CHECK_THROWS_AS(FusionWeights::from_tensors(missing), InvalidInput);
  }
}

TEST_CASE("invariant suite passes on the default configuration") {
  const FusionCheckReport r = run_fusion_check(FusionCheckConfig{});
  CHECK(r.results.size() >= 7);
  for (const auto& res : r.results) {
    INFO(res.name << ": " << res.detail);
    CHECK(res.passed);
  }
  CHECK(r.all_passed());
}

}
