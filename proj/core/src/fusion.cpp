#include "evcam/fusion.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "evcam/error.hpp"
#include "evcam/hash.hpp"

namespace evcam {

std::size_t cma_bottleneck(std::size_t channels) noexcept { return std::max<std::size_t>(channels / 4, 1); }

namespace {

void check_conv(const ConvSpec& spec, std::size_t out, std::size_t in, std::size_t k, const char* site) {
  spec.validate();
  if (spec.out_channels() != out || spec.in_channels() != in || spec.kernel_size() != k) {
    throw InvalidInput(std::string("fusion weights: site ") + site + " has kernel " +
                       shape_string(spec.kernel.shape()) + ", expected (" + std::to_string(out) + ", " +
                       std::to_string(in) + ", " + std::to_string(k) + ", " + std::to_string(k) + ")");
  }
  if (spec.padding != k / 2 || spec.stride != 1) {
    throw InvalidInput(std::string("fusion weights: site ") + site + " must be stride 1 with same padding");
  }
}

void check_cma(const CmaWeights& w, std::size_t c, const char* site) {
  const std::size_t r = cma_bottleneck(c);
  check_conv(w.spatial, 1, c, 1, site);
  check_conv(w.squeeze, r, c, 1, site);
  check_conv(w.excite, c, r, 1, site);
}

CmaWeights seeded_cma(std::size_t c, std::uint64_t seed) {
  const std::size_t r = cma_bottleneck(c);
  return CmaWeights{make_conv(1, c, 1, hash_combine(seed, 1)), make_conv(r, c, 1, hash_combine(seed, 2)),
                    make_conv(c, r, 1, hash_combine(seed, 3))};
}

void put_conv(TensorMap& m, const std::string& prefix, const ConvSpec& s) {
  m[prefix + ".weight"] = s.kernel;
  m[prefix + ".bias"] = s.bias;
}

void put_cma(TensorMap& m, const std::string& prefix, const CmaWeights& w) {
  put_conv(m, prefix + ".spatial", w.spatial);
  put_conv(m, prefix + ".squeeze", w.squeeze);
  put_conv(m, prefix + ".excite", w.excite);
}

Tensor vec_tensor(const std::vector<float>& v) { return Tensor({v.size()}, v); }

class SiteReader {
 public:
  explicit SiteReader(const TensorMap& m) : m_(m) {}

  const Tensor& take(const std::string& name) {
    auto it = m_.find(name);
    if (it == m_.end()) throw InvalidInput("fusion weights: missing tensor '" + name + "'");
    used_.insert(name);
    return it->second;
  }
  bool has(const std::string& name) const { return m_.count(name) > 0; }

  ConvSpec conv(const std::string& prefix) {
    ConvSpec s;
    s.kernel = take(prefix + ".weight");
    s.bias = take(prefix + ".bias");
    if (s.kernel.rank() != 4) throw InvalidInput("fusion weights: '" + prefix + ".weight' must be rank 4");
    s.padding = s.kernel.dim(2) / 2;
    return s;
  }
  CmaWeights cma(const std::string& prefix) {
    CmaWeights w;
    w.spatial = conv(prefix + ".spatial");
    w.squeeze = conv(prefix + ".squeeze");
    w.excite = conv(prefix + ".excite");
    return w;
  }
  std::vector<float> vec(const std::string& name) {
    const Tensor& t = take(name);
    if (t.rank() != 1) throw InvalidInput("fusion weights: '" + name + "' must be rank 1");
    return t.values();
  }
  void ensure_all_used() const {
    for (const auto& [name, _] : m_) {
      if (!used_.count(name)) throw InvalidInput("fusion weights: unexpected tensor '" + name + "'");
    }
  }

 private:
  const TensorMap& m_;
  std::set<std::string> used_;
};

void require_chw(const Tensor& t, const char* what) {
  if (t.rank() != 3) throw InvalidInput(std::string(what) + " must be (C, H, W), got " + shape_string(t.shape()));
}

}  // namespace

FusionWeights FusionWeights::seeded(std::size_t channels, std::uint64_t seed, bool shared_cma, bool shared_branch) {
  if (channels == 0) throw InvalidInput("fusion weights need at least one channel");
  FusionWeights w;
  w.channels = channels;
  w.shared_cma = shared_cma;
  w.shared_branch = shared_branch;
  w.eta_conv = make_conv(channels, 2 * channels, 1, hash_combine(seed, 10));
  w.eta_bn = make_batchnorm(channels);
  w.cma_event = seeded_cma(channels, hash_combine(seed, 20));
  if (!shared_cma) w.cma_rgb = seeded_cma(channels, hash_combine(seed, 30));
  w.branch_event = make_conv(channels, channels, 1, hash_combine(seed, 40));
  if (!shared_branch) w.branch_rgb = make_conv(channels, channels, 1, hash_combine(seed, 50));
  w.out_conv = make_conv(channels, 2 * channels, 3, hash_combine(seed, 60));
  return w;
}

void FusionWeights::validate() const {
  const std::size_t c = channels;
  if (c == 0) throw InvalidInput("fusion weights need at least one channel");
  check_conv(eta_conv, c, 2 * c, 1, "eta.conv");
  eta_bn.validate();
  if (eta_bn.channels() != c) throw InvalidInput("fusion weights: eta.bn has the wrong channel count");
  check_cma(cma_event, c, shared_cma ? "cma" : "cma_event");
  if (!shared_cma) check_cma(cma_rgb, c, "cma_rgb");
  check_conv(branch_event, c, c, 1, shared_branch ? "smf.branch" : "smf.branch_event");
  if (!shared_branch) check_conv(branch_rgb, c, c, 1, "smf.branch_rgb");
  check_conv(out_conv, c, 2 * c, 3, "smf.out");
}

TensorMap FusionWeights::to_tensors() const {
  validate();
  TensorMap m;
  put_conv(m, "eta.conv", eta_conv);
  m["eta.bn.gamma"] = vec_tensor(eta_bn.gamma);
  m["eta.bn.beta"] = vec_tensor(eta_bn.beta);
  m["eta.bn.running_mean"] = vec_tensor(eta_bn.running_mean);
  m["eta.bn.running_var"] = vec_tensor(eta_bn.running_var);
  m["eta.bn.epsilon"] = Tensor({1}, {eta_bn.epsilon});
  if (shared_cma) {
    put_cma(m, "cma", cma_event);
  } else {
    put_cma(m, "cma_event", cma_event);
    put_cma(m, "cma_rgb", cma_rgb);
  }
  if (shared_branch) {
    put_conv(m, "smf.branch", branch_event);
  } else {
    put_conv(m, "smf.branch_event", branch_event);
    put_conv(m, "smf.branch_rgb", branch_rgb);
  }
  put_conv(m, "smf.out", out_conv);
  return m;
}

FusionWeights FusionWeights::from_tensors(const TensorMap& tensors) {
  SiteReader r(tensors);
  FusionWeights w;
  w.eta_conv = r.conv("eta.conv");
  w.channels = w.eta_conv.out_channels();
  w.eta_bn.gamma = r.vec("eta.bn.gamma");
  w.eta_bn.beta = r.vec("eta.bn.beta");
  w.eta_bn.running_mean = r.vec("eta.bn.running_mean");
  w.eta_bn.running_var = r.vec("eta.bn.running_var");
  const auto eps = r.vec("eta.bn.epsilon");
  if (eps.size() != 1) throw InvalidInput("fusion weights: eta.bn.epsilon must hold one value");
  w.eta_bn.epsilon = eps[0];
  w.shared_cma = r.has("cma.spatial.weight");
  if (w.shared_cma) {
    w.cma_event = r.cma("cma");
  } else {
    w.cma_event = r.cma("cma_event");
    w.cma_rgb = r.cma("cma_rgb");
  }
  w.shared_branch = r.has("smf.branch.weight");
  if (w.shared_branch) {
    w.branch_event = r.conv("smf.branch");
  } else {
    w.branch_event = r.conv("smf.branch_event");
    w.branch_rgb = r.conv("smf.branch_rgb");
  }
  w.out_conv = r.conv("smf.out");
  r.ensure_all_used();
  w.validate();
  return w;
}

EtaTrace eta_trace(const SpikeTensor& f_e, const FusionWeights& w) {
  w.validate();
  if (f_e.channels() != w.channels) {
    throw InvalidInput("eta: input has " + std::to_string(f_e.channels()) + " channels, weights expect " +
                       std::to_string(w.channels));
  }
  EtaTrace t;
  t.f_max = reduce(f_e.tensor(), 1, ReduceMode::max);
  t.f_avg = reduce(f_e.tensor(), 1, ReduceMode::avg);
  t.out = sigmoid(batchnorm_infer(conv2d(concat({t.f_max, t.f_avg}, 0), w.eta_conv), w.eta_bn));
  return t;
}

Tensor eta(const SpikeTensor& f_e, const FusionWeights& w) { return eta_trace(f_e, w).out; }

CmaTrace cma_trace(const Tensor& f, const CmaWeights& w) {
  require_chw(f, "cma input");
  const std::size_t c = f.dim(0), h = f.dim(1), wd = f.dim(2), hw = h * wd;
  check_cma(w, c, "cma");

  CmaTrace t;
  const Tensor logits = conv2d(f, w.spatial);  // (1, H, W)
  t.attention = softmax(logits.reshaped({hw}), 0).reshaped({1, h, wd});

  // (1, C, HW) x (1, HW, 1) -> C values.
  t.pooled = Tensor({c});
  for (std::size_t ch = 0; ch < c; ++ch) {
    float acc = 0.0f;
    for (std::size_t i = 0; i < hw; ++i) acc += f[ch * hw + i] * t.attention[i];
    t.pooled[ch] = acc;
  }

  const Tensor column = t.pooled.reshaped({c, 1, 1});
  t.gate = sigmoid(conv2d(conv2d(column, w.squeeze), w.excite));
  t.out = mul(t.gate, f);
  return t;
}

Tensor cma(const Tensor& f, const CmaWeights& w) { return cma_trace(f, w).out; }

Tensor basic_fusion(const Tensor& f_ec, const Tensor& f_r) {
  if (f_ec.shape() != f_r.shape()) {
    throw InvalidInput("basic_fusion: shapes " + shape_string(f_ec.shape()) + " and " + shape_string(f_r.shape()) +
                       " differ");
  }
  return add(mul(sigmoid(f_ec), f_r), f_r);
}

ScfTrace scf_trace(const Tensor& f_r, const Tensor& f_e, const FusionWeights& w) {
  w.validate();
  require_chw(f_r, "scf rgb features");
  require_chw(f_e, "scf event features");
  if (f_r.shape() != f_e.shape()) {
    throw InvalidInput("scf: rgb features " + shape_string(f_r.shape()) + " and event features " +
                       shape_string(f_e.shape()) + " differ");
  }
  if (f_r.dim(0) != w.channels) throw InvalidInput("scf: channel count does not match weights");

  ScfTrace t;
  t.cma_event = cma_trace(f_e, w.cma_event);
  t.cma_rgb = cma_trace(f_r, w.rgb_cma());
  t.gate_rgb = sigmoid(t.cma_event.out);
  t.gate_event = sigmoid(t.cma_rgb.out);
  t.fusion_rgb = add(mul(t.gate_rgb, f_r), f_r);
  t.fusion_event = add(mul(t.gate_event, f_e), f_e);
  t.fusion_sum = add(t.fusion_rgb, t.fusion_event);
  t.branch_rgb = conv2d(t.fusion_rgb, w.rgb_branch());
  t.branch_event = conv2d(t.fusion_event, w.branch_event);
  t.f_max = maximum(t.branch_rgb, t.branch_event);
  t.f_avg = scale(add(t.branch_rgb, t.branch_event), 0.5f);
  t.out = conv2d(concat({t.f_max, t.f_avg}, 0), w.out_conv);
  return t;
}

Tensor scf(const Tensor& f_r, const Tensor& f_e, const FusionWeights& w) { return scf_trace(f_r, f_e, w).out; }

Tensor sref(const Tensor& f_r, const SpikeTensor& spikes, const FusionWeights& w) {
  return scf(f_r, eta(spikes, w), w);
}

}  // namespace evcam
