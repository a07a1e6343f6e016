#include "evcam/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "evcam/error.hpp"
#include "evcam/hash.hpp"

namespace evcam {

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ')';
  return os.str();
}

std::size_t shape_volume(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(Shape shape, float fill)
    : shape_(std::move(shape)), data_(shape_volume(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_volume(shape_)) {
    throw InvalidInput("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_string(shape_));
  }
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw InvalidInput("index rank " + std::to_string(index.size()) + " != tensor rank " +
                       std::to_string(shape_.size()));
  }
  std::size_t off = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= shape_[axis]) throw InvalidInput("index out of range on axis " + std::to_string(axis));
    off = off * shape_[axis] + i;
    ++axis;
  }
  return off;
}

float& Tensor::at(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }
float Tensor::at(std::initializer_list<std::size_t> index) const { return data_[offset(index)]; }

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_volume(shape) != data_.size()) {
    throw InvalidInput("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  return Tensor(std::move(shape), data_);
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

void ConvSpec::validate() const {
  if (kernel.rank() != 4) throw InvalidInput("conv kernel must have rank 4, got " + shape_string(kernel.shape()));
  if (kernel.dim(2) != kernel.dim(3)) throw InvalidInput("conv kernel must be square");
  if (kernel.dim(2) % 2 == 0) throw InvalidInput("conv kernel size must be odd");
  if (bias.rank() != 1 || bias.dim(0) != kernel.dim(0)) {
    throw InvalidInput("conv bias shape " + shape_string(bias.shape()) + " does not match " +
                       std::to_string(kernel.dim(0)) + " output channels");
  }
  if (stride == 0) throw InvalidInput("conv stride must be positive");
}

ConvSpec make_conv(std::size_t out_ch, std::size_t in_ch, std::size_t k, std::uint64_t seed) {
  ConvSpec spec;
  spec.kernel = Tensor({out_ch, in_ch, k, k});
  spec.bias = Tensor({out_ch});
  spec.padding = k / 2;
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_ch * k * k));
  std::uint64_t counter = 0;
  auto draw = [&] {
    const double u = unit_interval(counter_hash(seed, 0xC0'4F, counter++));
    return static_cast<float>((2.0 * u - 1.0) * bound);
  };
  for (float& w : spec.kernel.data()) w = draw();
  for (float& b : spec.bias.data()) b = draw();
  return spec;
}

void BatchNormSpec::validate() const {
  const std::size_t c = gamma.size();
  if (beta.size() != c || running_mean.size() != c || running_var.size() != c) {
    throw InvalidInput("batchnorm parameter arrays have mismatched lengths");
  }
  if (epsilon < 0.0f) throw InvalidInput("batchnorm epsilon must be non-negative");
  for (float v : running_var) {
    if (!(v >= 0.0f)) throw InvalidInput("batchnorm running_var must be >= 0");
    if (v + epsilon <= 0.0f) throw InvalidInput("batchnorm var + epsilon must be positive");
  }
}

BatchNormSpec make_batchnorm(std::size_t channels, float epsilon) {
  return BatchNormSpec{std::vector<float>(channels, 1.0f), std::vector<float>(channels, 0.0f),
                       std::vector<float>(channels, 0.0f), std::vector<float>(channels, 1.0f),
                       epsilon};
}

Tensor conv2d(const Tensor& x, const ConvSpec& spec) {
  spec.validate();
  if (x.rank() != 3) throw InvalidInput("conv2d expects (C, H, W) input, got " + shape_string(x.shape()));
  const std::size_t cin = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (cin != spec.in_channels()) {
    throw InvalidInput("conv2d input has " + std::to_string(cin) + " channels, kernel expects " +
                       std::to_string(spec.in_channels()));
  }
  const std::size_t k = spec.kernel_size(), pad = spec.padding, stride = spec.stride;
  if (h + 2 * pad < k || w + 2 * pad < k) throw InvalidInput("conv2d kernel larger than padded input");
  const std::size_t ho = (h + 2 * pad - k) / stride + 1;
  const std::size_t wo = (w + 2 * pad - k) / stride + 1;
  const std::size_t cout = spec.out_channels();

  Tensor y({cout, ho, wo});
  auto out = y.data();
  auto in = x.data();
  auto ker = spec.kernel.data();
  const auto ipad = static_cast<std::ptrdiff_t>(pad);

  for (std::size_t oc = 0; oc < cout; ++oc) {
    float* plane = out.data() + oc * ho * wo;
    std::fill(plane, plane + ho * wo, spec.bias[oc]);
    for (std::size_t ic = 0; ic < cin; ++ic) {
      const float* src = in.data() + ic * h * w;
      for (std::size_t ky = 0; ky < k; ++ky) {
        for (std::size_t kx = 0; kx < k; ++kx) {
          const float wgt = ker[((oc * cin + ic) * k + ky) * k + kx];
          for (std::size_t oy = 0; oy < ho; ++oy) {
            const auto iy = static_cast<std::ptrdiff_t>(oy * stride + ky) - ipad;
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
            const float* row = src + static_cast<std::size_t>(iy) * w;
            float* orow = plane + oy * wo;
            for (std::size_t ox = 0; ox < wo; ++ox) {
              const auto ix = static_cast<std::ptrdiff_t>(ox * stride + kx) - ipad;
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
              orow[ox] += wgt * row[ix];
            }
          }
        }
      }
    }
  }
  return y;
}

Tensor batchnorm_infer(const Tensor& x, const BatchNormSpec& spec) {
  spec.validate();
  if (x.rank() != 3) throw InvalidInput("batchnorm expects (C, H, W) input, got " + shape_string(x.shape()));
  const std::size_t c = x.dim(0);
  if (c != spec.channels()) {
    throw InvalidInput("batchnorm has " + std::to_string(spec.channels()) + " channels, input has " +
                       std::to_string(c));
  }
  const std::size_t plane = x.dim(1) * x.dim(2);
  Tensor y(x.shape());
  for (std::size_t ch = 0; ch < c; ++ch) {
    const float inv_std = 1.0f / std::sqrt(spec.running_var[ch] + spec.epsilon);
    const float g = spec.gamma[ch], b = spec.beta[ch], m = spec.running_mean[ch];
    for (std::size_t i = ch * plane; i < (ch + 1) * plane; ++i) {
      y[i] = g * (x[i] - m) * inv_std + b;
    }
  }
  return y;
}

Tensor sigmoid(const Tensor& x) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = 1.0f / (1.0f + std::exp(-x[i]));
  return y;
}

namespace {

// View of a tensor as (outer, axis, inner) around one axis.
struct AxisView {
  std::size_t outer = 1, len = 1, inner = 1;
};

AxisView split_axis(const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) {
    throw InvalidInput("axis " + std::to_string(axis) + " out of range for shape " + shape_string(shape));
  }
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= shape[i];
  v.len = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) v.inner *= shape[i];
  return v;
}

template <typename Op>
Tensor broadcast_binary(const Tensor& a, const Tensor& b, Op op, const char* name) {
  if (a.shape() == b.shape()) {
    Tensor y(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) y[i] = op(a[i], b[i]);
    return y;
  }
  if (a.rank() != b.rank()) {
    throw InvalidInput(std::string(name) + ": rank mismatch " + shape_string(a.shape()) + " vs " +
                       shape_string(b.shape()));
  }
  const std::size_t r = a.rank();
  Shape out(r);
  for (std::size_t i = 0; i < r; ++i) {
    const std::size_t da = a.dim(i), db = b.dim(i);
    if (da != db && da != 1 && db != 1) {
      throw InvalidInput(std::string(name) + ": shapes " + shape_string(a.shape()) + " and " +
                         shape_string(b.shape()) + " do not broadcast");
    }
    out[i] = std::max(da, db);
  }
  Tensor y(out);
  std::vector<std::size_t> sa(r), sb(r), idx(r, 0);
  std::size_t acc_a = 1, acc_b = 1;
  for (std::size_t i = r; i-- > 0;) {
    sa[i] = a.dim(i) == 1 ? 0 : acc_a;
    sb[i] = b.dim(i) == 1 ? 0 : acc_b;
    acc_a *= a.dim(i);
    acc_b *= b.dim(i);
  }
  for (std::size_t flat = 0; flat < y.size(); ++flat) {
    std::size_t oa = 0, ob = 0;
    for (std::size_t i = 0; i < r; ++i) {
      oa += idx[i] * sa[i];
      ob += idx[i] * sb[i];
    }
    y[flat] = op(a[oa], b[ob]);
    for (std::size_t i = r; i-- > 0;) {
      if (++idx[i] < out[i]) break;
      idx[i] = 0;
    }
  }
  return y;
}

}  // namespace

Tensor softmax(const Tensor& x, std::size_t axis) {
  const AxisView v = split_axis(x.shape(), axis);
  Tensor y(x.shape());
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t in = 0; in < v.inner; ++in) {
      const std::size_t base = o * v.len * v.inner + in;
      float peak = x[base];
      for (std::size_t i = 1; i < v.len; ++i) peak = std::max(peak, x[base + i * v.inner]);
      double total = 0.0;
      for (std::size_t i = 0; i < v.len; ++i) {
        const float e = std::exp(x[base + i * v.inner] - peak);
        y[base + i * v.inner] = e;
        total += e;
      }
      const auto inv = static_cast<float>(1.0 / total);
      for (std::size_t i = 0; i < v.len; ++i) y[base + i * v.inner] *= inv;
    }
  }
  return y;
}

Tensor reduce(const Tensor& x, std::size_t axis, ReduceMode mode) {
  const AxisView v = split_axis(x.shape(), axis);
  if (v.len == 0) throw InvalidInput("cannot reduce over an empty axis");
  Shape out = x.shape();
  out.erase(out.begin() + static_cast<std::ptrdiff_t>(axis));
  Tensor y(out);
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t in = 0; in < v.inner; ++in) {
      const std::size_t base = o * v.len * v.inner + in;
      float acc = x[base];
      for (std::size_t i = 1; i < v.len; ++i) {
        const float val = x[base + i * v.inner];
        acc = mode == ReduceMode::max ? std::max(acc, val) : acc + val;
      }
      if (mode == ReduceMode::avg) acc /= static_cast<float>(v.len);
      y[o * v.inner + in] = acc;
    }
  }
  return y;
}

Tensor concat(std::span<const Tensor> xs, std::size_t axis) {
  if (xs.empty()) throw InvalidInput("concat of zero tensors");
  const Shape& first = xs.front().shape();
  split_axis(first, axis);
  Shape out = first;
  out[axis] = 0;
  for (const Tensor& t : xs) {
    if (t.rank() != first.size()) throw InvalidInput("concat: rank mismatch");
    for (std::size_t i = 0; i < first.size(); ++i) {
      if (i != axis && t.dim(i) != first[i]) {
        throw InvalidInput("concat: shapes " + shape_string(first) + " and " + shape_string(t.shape()) +
                           " differ off the concat axis");
      }
    }
    out[axis] += t.dim(axis);
  }
  Tensor y(out);
  const AxisView vo = split_axis(out, axis);
  std::size_t offset = 0;
  for (const Tensor& t : xs) {
    const std::size_t chunk = t.dim(axis) * vo.inner;
    for (std::size_t o = 0; o < vo.outer; ++o) {
      std::copy_n(t.data().begin() + static_cast<std::ptrdiff_t>(o * chunk), chunk,
                  y.data().begin() + static_cast<std::ptrdiff_t>(o * vo.len * vo.inner + offset));
    }
    offset += chunk;
  }
  return y;
}

Tensor concat(std::initializer_list<Tensor> xs, std::size_t axis) {
  return concat(std::span<const Tensor>(xs.begin(), xs.size()), axis);
}

Tensor add(const Tensor& a, const Tensor& b) {
  return broadcast_binary(a, b, [](float p, float q) { return p + q; }, "add");
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return broadcast_binary(a, b, [](float p, float q) { return p * q; }, "mul");
}

Tensor maximum(const Tensor& a, const Tensor& b) {
  return broadcast_binary(a, b, [](float p, float q) { return std::max(p, q); }, "maximum");
}

Tensor scale(const Tensor& a, float s) {
  Tensor y(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i] * s;
  return y;
}

Tensor random_uniform(Shape shape, float lo, float hi, std::uint64_t seed) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double u = unit_interval(counter_hash(seed, 0x5A17, i));
    t[i] = static_cast<float>(lo + (static_cast<double>(hi) - lo) * u);
  }
  return t;
}

Tensor random_binary(Shape shape, double p_one, std::uint64_t seed) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = unit_interval(counter_hash(seed, 0xB17, i)) < p_one ? 1.0f : 0.0f;
  }
  return t;
}

}  // namespace evcam
