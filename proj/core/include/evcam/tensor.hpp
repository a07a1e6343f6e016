#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace evcam {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_volume(const Shape& shape);

/// Dense row-major float32 array of arbitrary rank.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  /// Throws InvalidInput when data.size() != product(shape).
  Tensor(Shape shape, std::vector<float> data);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }
  const std::vector<float>& values() const noexcept { return data_; }

  float& operator[](std::size_t i) noexcept { return data_[i]; }
  float operator[](std::size_t i) const noexcept { return data_[i]; }

  /// Multi-index access; index count must equal rank().
  float& at(std::initializer_list<std::size_t> index);
  float at(std::initializer_list<std::size_t> index) const;

  /// Same data, new shape of equal volume.
  Tensor reshaped(Shape shape) const;

  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t offset(std::initializer_list<std::size_t> index) const;

  Shape shape_;
  std::vector<float> data_;
};

/// Convolution parameters: kernel (out_ch, in_ch, k, k), bias (out_ch).
struct ConvSpec {
  Tensor kernel;
  Tensor bias;
  std::size_t padding = 0;
  std::size_t stride = 1;

  std::size_t out_channels() const { return kernel.dim(0); }
  std::size_t in_channels() const { return kernel.dim(1); }
  std::size_t kernel_size() const { return kernel.dim(2); }

  /// Checks kernel/bias ranks, odd square kernel, stride >= 1.
  void validate() const;
};

/// Seeded uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)] for kernel and
/// bias; padding defaults to "same" (k / 2).
ConvSpec make_conv(std::size_t out_ch, std::size_t in_ch, std::size_t k, std::uint64_t seed);

/// Inference-time batch normalization parameters, one entry per channel.
struct BatchNormSpec {
  std::vector<float> gamma;
  std::vector<float> beta;
  std::vector<float> running_mean;
  std::vector<float> running_var;
  float epsilon = 1e-5f;

  std::size_t channels() const noexcept { return gamma.size(); }
  void validate() const;
};

/// gamma = 1, beta = 0, mean = 0, var = 1.
BatchNormSpec make_batchnorm(std::size_t channels, float epsilon = 1e-5f);

/// Cross-correlation with zero padding over a (C_in, H, W) input.
Tensor conv2d(const Tensor& x, const ConvSpec& spec);

/// y = gamma * (x - mean) / sqrt(var + eps) + beta per channel of (C, H, W).
Tensor batchnorm_infer(const Tensor& x, const BatchNormSpec& spec);

Tensor sigmoid(const Tensor& x);

/// Softmax along `axis`; every 1-D slice along it sums to one.
Tensor softmax(const Tensor& x, std::size_t axis);

enum class ReduceMode { max, avg };

/// Removes `axis` by taking the max or arithmetic mean along it.
Tensor reduce(const Tensor& x, std::size_t axis, ReduceMode mode);

Tensor concat(std::span<const Tensor> xs, std::size_t axis);
Tensor concat(std::initializer_list<Tensor> xs, std::size_t axis);

// Elementwise algebra. Operands of equal rank broadcast where a dimension is 1.
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor maximum(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, float s);

/// Counter-hash fills: entry i depends only on (seed, i).
Tensor random_uniform(Shape shape, float lo, float hi, std::uint64_t seed);
Tensor random_binary(Shape shape, double p_one, std::uint64_t seed);

}  // namespace evcam
