#include "evcam/weights_io.hpp"

#include <fstream>
#include <iterator>
#include <limits>

#include "byte_io.hpp"
#include "evcam/error.hpp"

namespace evcam {

namespace detail {

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path);
  return data;
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace detail

std::vector<std::uint8_t> encode_weights(const TensorMap& tensors) {
  detail::ByteWriter w;
  w.bytes("WGTS");
  w.u8(kWeightsVersion);
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    if (name.size() > std::numeric_limits<std::uint16_t>::max()) throw InvalidInput("tensor name too long");
    if (t.rank() > std::numeric_limits<std::uint8_t>::max()) throw InvalidInput("tensor rank too large");
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.bytes(name);
    w.u8(static_cast<std::uint8_t>(t.rank()));
    for (std::size_t d : t.shape()) w.u32(static_cast<std::uint32_t>(d));
    for (float v : t.data()) w.f32(v);
  }
  return w.take();
}

TensorMap decode_weights(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "weights file");
  if (r.bytes(4) != "WGTS") throw FormatError("weights file: bad magic");
  const std::uint8_t version = r.u8();
  if (version != kWeightsVersion) throw FormatError("weights file: unsupported version " + std::to_string(version));
  const std::uint32_t count = r.u32();
  TensorMap out;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t len = r.u16();
    std::string name = r.bytes(len);
    const std::uint8_t rank = r.u8();
    Shape shape(rank);
    std::size_t volume = 1;
    for (auto& d : shape) {
      d = r.u32();
      if (d != 0 && volume > r.remaining() / d) throw FormatError("weights file: tensor '" + name + "' truncated");
      volume *= d;
    }
    r.need(volume * 4);
    std::vector<float> data(volume);
    for (auto& v : data) v = r.f32();
    if (!out.emplace(name, Tensor(std::move(shape), std::move(data))).second) {
      throw FormatError("weights file: duplicate tensor '" + name + "'");
    }
  }
  if (r.remaining() != 0) throw FormatError("weights file: trailing bytes");
  return out;
}

void save_weights(const std::string& path, const TensorMap& tensors) {
  detail::write_file_bytes(path, encode_weights(tensors));
}

TensorMap load_weights(const std::string& path) { return decode_weights(detail::read_file_bytes(path)); }

}  // namespace evcam
