#include <doctest.h>

#include "evcam/error.hpp"
#include "evcam/weights_io.hpp"
#include "support/gen.hpp"
#include "support/tempdir.hpp"

using namespace evcam;

TEST_SUITE("weights") {

TEST_CASE("encode/decode round-trips arbitrary tensor maps") {
  gen::for_all(10, 21, [](gen::Gen& g, std::size_t) {
    TensorMap m;
    const std::size_t n = g.size(0, 6);
    for (std::size_t i = 0; i < n; ++i) {
      Shape shape;
      const std::size_t rank = g.size(0, 4);
      for (std::size_t r = 0; r < rank; ++r) shape.push_back(g.size(1, 4));
      m["t" + std::to_string(i) + ".weight"] = g.tensor(shape);
    }
    CHECK(decode_weights(encode_weights(m)) == m);
  });
}

TEST_CASE("layout of a single record") {
  TensorMap m;
  m["ab"] = Tensor({2}, std::vector<float>{1.0f, -2.0f});
  const auto bytes = encode_weights(m);
  // magic 4 + version 1 + count 4 + name_len 2 + name 2 + rank 1 + dims 4 + data 8
  REQUIRE(bytes.size() == 26);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "WGTS");
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 1);  // count, little-endian
  CHECK(bytes[9] == 2);  // name length
  CHECK(bytes[13] == 1);  // rank
  CHECK(bytes[14] == 2);  // dim 0
}

TEST_CASE("corrupt files are rejected") {
  TensorMap m;
  m["w"] = Tensor({3, 3}, 0.5f);
  auto bytes = encode_weights(m);

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(decode_weights(bad_magic), FormatError);

  auto bad_version = bytes;
  bad_version[4] = 9;
  CHECK_THROWS_AS(decode_weights(bad_version), FormatError);

  auto truncated = bytes;
  truncated.resize(truncated.size() - 3);
  CHECK_THROWS_AS(decode_weights(truncated), FormatError);

  auto trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(decode_weights(trailing), FormatError);

  // Same record twice with count = 2.
  std::vector<std::uint8_t> dup(bytes.begin(), bytes.begin() + 9);
  dup[5] = 2;
  dup.insert(dup.end(), bytes.begin() + 9, bytes.end());
  dup.insert(dup.end(), bytes.begin() + 9, bytes.end());
  CHECK_THROWS_AS(decode_weights(dup), FormatError);

  // A dimension claiming far more data than present.
  auto huge = bytes;
  huge[16] = 0xFF;
  huge[17] = 0xFF;
  huge[18] = 0xFF;
  CHECK_THROWS_AS(decode_weights(huge), FormatError);
}

TEST_CASE("save and load through the filesystem") {
  support::TempDir dir("weights");
  TensorMap m;
  m["a"] = Tensor({1, 2, 1, 1}, std::vector<float>{3, 4});
  save_weights((dir / "w.bin").string(), m);
  CHECK(load_weights((dir / "w.bin").string()) == m);
  CHECK_THROWS_AS(load_weights((dir / "missing.bin").string()), IoError);
}

}
