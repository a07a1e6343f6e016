#include <doctest.h>

#include <set>
#include <string>
#include <thread>
#include <vector>

#include "evcam/hash.hpp"
#include "evcam/parallel.hpp"

using namespace evcam;

TEST_SUITE("hash") {

TEST_CASE("splitmix reference values") {
  // First outputs of the reference SplitMix64 generator seeded with 0.
  CHECK(mix64(0) == 0xE220A8397B1DCDAFULL);
  CHECK(mix64(0x9E3779B97F4A7C15ULL) == 0x6E789E6AA1B965F4ULL);
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64(std::string_view("")) == 0xCBF29CE484222325ULL);
  CHECK(fnv1a64(std::string_view("a")) == 0xAF63DC4C8601EC8CULL);
  CHECK(fnv1a64(std::string_view("foobar")) == 0x85944171F73967E8ULL);
}

TEST_CASE("unit_interval stays in [0, 1)") {
  CHECK(unit_interval(0) == 0.0);
  CHECK(unit_interval(~0ULL) < 1.0);
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const double u = unit_interval(counter_hash(7, i, i * 3));
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("counter_hash is sensitive to every key") {
  const auto base = counter_hash(1, 2, 3);
  CHECK(counter_hash(2, 2, 3) != base);
  CHECK(counter_hash(1, 3, 3) != base);
  CHECK(counter_hash(1, 2, 4) != base);
  CHECK(counter_hash(1, 3, 2) != counter_hash(1, 2, 3));
}

TEST_CASE("parallel_for covers every index once for any worker count") {
  for (unsigned workers : {1u, 2u, 3u, 8u, 64u}) {
    std::vector<int> hits(101, 0);
    parallel_for(hits.size(), workers, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) hits[i] += 1;
    });
    for (int h : hits) CHECK(h == 1);
  }
}

TEST_CASE("parallel_tasks rethrows the worker exception") {
  CHECK_THROWS_AS(parallel_tasks(16, 4,
                                 [](std::size_t i) {
                                   if (i == 5) throw std::runtime_error("boom");
                                 }),
                  std::runtime_error);
  std::vector<int> hits(50, 0);
  parallel_tasks(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
}

TEST_CASE("resolve_workers maps 0 to the hardware") {
  CHECK(resolve_workers(3) == 3);
  CHECK(resolve_workers(0) >= 1);
}

}
