/*
 * Licensed to the Apache Software Foundation (ASF) under one
 * or more contributor license agreements.  See the NOTICE file
 * distributed with this work for additional information
 * regarding copyright ownership.  The ASF licenses this file
 * to you under the Apache License, Version 2.0 (the
 * "License"); you may not use this file except in compliance
 * with the License.  You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing,
 * software distributed under the License is distributed on an
 * "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
 * KIND, either express or implied.  See the License for the
 * specific language governing permissions and limitations
 * under the License.
 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <random>
#include <vector>

#include "tdigest/digest.hpp"
#include "tdigest/serde.hpp"

using namespace tdigest;

namespace {

scale_spec spec_of(scale_kind kind, double delta) {
  return scale_spec{kind, delta, 1.0};
}

digest sample_digest(scale_kind kind, double delta, std::size_t count,
                     std::uint64_t seed) {
  digest d(spec_of(kind, delta));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 3.0);
  for (std::size_t i = 0; i < count; ++i) d.insert(g(rng));
  d.compact();
  return d;
}

bool same_centroids(const digest& a, const digest& b) {
  if (a.centroids().size() != b.centroids().size()) return false;
  for (std::size_t i = 0; i < a.centroids().size(); ++i) {
    if (std::memcmp(&a.centroids()[i].mean, &b.centroids()[i].mean, 8) != 0 ||
        std::memcmp(&a.centroids()[i].weight, &b.centroids()[i].weight, 8) != 0) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("empty digest serializes to a bare 42-byte header") {
  digest d(spec_of(scale_kind::k1, 100.0));
  const auto bytes = serialize(d);
  CHECK(bytes.size() == 42);
  CHECK(bytes[0] == 'T');
  CHECK(bytes[1] == 'D');
  CHECK(bytes[2] == 'I');
  CHECK(bytes[3] == 'G');
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 1);  // k1
  const digest back = deserialize(bytes);
  CHECK(back.empty());
  CHECK(back.spec() == d.spec());
}

TEST_CASE("serialization round trips bit-exactly") {
  const digest d = sample_digest(scale_kind::k2, 150.0, 20000, 3);
  const auto bytes = serialize(d);
  CHECK(bytes.size() == 42 + 16 * d.centroids().size());
  digest back = deserialize(bytes);
  CHECK(same_centroids(d, back));
  CHECK(back.total_weight() == d.total_weight());
  CHECK(back.min_value() == d.min_value());
  CHECK(back.max_value() == d.max_value());
  CHECK(serialize(back) == bytes);

  digest original = d;
  for (int i = 0; i < 99; ++i) {
    const double q = (i + 1) / 100.0;
    CHECK(back.quantile(q) == original.quantile(q));
  }
}

TEST_CASE("serializing a buffered digest is refused") {
  digest d(spec_of(scale_kind::k0, 50.0), 100);
  d.insert(1.0);
  CHECK_THROWS_AS(serialize(d), std::logic_error);
  d.compact();
  CHECK_NOTHROW(serialize(d));
}

TEST_CASE("deserialize reports each corruption distinctly") {
  const digest d = sample_digest(scale_kind::k1, 50.0, 500, 5);
  const auto good = serialize(d);

  auto bytes = good;
  bytes[0] = 'X';
  CHECK_THROWS_AS(deserialize(bytes), bad_magic_error);

  bytes = good;
  bytes[4] = 2;
  CHECK_THROWS_AS(deserialize(bytes), bad_version_error);

  bytes = good;
  bytes[5] = 9;
  CHECK_THROWS_AS(deserialize(bytes), bad_field_error);

  bytes = good;
  bytes.pop_back();
  CHECK_THROWS_AS(deserialize(bytes), truncated_error);

  bytes = good;
  bytes.resize(10);
  CHECK_THROWS_AS(deserialize(bytes), truncated_error);

  // zero out the first centroid's weight
  bytes = good;
  for (int i = 0; i < 8; ++i) bytes[42 + 8 + i] = 0;
  CHECK_THROWS_AS(deserialize(bytes), bad_weight_error);

  // swap the first two centroids to break the sort order
  bytes = good;
  REQUIRE(d.centroids().size() >= 2);
  REQUIRE(d.centroids()[0].mean < d.centroids()[1].mean);
  for (int i = 0; i < 16; ++i) std::swap(bytes[42 + i], bytes[42 + 16 + i]);
  CHECK_THROWS_AS(deserialize(bytes), unsorted_payload_error);

  // inflate the recorded total weight
  bytes = good;
  bytes[14] ^= 0xff;
  CHECK_THROWS_AS(deserialize(bytes), weight_sum_error);

  // all of these are serde_error too
  bytes = good;
  bytes[0] = 'X';
  CHECK_THROWS_AS(deserialize(bytes), serde_error);
}

TEST_CASE("mutated files are rejected or still valid, never silently broken") {
  std::mt19937_64 rng(7);
  const digest d = sample_digest(scale_kind::k3, 80.0, 2000, 11);
  const auto good = serialize(d);
  std::uniform_int_distribution<std::size_t> pos(0, good.size() - 1);
  std::uniform_int_distribution<int> byte(0, 255);
  int rejected = 0;
  int accepted = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto bytes = good;
    const std::size_t at = pos(rng);
    std::uint8_t repl = static_cast<std::uint8_t>(byte(rng));
    while (repl == bytes[at]) repl = static_cast<std::uint8_t>(byte(rng));
    bytes[at] = repl;
    try {
      digest back = deserialize(bytes);
      ++accepted;
      // whatever loaded must re-validate from its own parts
      CHECK_NOTHROW(digest::from_parts(back.spec(), back.centroids(),
                                       back.min_value(), back.max_value(),
                                       back.buffer_capacity()));
    } catch (const serde_error&) {
      ++rejected;
    }
  }
  CHECK(rejected + accepted == 200);
  CHECK(rejected > 0);  // the header is easy to break
}

TEST_CASE("file round trip") {
  const digest d = sample_digest(scale_kind::k0, 40.0, 3000, 13);
  const auto path = std::filesystem::temp_directory_path() / "tdigest_serde_test.td";
  write_digest_file(path, d);
  const digest back = read_digest_file(path);
  CHECK(same_centroids(d, back));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_digest_file(path), std::runtime_error);
}

TEST_CASE("json mirror carries the wire fields") {
  const digest d = sample_digest(scale_kind::k2, 60.0, 1000, 17);
  const auto j = to_json(d);
  CHECK(j["magic"] == "TDIG");
  CHECK(j["version"] == 1);
  CHECK(j["scale_kind"] == 2);
  CHECK(j["delta"] == 60.0);
  CHECK(j["total_weight"] == 1000);
  CHECK(j["centroid_count"] == d.centroids().size());
  CHECK(j["centroids"].size() == d.centroids().size());
  CHECK(j["centroids"][0]["weight"] == d.centroids()[0].weight);
}
