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

#ifndef TDIGEST_SERDE_HPP_
#define TDIGEST_SERDE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "tdigest/digest.hpp"

namespace tdigest {

/*
 * Fixed little-endian wire format, byte for byte:
 *
 *   offset  size  field
 *   0       4     magic "TDIG"
 *   4       1     format version, currently 1
 *   5       1     scale kind, 0..3
 *   6       8     delta, IEEE-754 double
 *   14      8     total weight, unsigned
 *   22      8     min, IEEE-754 double (+inf when empty)
 *   30      8     max, IEEE-754 double (-inf when empty)
 *   38      4     centroid count, unsigned
 *   42      16*c  centroids, (mean double, weight double) sorted by mean
 *
 * The normalizer floor is not carried; deserialized digests use the
 * default of 1. Loading validates every structural invariant and throws a
 * distinct error per failure mode; the k-size constraint itself is checked
 * by the auditor, not here, so that damaged digests can still be loaded
 * and reported on.
 */

class serde_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Magic bytes are not "TDIG".
class bad_magic_error final : public serde_error {
 public:
  using serde_error::serde_error;
};

/// Version byte is not a supported format version.
class bad_version_error final : public serde_error {
 public:
  using serde_error::serde_error;
};

/// Byte length disagrees with the header or the centroid count.
class truncated_error final : public serde_error {
 public:
  using serde_error::serde_error;
};

/// A header field or centroid mean holds an invalid value.
class bad_field_error final : public serde_error {
 public:
  using serde_error::serde_error;
};

/// A centroid weight is not an integral count >= 1.
class bad_weight_error final : public serde_error {
 public:
  using serde_error::serde_error;
};

/// Centroid means are not sorted.
class unsorted_payload_error final : public serde_error {
 public:
  using serde_error::serde_error;
};

/// Centroid weights do not add up to the recorded total weight.
class weight_sum_error final : public serde_error {
 public:
  using serde_error::serde_error;
};

inline constexpr std::size_t serialized_header_size = 42;
inline constexpr std::uint8_t serialized_format_version = 1;

/// Encodes a compacted digest. Deterministic: equal digests produce equal
/// bytes. Throws std::logic_error when samples are still buffered.
std::vector<std::uint8_t> serialize(const digest& d);

digest deserialize(const std::uint8_t* bytes, std::size_t size);
digest deserialize(const std::vector<std::uint8_t>& bytes);

void write_digest_file(const std::filesystem::path& path, const digest& d);
digest read_digest_file(const std::filesystem::path& path);

/// JSON mirror of the wire format, for human inspection. Not guaranteed to
/// round-trip bit-exactly.
nlohmann::json to_json(const digest& d);

}  // namespace tdigest

#endif  // TDIGEST_SERDE_HPP_
