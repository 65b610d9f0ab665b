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

#ifndef TDIGEST_SCALE_HPP_
#define TDIGEST_SCALE_HPP_

#include <cstdint>

namespace tdigest {

/*
 * The scale function maps a quantile q in [0, 1] to an index k. A digest
 * keeps every multi-sample centroid small enough that the k-interval it
 * spans has length at most 1, so a steeper scale function near the tails
 * buys more resolution there at the cost of wider centroids in the middle.
 *
 *   k0: delta/2 * q                                  uniform resolution
 *   k1: delta/(2*pi) * asin(2q - 1)                  mild tail emphasis
 *   k2: delta/Z(n) * log(q / (1-q))                  strong tail emphasis
 *   k3: delta/Z(n) * +-log(2*min(q, 1-q))            strongest tail emphasis
 *
 * k2 and k3 grow without bound as q approaches 0 or 1, which is what forces
 * the first and last centroids of such digests down to unit weight.
 */
enum class scale_kind : std::uint8_t { k0 = 0, k1 = 1, k2 = 2, k3 = 3 };

const char* to_string(scale_kind kind);

/// Scale function selector plus its parameters: the compression factor delta
/// (larger delta keeps more centroids and gives tighter estimates) and the
/// lower clamp applied to the count normalizer Z(n) used by k2 and k3.
struct scale_spec {
  scale_kind kind{scale_kind::k1};
  double delta{100.0};
  double normalizer_floor{1.0};

  /// Throws std::invalid_argument unless delta > 0 and normalizer_floor >= 1.
  void validate() const;

  friend bool operator==(const scale_spec&, const scale_spec&) = default;
};

/// Count normalizer for k2 and k3: Z(n) = max(floor, 4*log(n/delta) + 24).
/// Non-decreasing in n, which is all the size-constraint argument needs.
double normalizer(const scale_spec& spec, std::uint64_t n);

/// Evaluates the selected scale function at quantile q with n samples seen.
/// Strictly increasing in q. Throws std::domain_error when q is outside
/// [0, 1], and for k2 at exactly q = 0 or q = 1 where the function diverges.
/// k3 returns -inf/+inf at the exact endpoints.
double k_value(const scale_spec& spec, double q, std::uint64_t n);

/// Closed-form inverse of k_value: the q with k_value(spec, q, n) == k,
/// clamped to [0, 1]. Throws std::out_of_range when k is outside the image
/// of the selected function (only possible for k0 and k1, whose images are
/// bounded).
double k_inverse(const scale_spec& spec, double k, std::uint64_t n);

/// k_value(q2) - k_value(q1) for 0 <= q1 <= q2 <= 1: the amount of k-index
/// a centroid spanning [q1, q2] occupies. Non-negative. Propagates k_value
/// domain errors.
double k_size(const scale_spec& spec, double q1, double q2, std::uint64_t n);

}  // namespace tdigest

#endif  // TDIGEST_SCALE_HPP_
