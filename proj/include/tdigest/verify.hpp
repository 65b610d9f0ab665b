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

#ifndef TDIGEST_VERIFY_HPP_
#define TDIGEST_VERIFY_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tdigest/digest.hpp"
#include "tdigest/scale.hpp"

namespace tdigest {

/// Slack allowed when re-checking the k-size constraint: absorbs float
/// noise in k evaluation without masking real violations.
inline constexpr double k_size_slack = 1e-9;

/// Tolerance for the shrink property: adding data must not grow a
/// centroid's k-size beyond this float allowance.
inline constexpr double shrink_tolerance = 1e-12;

struct k_size_entry {
  std::size_t index{0};
  double q1{0.0};
  double q2{0.0};
  double weight{0.0};
  double k_size{0.0};
  bool exempt{false};  // unit-weight centroids are not constrained
  bool pass{false};
};

/// Per-centroid audit of the size constraint. worst_excess is the largest
/// amount by which a constrained centroid overshoots k-size 1, clamped at 0.
struct k_size_report {
  std::vector<k_size_entry> entries;
  double worst_excess{0.0};
  bool passed{true};
};

/// Checks every centroid of a compacted digest against the size
/// constraint: unit weight, or k-size <= 1 + k_size_slack. For k2 a
/// multi-sample centroid touching q = 0 or q = 1 is recorded with infinite
/// k-size. Throws std::logic_error when samples are still buffered.
k_size_report audit(const digest& d);

enum class side : std::uint8_t { left, right };

/*
 * One what-if experiment on a centroid: with n samples total, n1 of them
 * strictly left of the centroid and n2 - n1 inside it, add delta_n new
 * samples entirely on one side and watch the centroid's k-size. The shrink
 * property says the k-size never grows.
 */
struct perturbation_case {
  scale_kind kind{scale_kind::k0};
  std::uint64_t n{0};
  std::uint64_t n1{0};
  std::uint64_t n2{0};
  std::uint64_t delta_n{0};
  side which{side::right};

  /// Throws std::invalid_argument unless 0 <= n1 < n2 <= n, delta_n >= 1,
  /// and, for k2, the centroid is interior (n1 >= 1 and n2 <= n - 1).
  void validate() const;
};

struct ksize_change {
  double before{0.0};
  double after{0.0};
};

/// k-size of the centroid before and after the perturbation. Right: both
/// quantiles become n_i / (n + delta_n); left: (n_i + delta_n) /
/// (n + delta_n). The normalizer is evaluated at the matching count.
ksize_change perturbed_ksize(const perturbation_case& c,
                             const scale_spec& spec);

/*
 * Randomized case families, one per side/branch that the shrink property
 * distinguishes. k0/k1 are symmetric, so right-side addition covers both.
 * k3's piecewise definition needs its first branch exercised from both
 * sides plus the straddling centroid; the straddle-left family is the
 * mirror image of straddle-right under q -> 1 - q.
 */
enum class proof_family : std::uint8_t {
  k0_right,
  k1_right,
  k2_right,
  k3_first_right,
  k3_first_left,
  k3_straddle_right,
  k3_straddle_left,
};

const char* to_string(proof_family family);
std::vector<proof_family> families_for(scale_kind kind);

struct family_result {
  proof_family family{proof_family::k0_right};
  std::uint64_t trials{0};
  /// Cases with after > before + shrink_tolerance. Any violation fails.
  std::uint64_t violations{0};
  /// Largest after - before seen (negative when every case shrank).
  double worst_excess{0.0};
  /// Subset of trials with n1 >= 1, where strict shrinking is expected.
  std::uint64_t strict_trials{0};
  /// How many of those had after strictly below before.
  std::uint64_t strict_holds{0};
  std::optional<perturbation_case> worst_case;
};

struct proof_suite_report {
  std::vector<family_result> families;
  bool passed{true};
};

/// Runs `trials` random perturbation cases for every family that applies
/// to spec.kind and reports violations of after <= before +
/// shrink_tolerance. Deterministic for a fixed seed.
proof_suite_report proof_property_suite(const scale_spec& spec,
                                        std::uint64_t trials,
                                        std::uint64_t seed);

/// Exact empirical quantile of the samples: linear interpolation between
/// order statistics at position q * (m - 1). Ground truth for accuracy
/// measurements. Throws std::invalid_argument on empty input.
double oracle_quantile(std::vector<double> samples, double q);

/// Distance in quantile space between q and where the digest places
/// `value`. A value inside a point mass covers a whole rank interval, so
/// the distance is to that interval (zero when q falls within it); for
/// continuous data this reduces to |cdf(value) - q|.
double q_space_error(digest& d, double value, double q);

/// Same, for samples already sorted ascending.
double oracle_quantile_sorted(std::span<const double> sorted, double q);

}  // namespace tdigest

#endif  // TDIGEST_VERIFY_HPP_
