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

#include "tdigest/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace tdigest {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

}  // namespace

k_size_report audit(const digest& d) {
  if (!d.compacted()) {
    throw std::logic_error("digest has buffered samples; compact before auditing");
  }
  k_size_report report;
  const auto spans = d.centroid_spans();
  const std::uint64_t n = d.total_weight();
  report.entries.reserve(spans.size());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const centroid_span& s = spans[i];
    const bool exempt = s.weight == 1.0;
    double ks;
    if (d.spec().kind == scale_kind::k2 && (s.q1 == 0.0 || s.q2 == 1.0)) {
      ks = inf;  // k2 has no finite value at the exact ends
    } else {
      ks = k_size(d.spec(), s.q1, s.q2, n);
    }
    const bool pass = exempt || ks <= 1.0 + k_size_slack;
    report.entries.push_back({i, s.q1, s.q2, s.weight, ks, exempt, pass});
    if (!exempt) {
      report.worst_excess = std::max(report.worst_excess, ks - 1.0);
    }
    report.passed = report.passed && pass;
  }
  return report;
}

void perturbation_case::validate() const {
  if (n == 0) throw std::invalid_argument("n must be >= 1");
  if (!(n1 < n2 && n2 <= n)) {
    throw std::invalid_argument("require 0 <= n1 < n2 <= n");
  }
  if (delta_n == 0) throw std::invalid_argument("delta_n must be >= 1");
  if (kind == scale_kind::k2 && (n1 == 0 || n2 == n)) {
    throw std::invalid_argument("k2 cases must use interior centroids");
  }
}

ksize_change perturbed_ksize(const perturbation_case& c,
                             const scale_spec& spec) {
  c.validate();
  if (c.kind != spec.kind) {
    throw std::invalid_argument("case kind does not match the scale spec");
  }
  const double n0 = static_cast<double>(c.n);
  const double before = k_size(spec, static_cast<double>(c.n1) / n0,
                               static_cast<double>(c.n2) / n0, c.n);
  const std::uint64_t grown = c.n + c.delta_n;
  const double n1 = static_cast<double>(grown);
  double a1, a2;
  if (c.which == side::right) {
    a1 = static_cast<double>(c.n1) / n1;
    a2 = static_cast<double>(c.n2) / n1;
  } else {
    a1 = static_cast<double>(c.n1 + c.delta_n) / n1;
    a2 = static_cast<double>(c.n2 + c.delta_n) / n1;
  }
  const double after = k_size(spec, a1, a2, grown);
  return {before, after};
}

const char* to_string(proof_family family) {
  switch (family) {
    case proof_family::k0_right: return "k0_right";
    case proof_family::k1_right: return "k1_right";
    case proof_family::k2_right: return "k2_right";
    case proof_family::k3_first_right: return "k3_first_right";
    case proof_family::k3_first_left: return "k3_first_left";
    case proof_family::k3_straddle_right: return "k3_straddle_right";
    case proof_family::k3_straddle_left: return "k3_straddle_left";
  }
  throw std::invalid_argument("unknown proof family");
}

std::vector<proof_family> families_for(scale_kind kind) {
  switch (kind) {
    case scale_kind::k0: return {proof_family::k0_right};
    case scale_kind::k1: return {proof_family::k1_right};
    case scale_kind::k2: return {proof_family::k2_right};
    case scale_kind::k3:
      return {proof_family::k3_first_right, proof_family::k3_first_left,
              proof_family::k3_straddle_right,
              proof_family::k3_straddle_left};
  }
  throw std::invalid_argument("unknown scale kind");
}

namespace {

std::uint64_t uniform_u64(std::mt19937_64& rng, std::uint64_t lo,
                          std::uint64_t hi) {
  return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
}

std::uint64_t log_uniform(std::mt19937_64& rng, std::uint64_t lo,
                          std::uint64_t hi) {
  if (lo >= hi) return lo;
  std::uniform_real_distribution<double> u(std::log(static_cast<double>(lo)),
                                           std::log(static_cast<double>(hi)));
  const double v = std::exp(u(rng));
  const auto r = static_cast<std::uint64_t>(std::llround(v));
  return std::clamp(r, lo, hi);
}

/// Draws one valid case for the family. n is log-uniform in [10, 1e6] so
/// small and large normalizer regimes both come up; delta_n is log-uniform
/// up to n except where the family's branch restricts it.
perturbation_case draw_case(proof_family family, std::mt19937_64& rng) {
  const std::uint64_t n = log_uniform(rng, 10, 1000000);
  perturbation_case c;
  c.n = n;
  switch (family) {
    case proof_family::k0_right:
      c.kind = scale_kind::k0;
      c.which = side::right;
      c.n1 = uniform_u64(rng, 0, n - 2);
      c.n2 = uniform_u64(rng, c.n1 + 1, n);
      c.delta_n = log_uniform(rng, 1, n);
      break;
    case proof_family::k1_right:
      c.kind = scale_kind::k1;
      c.which = side::right;
      c.n1 = uniform_u64(rng, 0, n - 2);
      c.n2 = uniform_u64(rng, c.n1 + 1, n - 1);
      c.delta_n = log_uniform(rng, 1, n);
      break;
    case proof_family::k2_right:
      c.kind = scale_kind::k2;
      c.which = side::right;
      c.n1 = uniform_u64(rng, 1, n - 2);
      c.n2 = uniform_u64(rng, c.n1 + 1, n - 1);
      c.delta_n = log_uniform(rng, 1, n);
      break;
    case proof_family::k3_first_right:
      // stay on the lower branch: q2 <= 1/2
      c.kind = scale_kind::k3;
      c.which = side::right;
      c.n2 = uniform_u64(rng, 2, n / 2);
      c.n1 = uniform_u64(rng, 1, c.n2 - 1);
      c.delta_n = log_uniform(rng, 1, n);
      break;
    case proof_family::k3_first_left:
      // left addition raises both quantiles, so cap delta_n to keep the
      // centroid on the lower branch afterwards: n2 + dn <= (n + dn) / 2
      c.kind = scale_kind::k3;
      c.which = side::left;
      c.n2 = uniform_u64(rng, 2, (n - 1) / 2);
      c.n1 = uniform_u64(rng, 1, c.n2 - 1);
      c.delta_n = log_uniform(rng, 1, n - 2 * c.n2);
      break;
    case proof_family::k3_straddle_right:
    case proof_family::k3_straddle_left: {
      // n1 < n/2 < n2, both interior
      const std::uint64_t n1 = uniform_u64(rng, 1, (n - 1) / 2);
      const std::uint64_t n2 = uniform_u64(rng, n / 2 + 1, n - 1);
      const std::uint64_t dn = log_uniform(rng, 1, n);
      c.kind = scale_kind::k3;
      if (family == proof_family::k3_straddle_right) {
        c.which = side::right;
        c.n1 = n1;
        c.n2 = n2;
      } else {
        // mirror image under q -> 1 - q: right addition to [n1, n2]
        // becomes left addition to [n - n2, n - n1]
        c.which = side::left;
        c.n1 = n - n2;
        c.n2 = n - n1;
      }
      c.delta_n = dn;
      break;
    }
  }
  return c;
}

scale_kind kind_of(proof_family family) {
  switch (family) {
    case proof_family::k0_right: return scale_kind::k0;
    case proof_family::k1_right: return scale_kind::k1;
    case proof_family::k2_right: return scale_kind::k2;
    default: return scale_kind::k3;
  }
}

}  // namespace

proof_suite_report proof_property_suite(const scale_spec& spec,
                                        std::uint64_t trials,
                                        std::uint64_t seed) {
  spec.validate();
  if (trials == 0) throw std::invalid_argument("trials must be >= 1");

  proof_suite_report report;
  const auto families = families_for(spec.kind);
  std::uint64_t family_index = 0;
  for (proof_family family : families) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * ++family_index);
    family_result result;
    result.family = family;
    result.worst_excess = -inf;
    scale_spec family_spec = spec;
    family_spec.kind = kind_of(family);

    for (std::uint64_t t = 0; t < trials; ++t) {
      const perturbation_case c = draw_case(family, rng);
      const auto [before, after] = perturbed_ksize(c, family_spec);
      ++result.trials;
      const double excess = after - before;
      if (excess > result.worst_excess) {
        result.worst_excess = excess;
        result.worst_case = c;
      }
      if (after > before + shrink_tolerance) ++result.violations;
      if (c.n1 >= 1) {
        ++result.strict_trials;
        if (after < before) ++result.strict_holds;
      }
    }
    report.passed = report.passed && result.violations == 0;
    report.families.push_back(result);
  }
  return report;
}

double oracle_quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) {
    throw std::invalid_argument("oracle needs at least one sample");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::domain_error("q must lie in [0, 1]");
  }
  const std::size_t m = sorted.size();
  if (m == 1) return sorted[0];
  const double pos = q * static_cast<double>(m - 1);
  const double base = std::floor(pos);
  const std::size_t i = static_cast<std::size_t>(base);
  if (i >= m - 1) return sorted[m - 1];
  return std::lerp(sorted[i], sorted[i + 1], pos - base);
}

double oracle_quantile(std::vector<double> samples, double q) {
  std::sort(samples.begin(), samples.end());
  return oracle_quantile_sorted(samples, q);
}

double q_space_error(digest& d, double value, double q) {
  const double lo = d.cdf(std::nextafter(value, -inf));
  const double hi = d.cdf(std::nextafter(value, inf));
  if (q < lo) return lo - q;
  if (q > hi) return q - hi;
  return 0.0;
}

}  // namespace tdigest
