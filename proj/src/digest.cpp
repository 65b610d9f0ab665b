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

#include "tdigest/digest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tdigest {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

/// True when a cluster covering the weight interval [lo, hi) of n samples
/// may hold more than one sample. k2 has no finite k at the extreme ends,
/// so a multi-sample cluster touching them can never fit.
bool cluster_fits(const scale_spec& spec, std::uint64_t lo, std::uint64_t hi,
                  std::uint64_t n) {
  if (spec.kind == scale_kind::k2 && (lo == 0 || hi == n)) return false;
  const double nd = static_cast<double>(n);
  const double q1 = static_cast<double>(lo) / nd;
  const double q2 = static_cast<double>(hi) / nd;
  return k_size(spec, q1, q2, n) <= 1.0;
}

/// One greedy merge pass over centroids sorted by mean. Consecutive
/// clusters are combined while the combination still fits; weight
/// accounting is integral so quantile boundaries are exact. `reverse`
/// runs the pass from the top end instead.
std::vector<centroid> merge_pass(const scale_spec& spec,
                                 std::vector<centroid>& sorted,
                                 std::uint64_t n, bool reverse) {
  if (sorted.empty()) return {};
  if (reverse) std::reverse(sorted.begin(), sorted.end());

  std::vector<centroid> out;
  out.reserve(sorted.size());

  std::uint64_t settled = 0;  // weight already flushed on the pass side
  double mean = sorted.front().mean;
  std::uint64_t weight = static_cast<std::uint64_t>(sorted.front().weight);
  double mean_lo = mean;
  double mean_hi = mean;

  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const centroid& next = sorted[i];
    const std::uint64_t next_weight = static_cast<std::uint64_t>(next.weight);
    const std::uint64_t candidate = weight + next_weight;
    const std::uint64_t lo = reverse ? n - settled - candidate : settled;
    if (cluster_fits(spec, lo, lo + candidate, n)) {
      mean += static_cast<double>(next_weight) * (next.mean - mean) /
              static_cast<double>(candidate);
      weight = candidate;
      mean_lo = std::min(mean_lo, next.mean);
      mean_hi = std::max(mean_hi, next.mean);
    } else {
      out.push_back({std::clamp(mean, mean_lo, mean_hi),
                     static_cast<double>(weight)});
      settled += weight;
      mean = next.mean;
      weight = next_weight;
      mean_lo = mean_hi = next.mean;
    }
  }
  out.push_back({std::clamp(mean, mean_lo, mean_hi),
                 static_cast<double>(weight)});

  if (reverse) std::reverse(out.begin(), out.end());
  return out;
}

void sort_by_mean(std::vector<centroid>& cs) {
  std::stable_sort(cs.begin(), cs.end(),
                   [](const centroid& a, const centroid& b) {
                     return a.mean < b.mean;
                   });
}

bool is_integral_weight(double w) {
  return std::isfinite(w) && w >= 1.0 && std::floor(w) == w &&
         w < 18446744073709551616.0;  // fits std::uint64_t
}

}  // namespace

digest::digest(scale_spec spec, std::size_t buffer_capacity)
    : spec_(spec),
      buffer_capacity_(buffer_capacity),
      min_(inf),
      max_(-inf) {
  spec_.validate();
  if (buffer_capacity_ == 0) {
    throw std::invalid_argument("buffer_capacity must be >= 1");
  }
  buffer_.reserve(buffer_capacity_);
}

digest::digest(scale_spec spec)
    : digest(spec, default_buffer_capacity(spec.delta)) {}

std::size_t digest::default_buffer_capacity(double delta) {
  if (!std::isfinite(delta) || !(delta > 0.0)) {
    throw std::invalid_argument("delta must be a positive finite real");
  }
  // 10 * ceil(delta), kept within a sane allocation for extreme deltas
  constexpr double cap = 10000000.0;
  const double raw = std::min(10.0 * std::ceil(delta), cap);
  return static_cast<std::size_t>(std::max(raw, 1.0));
}

void digest::insert(double value) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument("samples must be finite");
  }
  buffer_.push_back(value);
  ++total_weight_;
  min_ = std::min(min_, value);
  max_ = std::max(max_, value);
  if (buffer_.size() >= buffer_capacity_) compact();
}

void digest::compact() {
  if (buffer_.empty()) return;
  std::vector<centroid> combined;
  combined.reserve(centroids_.size() + buffer_.size());
  combined.insert(combined.end(), centroids_.begin(), centroids_.end());
  for (double x : buffer_) combined.push_back({x, 1.0});
  buffer_.clear();
  sort_by_mean(combined);
  centroids_ = merge_pass(spec_, combined, total_weight_, reverse_pass_);
  reverse_pass_ = !reverse_pass_;
}

namespace {

/// Interpolation knots in rank space: (0, min), one knot per centroid at
/// its cumulative-weight midpoint, (n, max).
struct knots {
  std::vector<double> rank;
  std::vector<double> value;
};

knots build_knots(const std::vector<centroid>& cs, std::uint64_t n,
                  double min, double max) {
  knots k;
  k.rank.reserve(cs.size() + 2);
  k.value.reserve(cs.size() + 2);
  k.rank.push_back(0.0);
  k.value.push_back(min);
  std::uint64_t cum = 0;
  for (const centroid& c : cs) {
    k.rank.push_back(static_cast<double>(cum) + 0.5 * c.weight);
    k.value.push_back(c.mean);
    cum += static_cast<std::uint64_t>(c.weight);
  }
  k.rank.push_back(static_cast<double>(n));
  k.value.push_back(max);
  return k;
}

}  // namespace

double digest::quantile(double q) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::domain_error("q must lie in [0, 1]");
  }
  if (total_weight_ == 0) {
    throw std::runtime_error("quantile of an empty digest");
  }
  compact();
  return quantile_compacted(q);
}

double digest::quantile(double q) const {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::domain_error("q must lie in [0, 1]");
  }
  if (total_weight_ == 0) {
    throw std::runtime_error("quantile of an empty digest");
  }
  if (!buffer_.empty()) {
    throw std::logic_error("digest has buffered samples; compact() first");
  }
  return quantile_compacted(q);
}

double digest::quantile_compacted(double q) const {
  const knots k = build_knots(centroids_, total_weight_, min_, max_);
  const double r = q * static_cast<double>(total_weight_);
  if (r <= k.rank.front()) return k.value.front();
  if (r >= k.rank.back()) return k.value.back();
  // first knot strictly right of r; ranks are strictly increasing
  const auto it = std::upper_bound(k.rank.begin(), k.rank.end(), r);
  const std::size_t j = static_cast<std::size_t>(it - k.rank.begin());
  const double r0 = k.rank[j - 1];
  const double r1 = k.rank[j];
  const double t = std::clamp((r - r0) / (r1 - r0), 0.0, 1.0);
  return std::lerp(k.value[j - 1], k.value[j], t);
}

double digest::cdf(double x) {
  if (std::isnan(x)) throw std::domain_error("x must not be NaN");
  if (total_weight_ == 0) {
    throw std::runtime_error("cdf of an empty digest");
  }
  compact();
  return cdf_compacted(x);
}

double digest::cdf(double x) const {
  if (std::isnan(x)) throw std::domain_error("x must not be NaN");
  if (total_weight_ == 0) {
    throw std::runtime_error("cdf of an empty digest");
  }
  if (!buffer_.empty()) {
    throw std::logic_error("digest has buffered samples; compact() first");
  }
  return cdf_compacted(x);
}

double digest::cdf_compacted(double x) const {
  if (x < min_) return 0.0;
  if (x > max_) return 1.0;

  const knots k = build_knots(centroids_, total_weight_, min_, max_);
  const double n = static_cast<double>(total_weight_);
  // x lands on a knot value (possibly a run of equal values): report the
  // midpoint of the run's rank range so point masses behave sensibly
  const auto lo = std::lower_bound(k.value.begin(), k.value.end(), x);
  if (lo != k.value.end() && *lo == x) {
    const auto hi = std::upper_bound(lo, k.value.end(), x);
    const std::size_t a = static_cast<std::size_t>(lo - k.value.begin());
    const std::size_t b = static_cast<std::size_t>(hi - k.value.begin()) - 1;
    return std::clamp(0.5 * (k.rank[a] + k.rank[b]) / n, 0.0, 1.0);
  }
  const std::size_t j = static_cast<std::size_t>(lo - k.value.begin());
  // x < min and x > max were handled above, so 0 < j < size
  const double v0 = k.value[j - 1];
  const double v1 = k.value[j];
  const double t = std::clamp((x - v0) / (v1 - v0), 0.0, 1.0);
  return std::clamp(std::lerp(k.rank[j - 1], k.rank[j], t) / n, 0.0, 1.0);
}

std::vector<centroid_span> digest::centroid_spans() const {
  if (!buffer_.empty()) {
    throw std::logic_error("digest has buffered samples; compact() first");
  }
  std::vector<centroid_span> spans;
  spans.reserve(centroids_.size());
  const double n = static_cast<double>(total_weight_);
  std::uint64_t cum = 0;
  for (const centroid& c : centroids_) {
    const double q1 = static_cast<double>(cum) / n;
    cum += static_cast<std::uint64_t>(c.weight);
    const double q2 = static_cast<double>(cum) / n;
    spans.push_back({q1, q2, c.weight});
  }
  return spans;
}

digest digest::from_parts(scale_spec spec, std::vector<centroid> centroids,
                          double min, double max,
                          std::size_t buffer_capacity) {
  digest d(spec, buffer_capacity);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    const centroid& c = centroids[i];
    if (!std::isfinite(c.mean)) {
      throw std::invalid_argument("centroid mean must be finite");
    }
    if (!is_integral_weight(c.weight)) {
      throw std::invalid_argument("centroid weight must be an integral count >= 1");
    }
    if (i > 0 && centroids[i - 1].mean > c.mean) {
      throw std::invalid_argument("centroids must be sorted by mean");
    }
    const std::uint64_t w = static_cast<std::uint64_t>(c.weight);
    if (total > std::numeric_limits<std::uint64_t>::max() - w) {
      throw std::invalid_argument("total weight overflows");
    }
    total += w;
  }
  if (centroids.empty()) {
    if (min != inf || max != -inf) {
      throw std::invalid_argument("empty digest must carry min = +inf, max = -inf");
    }
  } else {
    if (!std::isfinite(min) || !std::isfinite(max) || min > max) {
      throw std::invalid_argument("min/max must be finite with min <= max");
    }
    if (min > centroids.front().mean || max < centroids.back().mean) {
      throw std::invalid_argument("min/max must bracket the centroid means");
    }
  }
  d.centroids_ = std::move(centroids);
  d.total_weight_ = total;
  d.min_ = min;
  d.max_ = max;
  return d;
}

digest merge_digests(const digest& a, const digest& b) {
  if (!(a.spec() == b.spec())) {
    throw std::invalid_argument("cannot merge digests with different scale specs");
  }
  digest left = a;
  digest right = b;
  left.compact();
  right.compact();

  digest out(left.spec_,
             std::max(left.buffer_capacity_, right.buffer_capacity_));
  if (left.total_weight_ >
      std::numeric_limits<std::uint64_t>::max() - right.total_weight_) {
    throw std::overflow_error("merged total weight overflows");
  }
  out.total_weight_ = left.total_weight_ + right.total_weight_;
  out.min_ = std::min(left.min_, right.min_);
  out.max_ = std::max(left.max_, right.max_);

  std::vector<centroid> combined;
  combined.reserve(left.centroids_.size() + right.centroids_.size());
  combined.insert(combined.end(), left.centroids_.begin(),
                  left.centroids_.end());
  combined.insert(combined.end(), right.centroids_.begin(),
                  right.centroids_.end());
  sort_by_mean(combined);
  out.centroids_ =
      merge_pass(out.spec_, combined, out.total_weight_, false);
  out.reverse_pass_ = true;
  return out;
}

}  // namespace tdigest
