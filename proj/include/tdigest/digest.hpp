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

#ifndef TDIGEST_DIGEST_HPP_
#define TDIGEST_DIGEST_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tdigest/scale.hpp"

namespace tdigest {

/// One cluster of samples, summarized by its arithmetic mean and the number
/// of samples it absorbed. Weights are integral counts stored as doubles.
struct centroid {
  double mean{0.0};
  double weight{0.0};
};

/// The quantile interval a centroid covers: q1 is the fraction of the total
/// weight strictly to its left, q2 = q1 + weight/n.
struct centroid_span {
  double q1{0.0};
  double q2{0.0};
  double weight{0.0};
};

/*
 * Streaming quantile sketch. Samples accumulate in a flat buffer; when the
 * buffer fills, the buffered samples are sorted, interleaved with the
 * existing centroids, and a single greedy pass merges consecutive clusters
 * whenever the combined cluster still spans at most one unit of k-index.
 * The pass direction alternates between compactions to avoid a systematic
 * bias toward one end.
 *
 * A digest is single-writer: insert/compact/merge must be externally
 * serialized. Once compacted, a digest used only through the const surface
 * is safe to share between reader threads.
 */
class digest {
 public:
  digest(scale_spec spec, std::size_t buffer_capacity);
  explicit digest(scale_spec spec);

  /// Default ingestion buffer: 10 * ceil(delta) samples.
  static std::size_t default_buffer_capacity(double delta);

  /// Buffers one sample, compacting when the buffer reaches capacity.
  /// Throws std::invalid_argument for NaN or infinite values.
  void insert(double value);

  /// Folds buffered samples into the centroid list. No-op when nothing is
  /// buffered.
  void compact();

  /// Value below which a fraction q of the inserted samples lies.
  /// quantile(0) and quantile(1) return the exact stream minimum and
  /// maximum. Compacts first if samples are buffered. Throws
  /// std::runtime_error on an empty digest, std::domain_error for q
  /// outside [0, 1].
  double quantile(double q);

  /// Read-only variant for compacted digests; safe for concurrent
  /// readers. Throws std::logic_error when samples are still buffered.
  double quantile(double q) const;

  /// Fraction of inserted samples at or below x; 0 below the stream
  /// minimum, 1 above the maximum, non-decreasing in between. Compacts
  /// first if samples are buffered. Throws std::runtime_error on an empty
  /// digest.
  double cdf(double x);

  /// Read-only variant for compacted digests; safe for concurrent
  /// readers. Throws std::logic_error when samples are still buffered.
  double cdf(double x) const;

  /// Quantile interval of every centroid, in order. The spans partition
  /// [0, 1]. Requires a compacted digest (throws std::logic_error
  /// otherwise).
  std::vector<centroid_span> centroid_spans() const;

  const std::vector<centroid>& centroids() const { return centroids_; }
  const scale_spec& spec() const { return spec_; }

  /// Number of samples inserted so far, buffered or not.
  std::uint64_t total_weight() const { return total_weight_; }

  bool empty() const { return total_weight_ == 0; }
  bool compacted() const { return buffer_.empty(); }
  std::size_t buffered() const { return buffer_.size(); }
  std::size_t buffer_capacity() const { return buffer_capacity_; }

  /// Smallest / largest sample seen; +inf / -inf on an empty digest.
  double min_value() const { return min_; }
  double max_value() const { return max_; }

  /// Rebuilds a digest from raw parts, validating the structural
  /// invariants (sorted means, finite values, integral weights >= 1,
  /// min/max bracketing the means). Throws std::invalid_argument on any
  /// violation. The k-size constraint is not checked here; that is the
  /// auditor's job.
  static digest from_parts(scale_spec spec, std::vector<centroid> centroids,
                           double min, double max,
                           std::size_t buffer_capacity);

 private:
  double quantile_compacted(double q) const;
  double cdf_compacted(double x) const;

  scale_spec spec_;
  std::size_t buffer_capacity_;
  std::vector<centroid> centroids_;
  std::vector<double> buffer_;
  std::uint64_t total_weight_{0};
  double min_;
  double max_;
  bool reverse_pass_{false};

  friend digest merge_digests(const digest& a, const digest& b);
};

/// Combines two digests built with the same scale_spec into one that
/// summarizes the union of their inputs: both inputs are compacted, their
/// centroid lists interleaved by mean, and one compaction pass runs against
/// the combined total weight. Throws std::invalid_argument when the specs
/// differ.
digest merge_digests(const digest& a, const digest& b);

}  // namespace tdigest

#endif  // TDIGEST_DIGEST_HPP_
