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

#include "tdigest/scale.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tdigest {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double half_pi = 0.5 * std::numbers::pi;

void check_count(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("sample count must be >= 1");
}

}  // namespace

const char* to_string(scale_kind kind) {
  switch (kind) {
    case scale_kind::k0: return "k0";
    case scale_kind::k1: return "k1";
    case scale_kind::k2: return "k2";
    case scale_kind::k3: return "k3";
  }
  throw std::invalid_argument("unknown scale kind");
}

void scale_spec::validate() const {
  if (kind != scale_kind::k0 && kind != scale_kind::k1 &&
      kind != scale_kind::k2 && kind != scale_kind::k3) {
    throw std::invalid_argument("unknown scale kind");
  }
  if (!std::isfinite(delta) || !(delta > 0.0)) {
    throw std::invalid_argument("delta must be a positive finite real");
  }
  if (!std::isfinite(normalizer_floor) || !(normalizer_floor >= 1.0)) {
    throw std::invalid_argument("normalizer_floor must be >= 1");
  }
}

double normalizer(const scale_spec& spec, std::uint64_t n) {
  spec.validate();
  check_count(n);
  const double grown = 4.0 * std::log(static_cast<double>(n) / spec.delta) + 24.0;
  return std::max(spec.normalizer_floor, grown);
}

double k_value(const scale_spec& spec, double q, std::uint64_t n) {
  spec.validate();
  check_count(n);
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::domain_error("q must lie in [0, 1]");
  }
  switch (spec.kind) {
    case scale_kind::k0:
      return 0.5 * spec.delta * q;
    case scale_kind::k1:
      return spec.delta * std::asin(2.0 * q - 1.0) / two_pi;
    case scale_kind::k2: {
      if (q == 0.0 || q == 1.0) {
        throw std::domain_error("k2 diverges at q = 0 and q = 1");
      }
      return spec.delta / normalizer(spec, n) * std::log(q / (1.0 - q));
    }
    case scale_kind::k3: {
      const double scale = spec.delta / normalizer(spec, n);
      if (q <= 0.5) return scale * std::log(2.0 * q);
      return -scale * std::log(2.0 * (1.0 - q));
    }
  }
  throw std::invalid_argument("unknown scale kind");
}

double k_inverse(const scale_spec& spec, double k, std::uint64_t n) {
  spec.validate();
  check_count(n);
  if (std::isnan(k)) throw std::out_of_range("k must not be NaN");
  switch (spec.kind) {
    case scale_kind::k0: {
      const double hi = 0.5 * spec.delta;  // image is [0, delta/2]
      const double slack = 1e-9 * std::max(1.0, hi);
      if (k < -slack || k > hi + slack) {
        throw std::out_of_range("k outside the image of k0");
      }
      return std::clamp(k / hi, 0.0, 1.0);
    }
    case scale_kind::k1: {
      const double hi = 0.25 * spec.delta;  // image is [-delta/4, delta/4]
      const double slack = 1e-9 * std::max(1.0, hi);
      if (k < -hi - slack || k > hi + slack) {
        throw std::out_of_range("k outside the image of k1");
      }
      const double t = std::clamp(two_pi * k / spec.delta, -half_pi, half_pi);
      return std::clamp(0.5 * (std::sin(t) + 1.0), 0.0, 1.0);
    }
    case scale_kind::k2: {
      // logit inverse; the image is all of R
      const double x = k * normalizer(spec, n) / spec.delta;
      return std::clamp(1.0 / (1.0 + std::exp(-x)), 0.0, 1.0);
    }
    case scale_kind::k3: {
      const double x = k * normalizer(spec, n) / spec.delta;
      if (k <= 0.0) return std::clamp(0.5 * std::exp(x), 0.0, 1.0);
      return std::clamp(1.0 - 0.5 * std::exp(-x), 0.0, 1.0);
    }
  }
  throw std::invalid_argument("unknown scale kind");
}

double k_size(const scale_spec& spec, double q1, double q2, std::uint64_t n) {
  if (!(q1 >= 0.0 && q1 <= q2 && q2 <= 1.0)) {
    throw std::domain_error("require 0 <= q1 <= q2 <= 1");
  }
  return k_value(spec, q2, n) - k_value(spec, q1, n);
}

}  // namespace tdigest
