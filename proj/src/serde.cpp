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

#include "tdigest/serde.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

namespace tdigest {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr char magic[4] = {'T', 'D', 'I', 'G'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

double get_f64(const std::uint8_t* p) {
  return std::bit_cast<double>(get_u64(p));
}

bool is_integral_count(double w) {
  return std::isfinite(w) && w >= 1.0 && std::floor(w) == w &&
         w < 18446744073709551616.0;
}

}  // namespace

std::vector<std::uint8_t> serialize(const digest& d) {
  if (!d.compacted()) {
    throw std::logic_error("digest has buffered samples; compact() before serializing");
  }
  const auto& cs = d.centroids();
  if (cs.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw std::length_error("too many centroids for the wire format");
  }
  std::vector<std::uint8_t> out;
  out.reserve(serialized_header_size + 16 * cs.size());
  out.insert(out.end(), magic, magic + 4);
  out.push_back(serialized_format_version);
  out.push_back(static_cast<std::uint8_t>(d.spec().kind));
  put_f64(out, d.spec().delta);
  put_u64(out, d.total_weight());
  put_f64(out, d.min_value());
  put_f64(out, d.max_value());
  put_u32(out, static_cast<std::uint32_t>(cs.size()));
  for (const centroid& c : cs) {
    put_f64(out, c.mean);
    put_f64(out, c.weight);
  }
  return out;
}

digest deserialize(const std::uint8_t* bytes, std::size_t size) {
  if (size < serialized_header_size) {
    throw truncated_error("file shorter than the 42-byte header");
  }
  if (std::memcmp(bytes, magic, 4) != 0) {
    throw bad_magic_error("bad magic; not a digest file");
  }
  if (bytes[4] != serialized_format_version) {
    throw bad_version_error("unsupported format version " + std::to_string(bytes[4]));
  }
  if (bytes[5] > 3) {
    throw bad_field_error("scale kind byte must be 0..3, got " + std::to_string(bytes[5]));
  }
  const scale_kind kind = static_cast<scale_kind>(bytes[5]);
  const double delta = get_f64(bytes + 6);
  if (!std::isfinite(delta) || !(delta > 0.0)) {
    throw bad_field_error("delta must be a positive finite real");
  }
  const std::uint64_t total = get_u64(bytes + 14);
  const double min = get_f64(bytes + 22);
  const double max = get_f64(bytes + 30);
  const std::uint32_t count = get_u32(bytes + 38);

  const std::size_t expected = serialized_header_size + 16ULL * count;
  if (size != expected) {
    throw truncated_error("payload length mismatch: expected " +
                          std::to_string(expected) + " bytes, got " +
                          std::to_string(size));
  }

  std::vector<centroid> cs;
  cs.reserve(count);
  std::uint64_t sum = 0;
  const std::uint8_t* p = bytes + serialized_header_size;
  for (std::uint32_t i = 0; i < count; ++i, p += 16) {
    const double mean = get_f64(p);
    const double weight = get_f64(p + 8);
    if (!std::isfinite(mean)) {
      throw bad_field_error("centroid mean must be finite");
    }
    if (!is_integral_count(weight)) {
      throw bad_weight_error("centroid weight must be an integral count >= 1");
    }
    if (!cs.empty() && cs.back().mean > mean) {
      throw unsorted_payload_error("centroid means must be sorted");
    }
    const std::uint64_t w = static_cast<std::uint64_t>(weight);
    if (sum > std::numeric_limits<std::uint64_t>::max() - w) {
      throw weight_sum_error("centroid weights overflow the total");
    }
    sum += w;
    cs.push_back({mean, weight});
  }
  if (sum != total) {
    throw weight_sum_error("centroid weights add to " + std::to_string(sum) +
                           " but the header records " + std::to_string(total));
  }

  if (count == 0) {
    if (min != inf || max != -inf) {
      throw bad_field_error("empty digest must carry min = +inf, max = -inf");
    }
  } else {
    if (!std::isfinite(min) || !std::isfinite(max) || min > max) {
      throw bad_field_error("min/max must be finite with min <= max");
    }
    if (min > cs.front().mean || max < cs.back().mean) {
      throw bad_field_error("min/max must bracket the centroid means");
    }
  }

  const scale_spec spec{kind, delta, 1.0};
  return digest::from_parts(spec, std::move(cs), min, max,
                            digest::default_buffer_capacity(delta));
}

digest deserialize(const std::vector<std::uint8_t>& bytes) {
  return deserialize(bytes.data(), bytes.size());
}

void write_digest_file(const std::filesystem::path& path, const digest& d) {
  const auto bytes = serialize(d);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

digest read_digest_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw std::runtime_error("error reading " + path.string());
  return deserialize(bytes);
}

nlohmann::json to_json(const digest& d) {
  if (!d.compacted()) {
    throw std::logic_error("digest has buffered samples; compact() first");
  }
  nlohmann::json centroids = nlohmann::json::array();
  for (const centroid& c : d.centroids()) {
    centroids.push_back({{"mean", c.mean}, {"weight", c.weight}});
  }
  return nlohmann::json{
      {"magic", "TDIG"},
      {"version", serialized_format_version},
      {"scale_kind", static_cast<int>(d.spec().kind)},
      {"delta", d.spec().delta},
      {"total_weight", d.total_weight()},
      {"min", d.min_value()},
      {"max", d.max_value()},
      {"centroid_count", d.centroids().size()},
      {"centroids", std::move(centroids)},
  };
}

}  // namespace tdigest
