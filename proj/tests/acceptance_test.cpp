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

/*
 * End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
 * the exit code is the number of failed criteria. The CLI binary path is
 * taken from argv[1].
 *
 * Accuracy and size budgets were calibrated over 20 fixed seeds and pinned
 * at 2x the worst observed error (1.2x for centroid counts); the seeds
 * used here are the calibration seeds, so the margins are stable.
 */

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tdigest/digest.hpp"
#include "tdigest/serde.hpp"
#include "tdigest/verify.hpp"

using namespace tdigest;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- plumbing

struct criterion_failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void ensure(bool ok, const std::string& what) {
  if (!ok) throw criterion_failure(what);
}

std::string cli_binary;
fs::path scratch;

int run_cli(const std::string& args, std::string* out = nullptr) {
  const fs::path out_path = scratch / "cli_stdout.txt";
  const std::string cmd = "\"" + cli_binary + "\" " + args + " > " +
                          out_path.string() + " 2> /dev/null";
  const int status = std::system(cmd.c_str());
  ensure(status != -1 && WIFEXITED(status), "could not run: " + cmd);
  if (out) {
    std::ifstream in(out_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    *out = ss.str();
  }
  return WEXITSTATUS(status);
}

double elapsed_seconds(const std::chrono::steady_clock::time_point& from) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - from)
      .count();
}

constexpr scale_kind all_kinds[] = {scale_kind::k0, scale_kind::k1,
                                    scale_kind::k2, scale_kind::k3};

scale_spec spec_of(scale_kind kind, double delta) {
  return scale_spec{kind, delta, 1.0};
}

enum class dist { uniform, normal, lognormal };

const char* to_string(dist d) {
  switch (d) {
    case dist::uniform: return "uniform";
    case dist::normal: return "normal";
    case dist::lognormal: return "lognormal";
  }
  return "?";
}

std::vector<double> draw(dist which, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> xs(count);
  switch (which) {
    case dist::uniform: {
      std::uniform_real_distribution<double> g(0.0, 1.0);
      for (double& x : xs) x = g(rng);
      break;
    }
    case dist::normal: {
      std::normal_distribution<double> g(0.0, 1.0);
      for (double& x : xs) x = g(rng);
      break;
    }
    case dist::lognormal: {
      std::lognormal_distribution<double> g(0.0, 2.0);
      for (double& x : xs) x = g(rng);
      break;
    }
  }
  return xs;
}

digest build(const scale_spec& spec, const std::vector<double>& xs) {
  digest d(spec);
  for (double x : xs) d.insert(x);
  d.compact();
  return d;
}

// ------------------------------------------------- criterion 3/5 shared run

struct e2e_result {
  scale_kind kind;
  dist which;
  double delta;
  digest d;
  double stream_min;
  double stream_max;
  double worst_excess;  // across every intermediate and the final audit
  std::size_t audits;
};

std::vector<e2e_result>& e2e_runs() {
  static std::vector<e2e_result> runs = [] {
    std::vector<e2e_result> out;
    std::uint64_t seed = 5000;
    for (scale_kind kind : all_kinds) {
      for (dist which : {dist::uniform, dist::normal, dist::lognormal}) {
        for (double delta : {50.0, 100.0, 500.0}) {
          const auto xs = draw(which, 100000, ++seed);
          digest d(spec_of(kind, delta));
          double worst = 0.0;
          std::size_t audits = 0;
          for (double x : xs) {
            d.insert(x);
            if (d.buffered() == 0) {  // a compaction just ran
              const auto report = audit(d);
              worst = std::max(worst, report.worst_excess);
              ++audits;
            }
          }
          d.compact();
          const auto report = audit(d);
          worst = std::max(worst, report.worst_excess);
          ++audits;
          const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
          out.push_back({kind, which, delta, std::move(d), *lo, *hi, worst,
                         audits});
        }
      }
    }
    return out;
  }();
  return runs;
}

// ------------------------------------------------------------- criteria

// shrink-property suite through the CLI, 10^4 cases per family, under 10 s
void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t families = 0;
  for (const char* scale : {"k0", "k1", "k2", "k3"}) {
    std::string out;
    const int code =
        run_cli(std::string("check --proofs --scale ") + scale +
                    " --delta 100 --trials 10000 --seed 1 --format csv",
                &out);
    ensure(code == 0, std::string("proof suite failed for ") + scale);
    std::istringstream lines(out);
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) {
      if (line.empty()) continue;
      ++families;
      ensure(line.find(",10000,0,") != std::string::npos,
             std::string(scale) + " family line reports violations: " + line);
    }
  }
  ensure(families == 7, "expected 7 side/branch families, saw " +
                            std::to_string(families));
  const double secs = elapsed_seconds(t0);
  ensure(secs < 10.0, "proof suite took " + std::to_string(secs) + " s");
}

// strict shrinking for k0/k1/k2 right-side cases with n1 >= 1
void criterion_2() {
  for (scale_kind kind : {scale_kind::k0, scale_kind::k1, scale_kind::k2}) {
    const auto report = proof_property_suite(spec_of(kind, 100.0), 10000, 2);
    for (const auto& fam : report.families) {
      ensure(fam.violations == 0,
             std::string(to_string(fam.family)) + ": grew beyond tolerance");
      ensure(fam.strict_trials > 0, "no strictness-eligible trials");
      const double ratio = static_cast<double>(fam.strict_holds) /
                           static_cast<double>(fam.strict_trials);
      ensure(ratio >= 0.999, std::string(to_string(fam.family)) +
                                 ": strict in only " + std::to_string(ratio));
    }
  }
}

// every scale x distribution x delta ingests 1e5 samples with the audit
// green after every compaction, under 60 s
void criterion_3() {
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& run : e2e_runs()) {
    ensure(run.worst_excess <= 1e-9,
           std::string(to_string(run.kind)) + "/" + to_string(run.which) +
               "/delta=" + std::to_string(run.delta) + " worst excess " +
               std::to_string(run.worst_excess));
    ensure(run.audits >= 20, "too few compactions audited");
  }
  const double secs = elapsed_seconds(t0);
  ensure(secs < 60.0, "end-to-end audits took " + std::to_string(secs) + " s");
}

// pairwise merging in random tree order conserves weight and the audit
void criterion_4() {
  for (scale_kind kind : all_kinds) {
    std::vector<digest> pool;
    for (std::uint64_t i = 0; i < 10; ++i) {
      pool.push_back(build(spec_of(kind, 100.0),
                           draw(dist::uniform, 10000, 6000 + i)));
    }
    std::mt19937_64 rng(1234 + static_cast<std::uint64_t>(kind));
    while (pool.size() > 1) {
      const std::size_t i = rng() % pool.size();
      digest a = std::move(pool[i]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(i));
      const std::size_t j = rng() % pool.size();
      digest b = std::move(pool[j]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(j));
      pool.push_back(merge_digests(a, b));
    }
    ensure(pool.front().total_weight() == 100000,
           std::string(to_string(kind)) + ": weight not conserved");
    ensure(audit(pool.front()).passed,
           std::string(to_string(kind)) + ": merged digest failed audit");
  }
}

// quantile(0) and quantile(1) equal the exact stream extremes, all configs
void criterion_5() {
  for (auto& run : e2e_runs()) {
    ensure(run.d.quantile(0.0) == run.stream_min,
           std::string(to_string(run.kind)) + "/" + to_string(run.which) +
               ": quantile(0) != stream min");
    ensure(run.d.quantile(1.0) == run.stream_max,
           std::string(to_string(run.kind)) + "/" + to_string(run.which) +
               ": quantile(1) != stream max");
  }
}

// oracle-calibrated accuracy budgets; tail emphasis for k2/k3
void criterion_6() {
  // pinned at 2x the worst of 20 calibration seeds (observed 3.35e-4 at
  // the tails, 6.81e-4 at the median); both inside the spec envelopes
  constexpr double k1_tail_budget = 6.7e-4;   // envelope 1e-3
  constexpr double k1_mid_budget = 1.4e-3;    // envelope 1e-2
  double k2_max_tail = 0.0, k2_max_mid = 0.0, k2_sum_tail = 0.0, k2_sum_mid = 0.0;
  double k3_max_tail = 0.0, k3_max_mid = 0.0, k3_sum_tail = 0.0, k3_sum_mid = 0.0;

  for (int s = 1; s <= 20; ++s) {
    auto xs = draw(dist::uniform, 100000, 1000 + s);
    auto sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    const double truth_lo = oracle_quantile_sorted(sorted, 0.001);
    const double truth_mid = oracle_quantile_sorted(sorted, 0.5);
    const double truth_hi = oracle_quantile_sorted(sorted, 0.999);

    digest d1 = build(spec_of(scale_kind::k1, 100.0), xs);
    const double e_lo = q_space_error(d1, truth_lo, 0.001);
    const double e_mid = q_space_error(d1, truth_mid, 0.5);
    const double e_hi = q_space_error(d1, truth_hi, 0.999);
    ensure(e_lo <= k1_tail_budget && e_hi <= k1_tail_budget,
           "k1 tail error over budget at seed " + std::to_string(s));
    ensure(e_mid <= k1_mid_budget,
           "k1 median error over budget at seed " + std::to_string(s));

    for (scale_kind kind : {scale_kind::k2, scale_kind::k3}) {
      digest d = build(spec_of(kind, 100.0), xs);
      const double tail = std::max(q_space_error(d, truth_lo, 0.001),
                                   q_space_error(d, truth_hi, 0.999));
      const double mid = q_space_error(d, truth_mid, 0.5);
      if (kind == scale_kind::k2) {
        k2_max_tail = std::max(k2_max_tail, tail);
        k2_max_mid = std::max(k2_max_mid, mid);
        k2_sum_tail += tail;
        k2_sum_mid += mid;
      } else {
        k3_max_tail = std::max(k3_max_tail, tail);
        k3_max_mid = std::max(k3_max_mid, mid);
        k3_sum_tail += tail;
        k3_sum_mid += mid;
      }
    }
  }
  // tail emphasis over the calibration ensemble: the worst (and mean) tail
  // error stays below the worst (and mean) midrange error
  ensure(k2_max_tail <= k2_max_mid && k2_sum_tail <= k2_sum_mid,
         "k2 tail error exceeds midrange error");
  ensure(k3_max_tail <= k3_max_mid && k3_sum_tail <= k3_sum_mid,
         "k3 tail error exceeds midrange error");
}

// centroid counts stay bounded: spec caps plus pinned 1.2x calibration
void criterion_7() {
  const std::map<std::pair<scale_kind, double>, std::size_t> pinned{
      {{scale_kind::k0, 50.0}, 35},  {{scale_kind::k0, 100.0}, 70},
      {{scale_kind::k0, 500.0}, 334}, {{scale_kind::k1, 50.0}, 38},
      {{scale_kind::k1, 100.0}, 71},  {{scale_kind::k1, 500.0}, 341},
      {{scale_kind::k2, 50.0}, 45},  {{scale_kind::k2, 100.0}, 82},
      {{scale_kind::k2, 500.0}, 363}, {{scale_kind::k3, 50.0}, 41},
      {{scale_kind::k3, 100.0}, 76},  {{scale_kind::k3, 500.0}, 336},
  };
  for (scale_kind kind : all_kinds) {
    for (double delta : {50.0, 100.0, 500.0}) {
      const bool tail_scaled =
          kind == scale_kind::k2 || kind == scale_kind::k3;
      const std::size_t cap = static_cast<std::size_t>(
          (tail_scaled ? 4.0 : 2.0) * delta + 10.0);
      const std::size_t pin = pinned.at({kind, delta});
      for (int s = 1; s <= 20; ++s) {
        const digest d = build(spec_of(kind, delta),
                               draw(dist::uniform, 100000, 2000 + s));
        const std::size_t count = d.centroids().size();
        ensure(count <= cap, std::string(to_string(kind)) + " delta=" +
                                 std::to_string(delta) + ": " +
                                 std::to_string(count) + " > cap " +
                                 std::to_string(cap));
        ensure(count <= pin, std::string(to_string(kind)) + " delta=" +
                                 std::to_string(delta) + ": " +
                                 std::to_string(count) + " > pinned " +
                                 std::to_string(pin));
      }
    }
  }
}

// serialization: bit-exact round trips; mutations rejected or still valid
void criterion_8() {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> kind_of(0, 3);
  std::uniform_real_distribution<double> log_delta(std::log(10.0),
                                                   std::log(1000.0));
  std::uniform_int_distribution<std::size_t> size_of(0, 10000);
  std::vector<std::vector<std::uint8_t>> pool;

  for (int trial = 0; trial < 1000; ++trial) {
    const auto kind = static_cast<scale_kind>(kind_of(rng));
    const double delta = std::exp(log_delta(rng));
    const std::size_t count = size_of(rng);
    digest d(spec_of(kind, delta));
    std::normal_distribution<double> g(0.0, 100.0);
    for (std::size_t i = 0; i < count; ++i) d.insert(g(rng));
    d.compact();

    const auto bytes = serialize(d);
    const digest back = deserialize(bytes);
    ensure(serialize(back) == bytes, "round trip not bit-identical");
    ensure(back.centroids().size() == d.centroids().size(),
           "round trip changed the centroid count");
    for (std::size_t i = 0; i < d.centroids().size(); ++i) {
      ensure(std::memcmp(&back.centroids()[i], &d.centroids()[i],
                         sizeof(centroid)) == 0,
             "round trip changed a centroid bit pattern");
    }
    if (pool.size() < 8 && !d.centroids().empty()) pool.push_back(bytes);
  }

  ensure(!pool.empty(), "no digests to mutate");
  std::uniform_int_distribution<int> byte_of(0, 255);
  std::size_t rejected = 0, accepted = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto bytes = pool[trial % pool.size()];
    const std::size_t at =
        std::uniform_int_distribution<std::size_t>(0, bytes.size() - 1)(rng);
    std::uint8_t repl = static_cast<std::uint8_t>(byte_of(rng));
    while (repl == bytes[at]) repl = static_cast<std::uint8_t>(byte_of(rng));
    bytes[at] = repl;
    try {
      digest d = deserialize(bytes);
      // accepted: must satisfy every structural invariant on re-check
      digest::from_parts(d.spec(), d.centroids(), d.min_value(),
                         d.max_value(), d.buffer_capacity());
      ++accepted;
    } catch (const serde_error&) {
      ++rejected;
    }
    // anything else escapes and fails the criterion
  }
  ensure(rejected + accepted == 1000, "mutation trials went missing");
  ensure(rejected > 0, "no mutation was ever rejected");
}

// the CLI is deterministic: same input, same bytes out
void criterion_9() {
  const fs::path input = scratch / "determinism_input.txt";
  {
    std::ofstream out(input);
    out.precision(17);
    for (double x : draw(dist::uniform, 100000, 4242)) out << x << "\n";
  }
  const fs::path one = scratch / "one.td";
  const fs::path two = scratch / "two.td";
  ensure(run_cli("build " + input.string() + " --scale k2 --out " +
                 one.string()) == 0,
         "first build failed");
  ensure(run_cli("build " + input.string() + " --scale k2 --out " +
                 two.string()) == 0,
         "second build failed");
  std::ifstream a(one, std::ios::binary), b(two, std::ios::binary);
  std::ostringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  ensure(!sa.str().empty() && sa.str() == sb.str(),
         "serialized digests differ between runs");

  std::string report_one, report_two;
  ensure(run_cli("check --proofs --scale k3 --trials 2000 --seed 9",
                 &report_one) == 0,
         "first proof run failed");
  ensure(run_cli("check --proofs --scale k3 --trials 2000 --seed 9",
                 &report_two) == 0,
         "second proof run failed");
  ensure(!report_one.empty() && report_one == report_two,
         "proof reports differ between runs");
}

struct criterion {
  int id;
  const char* title;
  std::function<void()> run;
};

}  // namespace

int main(int argc, char** argv) {
  cli_binary = argc > 1 ? argv[1] : "tools/tdigest";
  scratch = fs::temp_directory_path() /
            ("tdigest_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(scratch);

  const std::vector<criterion> criteria{
      {1, "shrink-property suite, 10^4 cases per side/branch family", criterion_1},
      {2, "strict shrinking for k0/k1/k2 right-side additions", criterion_2},
      {3, "audit green after every compaction, 36 configurations", criterion_3},
      {4, "random pairwise merges conserve weight and pass audit", criterion_4},
      {5, "quantile(0)/quantile(1) equal the exact stream extremes", criterion_5},
      {6, "accuracy within pinned budgets; k2/k3 tails beat midrange", criterion_6},
      {7, "centroid counts within spec caps and pinned calibration", criterion_7},
      {8, "serialization round trips bit-exactly; mutations contained", criterion_8},
      {9, "byte-identical CLI outputs for identical inputs", criterion_9},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    try {
      c.run();
      std::printf("criterion %d: PASS  %s\n", c.id, c.title);
    } catch (const std::exception& e) {
      ++failures;
      std::printf("criterion %d: FAIL  %s — %s\n", c.id, c.title, e.what());
    }
    std::fflush(stdout);
  }

  fs::remove_all(scratch);
  if (failures == 0) {
    std::printf("all %zu acceptance criteria passed\n", criteria.size());
  } else {
    std::printf("%d acceptance criteria FAILED\n", failures);
  }
  return failures;
}
