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

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tdigest/digest.hpp"
#include "tdigest/scale.hpp"
#include "tdigest/serde.hpp"
#include "tdigest/verify.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_check_failed = 1;
constexpr int exit_bad_input = 2;
constexpr int exit_empty_input = 3;
constexpr int exit_spec_mismatch = 4;

const std::map<std::string, tdigest::scale_kind> scale_names{
    {"k0", tdigest::scale_kind::k0},
    {"k1", tdigest::scale_kind::k1},
    {"k2", tdigest::scale_kind::k2},
    {"k3", tdigest::scale_kind::k3},
};

// shortest representation that round-trips; locale-independent
std::string fmt(double v) {
  std::array<char, 32> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

struct stream_options {
  std::string input = "-";
  std::string scale = "k1";
  double delta = 100.0;
  std::size_t buffer = 0;  // 0: derive from delta
};

tdigest::scale_spec spec_from(const stream_options& opt) {
  return tdigest::scale_spec{scale_names.at(opt.scale), opt.delta, 1.0};
}

std::size_t buffer_from(const stream_options& opt) {
  return opt.buffer != 0 ? opt.buffer
                         : tdigest::digest::default_buffer_capacity(opt.delta);
}

std::string_view trim(std::string_view s) {
  const auto from = s.find_first_not_of(" \t\r\n");
  if (from == std::string_view::npos) return {};
  const auto to = s.find_last_not_of(" \t\r\n");
  return s.substr(from, to - from + 1);
}

/// Reads one decimal number per line, skipping blank lines. Exits the
/// process with exit_bad_input naming the offending line on parse errors.
std::vector<double> read_samples(const std::string& input) {
  std::ifstream file;
  if (input != "-") {
    file.open(input);
    if (!file) {
      std::cerr << "cannot open " << input << "\n";
      std::exit(exit_bad_input);
    }
  }
  std::istream& in = input == "-" ? std::cin : file;

  std::vector<double> samples;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string token{trim(line)};
    if (token.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || !std::isfinite(v)) {
      std::cerr << "line " << lineno << ": cannot parse '" << token
                << "' as a finite decimal number\n";
      std::exit(exit_bad_input);
    }
    samples.push_back(v);
  }
  return samples;
}

tdigest::digest load_digest(const std::string& path) {
  try {
    return tdigest::read_digest_file(path);
  } catch (const std::exception& e) {
    std::cerr << path << ": " << e.what() << "\n";
    std::exit(exit_bad_input);
  }
}

void write_table(const std::string& format, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  if (format == "csv") {
    for (std::size_t i = 0; i < header.size(); ++i) {
      std::cout << (i ? "," : "") << header[i];
    }
    std::cout << "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        std::cout << (i ? "," : "") << row[i];
      }
      std::cout << "\n";
    }
  } else {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& row : rows) {
      nlohmann::json obj;
      for (std::size_t i = 0; i < header.size(); ++i) {
        // numbers stay numbers in json output
        obj[header[i]] = std::stod(row[i]);
      }
      out.push_back(std::move(obj));
    }
    std::cout << out.dump(2) << "\n";
  }
}

int cmd_build(const stream_options& opt, const std::string& out_path) {
  const auto samples = read_samples(opt.input);
  if (samples.empty()) {
    std::cerr << "no samples in input\n";
    return exit_empty_input;
  }
  tdigest::digest d(spec_from(opt), buffer_from(opt));
  for (double x : samples) d.insert(x);
  d.compact();
  tdigest::write_digest_file(out_path, d);
  std::cerr << "n=" << d.total_weight() << " centroids=" << d.centroids().size()
            << "\n";
  return exit_ok;
}

int cmd_quantile(const std::string& digest_path, std::vector<double> qs,
                 const std::string& format) {
  for (double q : qs) {
    if (!(q >= 0.0 && q <= 1.0)) {
      std::cerr << "q=" << q << " is outside [0, 1]\n";
      return exit_bad_input;
    }
  }
  tdigest::digest d = load_digest(digest_path);
  if (d.empty()) {
    std::cerr << digest_path << ": digest holds no samples\n";
    return exit_bad_input;
  }
  std::vector<std::vector<std::string>> rows;
  rows.reserve(qs.size());
  for (double q : qs) {
    rows.push_back({fmt(q), fmt(d.quantile(q))});
  }
  write_table(format, {"q", "estimate"}, rows);
  return exit_ok;
}

int cmd_merge(const std::vector<std::string>& paths, const std::string& out_path) {
  if (paths.size() < 2) {
    std::cerr << "merge needs at least two digest files\n";
    return exit_bad_input;
  }
  std::vector<tdigest::digest> digests;
  digests.reserve(paths.size());
  for (const auto& p : paths) digests.push_back(load_digest(p));
  for (std::size_t i = 1; i < digests.size(); ++i) {
    if (!(digests[i].spec() == digests[0].spec())) {
      std::cerr << paths[i] << " and " << paths[0]
                << " use different scale specs\n";
      return exit_spec_mismatch;
    }
  }
  tdigest::digest merged = digests.front();
  for (std::size_t i = 1; i < digests.size(); ++i) {
    merged = tdigest::merge_digests(merged, digests[i]);
  }
  if (!tdigest::audit(merged).passed) {
    std::cerr << "merged digest failed its own audit\n";
    return exit_check_failed;
  }
  tdigest::write_digest_file(out_path, merged);
  std::cerr << "n=" << merged.total_weight()
            << " centroids=" << merged.centroids().size() << "\n";
  return exit_ok;
}

nlohmann::json case_json(const tdigest::perturbation_case& c) {
  return {{"n", c.n},
          {"n1", c.n1},
          {"n2", c.n2},
          {"delta_n", c.delta_n},
          {"side", c.which == tdigest::side::right ? "right" : "left"}};
}

int cmd_check_file(const std::string& digest_path, const std::string& format) {
  tdigest::digest d = load_digest(digest_path);
  const auto report = tdigest::audit(d);
  if (format == "csv") {
    std::vector<std::vector<std::string>> rows;
    for (const auto& e : report.entries) {
      if (e.pass) continue;
      rows.push_back({std::to_string(e.index), fmt(e.q1), fmt(e.q2),
                      fmt(e.weight), fmt(e.k_size)});
    }
    write_table(format, {"index", "q1", "q2", "weight", "k_size"}, rows);
  } else {
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& e : report.entries) {
      if (e.pass) continue;
      failures.push_back({{"index", e.index},
                          {"q1", e.q1},
                          {"q2", e.q2},
                          {"weight", e.weight},
                          {"k_size", e.k_size}});
    }
    const nlohmann::json out{{"mode", "audit"},
                             {"passed", report.passed},
                             {"centroids", report.entries.size()},
                             {"worst_excess", report.worst_excess},
                             {"failures", std::move(failures)}};
    std::cout << out.dump(2) << "\n";
  }
  std::cerr << (report.passed ? "audit passed" : "audit FAILED")
            << " worst_excess=" << fmt(report.worst_excess) << "\n";
  return report.passed ? exit_ok : exit_check_failed;
}

int cmd_check_proofs(const stream_options& opt, std::uint64_t trials,
                     std::uint64_t seed, const std::string& format) {
  const auto report =
      tdigest::proof_property_suite(spec_from(opt), trials, seed);
  if (format == "csv") {
    std::vector<std::vector<std::string>> rows;
    for (const auto& fam : report.families) {
      rows.push_back({tdigest::to_string(fam.family),
                      std::to_string(fam.trials),
                      std::to_string(fam.violations), fmt(fam.worst_excess),
                      std::to_string(fam.strict_trials),
                      std::to_string(fam.strict_holds)});
    }
    write_table("csv",
                {"family", "trials", "violations", "worst_excess",
                 "strict_trials", "strict_holds"},
                rows);
  } else {
    nlohmann::json families = nlohmann::json::array();
    for (const auto& fam : report.families) {
      nlohmann::json f{{"family", tdigest::to_string(fam.family)},
                       {"trials", fam.trials},
                       {"violations", fam.violations},
                       {"worst_excess", fam.worst_excess},
                       {"strict_trials", fam.strict_trials},
                       {"strict_holds", fam.strict_holds}};
      if (fam.violations > 0 && fam.worst_case) {
        f["worst_case"] = case_json(*fam.worst_case);
      }
      families.push_back(std::move(f));
    }
    const nlohmann::json out{{"mode", "proofs"},
                             {"passed", report.passed},
                             {"scale", opt.scale},
                             {"delta", opt.delta},
                             {"trials", trials},
                             {"seed", seed},
                             {"families", std::move(families)}};
    std::cout << out.dump(2) << "\n";
  }
  std::cerr << (report.passed ? "proof suite passed" : "proof suite FAILED")
            << "\n";
  return report.passed ? exit_ok : exit_check_failed;
}

int cmd_accuracy(const stream_options& opt, std::vector<double> qs,
                 const std::string& format) {
  for (double q : qs) {
    if (!(q >= 0.0 && q <= 1.0)) {
      std::cerr << "q=" << q << " is outside [0, 1]\n";
      return exit_bad_input;
    }
  }
  auto samples = read_samples(opt.input);
  if (samples.empty()) {
    std::cerr << "no samples in input\n";
    return exit_empty_input;
  }
  tdigest::digest d(spec_from(opt), buffer_from(opt));
  for (double x : samples) d.insert(x);
  d.compact();
  std::sort(samples.begin(), samples.end());

  std::vector<std::vector<std::string>> rows;
  rows.reserve(qs.size());
  for (double q : qs) {
    const double truth = tdigest::oracle_quantile_sorted(samples, q);
    const double estimate = d.quantile(q);
    const double err = tdigest::q_space_error(d, truth, q);
    rows.push_back({fmt(q), fmt(estimate), fmt(truth), fmt(err)});
  }
  write_table(format, {"q", "estimate", "oracle", "q_error"}, rows);
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"streaming quantile digest tool"};
  app.require_subcommand(1);

  stream_options opt;
  std::string out_path;
  std::string format = "json";
  std::string digest_path;
  std::vector<std::string> merge_paths;
  std::vector<double> qs;
  std::uint64_t trials = 10000;
  std::uint64_t seed = 0;
  bool proofs = false;

  const auto add_scale_flags = [&](CLI::App* cmd) {
    cmd->add_option("--scale", opt.scale, "scale function")
        ->check(CLI::IsMember({"k0", "k1", "k2", "k3"}))
        ->default_val("k1");
    cmd->add_option("--delta", opt.delta, "compression factor")
        ->check(CLI::PositiveNumber)
        ->default_val(100.0);
    cmd->add_option("--buffer", opt.buffer,
                    "ingestion buffer size (default 10 * ceil(delta))");
  };
  const auto add_format_flag = [&](CLI::App* cmd) {
    cmd->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->default_val("json");
  };

  CLI::App* build = app.add_subcommand(
      "build", "build a digest from one number per line");
  build->add_option("input", opt.input, "input file, - for stdin")
      ->default_val("-");
  add_scale_flags(build);
  build->add_option("--out", out_path, "digest file to write")->required();

  CLI::App* quantile = app.add_subcommand(
      "quantile", "query quantiles of a stored digest");
  quantile->add_option("digest", digest_path, "digest file")->required();
  quantile->add_option("--q", qs, "quantiles in [0, 1]")
      ->delimiter(',')
      ->required();
  add_format_flag(quantile);

  CLI::App* merge = app.add_subcommand(
      "merge", "merge two or more digests with equal specs");
  merge->add_option("digests", merge_paths, "digest files")->required();
  merge->add_option("--out", out_path, "digest file to write")->required();

  CLI::App* check = app.add_subcommand(
      "check", "audit a digest file, or run the shrink-property suite");
  check->add_option("digest", digest_path, "digest file to audit");
  check->add_flag("--proofs", proofs, "run the randomized shrink-property suite");
  add_scale_flags(check);
  check->add_option("--trials", trials, "cases per family")
      ->check(CLI::PositiveNumber)
      ->default_val(10000);
  check->add_option("--seed", seed, "random seed")->default_val(0);
  add_format_flag(check);

  CLI::App* accuracy = app.add_subcommand(
      "accuracy", "compare digest estimates against the exact quantiles");
  accuracy->add_option("input", opt.input, "input file, - for stdin")
      ->default_val("-");
  add_scale_flags(accuracy);
  accuracy->add_option("--q", qs, "quantile grid")->delimiter(',');
  add_format_flag(accuracy);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_bad_input;
  }

  try {
    if (build->parsed()) return cmd_build(opt, out_path);
    if (quantile->parsed()) return cmd_quantile(digest_path, qs, format);
    if (merge->parsed()) return cmd_merge(merge_paths, out_path);
    if (check->parsed()) {
      if (proofs) return cmd_check_proofs(opt, trials, seed, format);
      if (digest_path.empty()) {
        std::cerr << "check needs a digest file or --proofs\n";
        return exit_bad_input;
      }
      return cmd_check_file(digest_path, format);
    }
    if (accuracy->parsed()) {
      if (qs.empty()) {
        qs = {0.001, 0.01, 0.05, 0.1, 0.25, 0.5,
              0.75,  0.9,  0.95, 0.99, 0.999};
      }
      return cmd_accuracy(opt, qs, format);
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return exit_bad_input;
  }
  return exit_bad_input;
}
