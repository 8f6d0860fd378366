// Copyright 2026 The ScanOracle Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "cli_commands.h"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <limits>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scanoracle/characterize.h"
#include "scanoracle/detect.h"
#include "scanoracle/error.h"
#include "scanoracle/ingest.h"
#include "scanoracle/parallel.h"
#include "scanoracle/report.h"
#include "scanoracle/zmapgen.h"

namespace scanoracle::cli {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr const char* kVersion = "0.3.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Items are CIDRs or files of CIDRs.
CidrSet load_cidrs(const std::vector<std::string>& items) {
  CidrSet out;
  for (const auto& item : items) {
    if (auto c = parse_cidr(item)) {
      out = out.unite(CidrSet::single(*c));
    } else if (fs::exists(item)) {
      out = out.unite(CidrSet::load(item));
    } else {
      throw UsageError("not a CIDR or readable file: " + item);
    }
  }
  return out;
}

CidrSet load_blacklist(const std::string& text) {
  if (text.empty() || text == "none") return CidrSet();
  if (text == "default" || text == "zmap") return default_zmap_blacklist();
  return load_cidrs({text});
}

class Manifest {
 public:
  Manifest(std::string command, int argc, char** argv) : start_(Clock::now()) {
    j_["command"] = std::move(command);
    j_["tool_version"] = kVersion;
    Json args = Json::array();
    for (int i = 1; i < argc; ++i) args.push_back(argv[i]);
    j_["argv"] = args;
    j_["stages"] = Json::object();
  }

  Json& operator[](const char* key) { return j_[key]; }

  void stage(const std::string& name) {
    auto now = Clock::now();
    j_["stages"][name] =
        std::chrono::duration<double, std::milli>(now - start_).count();
    start_ = now;
  }

  void write(const fs::path& path) const {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
    out << j_.dump(2) << '\n';
  }

 private:
  Json j_;
  Clock::time_point start_;
};

ShardSpec parse_shards(uint32_t count, uint32_t index, const std::string& scheme) {
  ShardSpec s;
  s.count = count;
  s.index = index;
  if (count <= 1 && scheme.empty()) return s;
  if (scheme.empty() || scheme == "pizza") {
    s.scheme = ShardScheme::kPizza;
  } else if (scheme == "legacy") {
    s.scheme = ShardScheme::kLegacy;
  } else if (scheme == "none") {
    s.scheme = ShardScheme::kNone;
  } else {
    throw UsageError("unknown shard scheme: " + scheme);
  }
  return s;
}

std::pair<int, int> parse_range(const std::string& text) {
  auto colon = text.find(':');
  try {
    if (colon == std::string::npos) {
      int v = std::stoi(text);
      return {v, v};
    }
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw UsageError("bad prefix range: " + text);
  }
}

// ---------------------------------------------------------------------------
// Session loading shared by detect and characterize.

struct SessionInput {
  ObservedSequence seq;
  Ipv4 src = 0;
  bool fingerprint = false;
  size_t packets = 0;
};

struct InputArgs {
  std::vector<std::string> logs;
  std::vector<std::string> dryruns;
  std::vector<std::string> observe;
  double gap = 60.0;
  size_t min_distinct = 5;
};

void add_input_flags(CLI::App* cmd, InputArgs& a) {
  cmd->add_option("--log", a.logs, "Packet log CSV (timestamp_us,src,dst,proto,dport,ip_id)");
  cmd->add_option("--dryrun", a.dryruns, "Dry-run address file, one session each");
  cmd->add_option("--observe", a.observe, "Observation network CIDR or CIDR file");
  cmd->add_option("--gap", a.gap, "Session split gap in seconds")->capture_default_str();
  cmd->add_option("--min-distinct", a.min_distinct, "Minimum distinct destinations")
      ->capture_default_str();
}

std::vector<SessionInput> load_sessions(const InputArgs& a, const CidrSet* observation) {
  if (a.logs.empty() && a.dryruns.empty()) {
    throw UsageError("no input: give --log or --dryrun");
  }
  std::vector<SessionInput> out;
  for (const auto& path : a.logs) {
    ParseStats stats;
    auto records = parse_log(path, observation, &stats);
    if (stats.malformed) {
      std::cerr << path << ": skipped " << stats.malformed << " malformed lines\n";
    }
    for (auto& s : sessionize(records, a.gap, a.min_distinct)) {
      SessionInput in;
      in.seq = s.sequence();
      in.src = s.src;
      in.fingerprint = s.zmap_ipid;
      in.packets = s.records.size();
      out.push_back(std::move(in));
    }
  }
  for (const auto& path : a.dryruns) {
    SessionInput in;
    in.seq = sequence_from_dryrun(path);
    if (observation) {
      std::vector<Ipv4> kept;
      for (Ipv4 x : in.seq.addresses) {
        if (observation->contains(x)) kept.push_back(x);
      }
      in.seq.addresses = std::move(kept);
    }
    in.packets = in.seq.size();
    out.push_back(std::move(in));
  }
  return out;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  std::vector<std::string> whitelist;
  std::string blacklist;
  uint64_t seed = 1;
  uint32_t shards = 1;
  uint32_t shard_index = 0;
  std::string scheme;
  std::vector<std::string> observe;
  std::optional<uint64_t> limit;
  std::string out = "-";
  size_t batch = 1;
  std::string sweep;
  std::string manifest;
};

int cmd_generate(const GenerateArgs& a, int argc, char** argv) {
  Manifest manifest("generate", argc, argv);
  CidrSet whitelist = load_cidrs(a.whitelist);
  CidrSet blacklist = load_blacklist(a.blacklist);
  std::optional<CidrSet> observe;
  if (!a.observe.empty()) observe = load_cidrs(a.observe);
  ShardSpec shard = parse_shards(a.shards, a.shard_index, a.scheme);
  const uint64_t limit = a.limit.value_or(kNoLimit);
  if (a.batch == 0) throw UsageError("--batch must be positive");

  // (whitelist, tag) per prefix size.
  std::vector<std::pair<CidrSet, std::string>> targets;
  if (!a.sweep.empty()) {
    auto [lo, hi] = parse_range(a.sweep);
    if (lo < 0 || hi > 32 || lo > hi) throw UsageError("prefix range must lie in 0..32");
    Ipv4 anchor = observe && !observe->empty() ? observe->ranges().front().lo
                                               : whitelist.ranges().front().lo;
    for (int k = lo; k <= hi; ++k) {
      targets.emplace_back(CidrSet::single(Cidr::containing(anchor, k)),
                           "prefix" + std::to_string(k) + "_");
    }
  } else {
    targets.emplace_back(whitelist, "");
  }
  const bool many = targets.size() > 1 || a.batch > 1;
  if (many && a.out == "-") throw UsageError("--batch/--sweep-prefix need --out DIR");
  if (many) fs::create_directories(a.out);

  Json files = Json::array();
  Json seeds = Json::array();
  for (const auto& [wl, tag] : targets) {
    for (size_t b = 0; b < a.batch; ++b) {
      const uint64_t seed = a.seed + b;
      ScanConfig cfg = build_scan_config(wl, blacklist, seed, shard);
      std::optional<CidrSet> filter;
      if (observe) filter = observe->intersect(cfg.scan_set);
      auto seq = generate_sequence(cfg, limit, filter ? &*filter : nullptr);
      if (a.out == "-") {
        for (Ipv4 x : seq) std::cout << format_ipv4(x) << '\n';
      } else {
        fs::path path = many ? fs::path(a.out) / (tag + "seed" + std::to_string(seed) + ".txt")
                             : fs::path(a.out);
        write_dryrun(seq, path);
        files.push_back({{"path", path.string()},
                         {"seed", seed},
                         {"p", cfg.p()},
                         {"g", cfg.generator},
                         {"s0", cfg.initial_state},
                         {"n", cfg.n},
                         {"addresses", seq.size()}});
      }
      if (tag.empty() || seeds.size() < a.batch) seeds.push_back(seed);
    }
  }
  manifest.stage("generate");
  manifest["whitelist"] = a.whitelist;
  manifest["blacklist"] = a.blacklist;
  manifest["seeds"] = seeds;
  manifest["observation"] = a.observe;
  manifest["limit"] = a.limit ? Json(*a.limit) : Json(nullptr);
  manifest["shards"] = {{"count", shard.count}, {"index", shard.index}, {"scheme", a.scheme}};
  manifest["outputs"] = files;
  fs::path mpath = !a.manifest.empty() ? fs::path(a.manifest)
                   : many             ? fs::path(a.out) / "manifest.json"
                   : a.out != "-"     ? fs::path(a.out + ".manifest.json")
                                      : fs::path();
  if (!mpath.empty()) manifest.write(mpath);
  if (many) std::cerr << "wrote " << files.size() << " dry-run files to " << a.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// detect

struct DetectArgs {
  InputArgs in;
  std::string blacklist = "default";
  size_t m = 20;
  std::optional<uint64_t> kmax;
  double alpha = 1e-8;
  bool exhaustive = false;
  bool brute = false;
  std::optional<uint64_t> budget;
  uint64_t scan_size = 1ULL << 32;
  std::string checkpoint;
  std::string out = "-";
  std::string manifest;
};

void warn_small_m(size_t m) {
  if (m >= 20) return;
  const FieldParams& p4 = zmap_fields().back();
  std::fprintf(stderr,
               "warning: m=%zu raises the false-positive bound to theta(m, p4) = %.3g\n",
               m, theta_bound(m, p4));
}

std::vector<DetectionResult> run_detection(const std::vector<SessionInput>& sessions,
                                           const CidrSet& blacklist,
                                           const CidrSet* observation,
                                           const DetectArgs& a) {
  std::vector<DetectionResult> results(sessions.size());
  const unsigned threads = default_thread_count();
  const bool per_session = sessions.size() > 1 && threads > 1;
  DetectOptions opt;
  opt.m = a.m;
  opt.exhaustive = a.exhaustive;
  opt.k_max = a.kmax;
  opt.threads = per_session ? 1 : threads;
  opt.observation = observation;
  parallel_for(sessions.size(), per_session ? threads : 1, [&](size_t i) {
    const ObservedSequence& seq = sessions[i].seq;
    DetectionResult r = detect_with_offsets(seq, blacklist, opt);
    if (!r.success() && a.brute && seq.size() >= a.m) {
      BruteForceOptions bo;
      bo.m = a.m;
      bo.alpha = a.alpha;
      bo.block_base = seq.addresses.front();
      bo.observed_size = observation->count();
      bo.scan_size = a.scan_size;
      bo.budget = a.budget;
      bo.threads = opt.threads;
      if (!a.checkpoint.empty()) {
        bo.checkpoint = sessions.size() == 1 ? a.checkpoint
                                             : a.checkpoint + "." + std::to_string(i);
      }
      const FieldParams& field = select_prime(a.scan_size);
      DetectionResult b = brute_force_offset(seq, field, bo);
      b.session_id = seq.session_id;
      if (b.success() || b.status == ErrorCode::kBudgetExceeded) r = b;
    }
    r.session_id = seq.session_id;
    results[i] = std::move(r);
  });
  return results;
}

int cmd_detect(const DetectArgs& a, int argc, char** argv) {
  Manifest manifest("detect", argc, argv);
  if (a.m < 3) throw UsageError("--m must be at least 3");
  if (a.brute && !a.budget) throw UsageError("--brute needs --budget OPS");
  if (a.brute && a.in.observe.empty()) throw UsageError("--brute needs --observe");
  if (a.scan_size == 0 || a.scan_size > (1ULL << 32)) throw UsageError("--scan-size in 1..2^32");
  warn_small_m(a.m);
  CidrSet blacklist = load_blacklist(a.blacklist);
  std::optional<CidrSet> observation;
  if (!a.in.observe.empty()) observation = load_cidrs(a.in.observe);
  const CidrSet* obs = observation ? &*observation : nullptr;

  auto sessions = load_sessions(a.in, obs);
  manifest.stage("ingest");
  auto results = run_detection(sessions, blacklist, obs, a);
  manifest.stage("detect");

  std::vector<Json> rows;
  std::vector<bool> fps;
  for (size_t i = 0; i < results.size(); ++i) {
    Json j = detection_json(results[i]);
    j["fingerprint"] = sessions[i].fingerprint;
    j["packets"] = sessions[i].packets;
    rows.push_back(std::move(j));
    fps.push_back(sessions[i].fingerprint);
  }
  std::string table = summary_table(summarize(results, fps));
  if (a.out == "-") {
    for (const auto& r : rows) std::cout << r.dump() << '\n';
    std::cerr << table;
  } else {
    write_jsonl(a.out, rows);
    std::cout << table;
  }
  manifest["m"] = a.m;
  manifest["k_max"] = a.kmax ? Json(*a.kmax) : Json(nullptr);
  manifest["alpha"] = a.alpha;
  manifest["gap_threshold"] = a.in.gap;
  manifest["observation"] = a.in.observe;
  manifest["inputs"] = {{"logs", a.in.logs}, {"dryruns", a.in.dryruns}};
  manifest["blacklist"] = a.blacklist;
  manifest["outputs"] = {a.out};
  fs::path mpath = !a.manifest.empty() ? fs::path(a.manifest)
                   : a.out != "-"     ? fs::path(a.out + ".manifest.json")
                                      : fs::path();
  if (!mpath.empty()) manifest.write(mpath);
  return 0;
}

// ---------------------------------------------------------------------------
// characterize

struct CharacterizeArgs {
  DetectArgs detect;
  std::string results;
  std::string csv;
  std::string plots;
  double window_hours = 0.0;  // 0: no time limit
};

int cmd_characterize(const CharacterizeArgs& a, int argc, char** argv) {
  Manifest manifest("characterize", argc, argv);
  const DetectArgs& d = a.detect;
  if (d.in.observe.empty()) throw UsageError("characterize needs --observe");
  CidrSet observation = load_cidrs(d.in.observe);
  CidrSet blacklist = load_blacklist(d.blacklist);
  auto sessions = load_sessions(d.in, &observation);
  manifest.stage("ingest");

  std::vector<DetectionResult> results;
  if (!a.results.empty()) {
    std::map<std::string, DetectionResult> by_id;
    for (const auto& j : read_jsonl(a.results)) {
      if (!j.contains("detector")) continue;
      DetectionResult r = detection_from_json(j);
      by_id.emplace(r.session_id, std::move(r));
    }
    for (const auto& s : sessions) {
      auto it = by_id.find(s.seq.session_id);
      DetectionResult r;
      r.session_id = s.seq.session_id;
      if (it != by_id.end()) r = it->second;
      if (r.success() && !s.seq.addresses.empty()) {
        int64_t x1 = static_cast<int64_t>(s.seq.addresses.front()) - r.offset;
        r.first_state = x1 > 0 ? static_cast<uint64_t>(x1) : 0;
        if (r.first_state == 0) r.status = ErrorCode::kIncompatibleOffset;
      }
      results.push_back(std::move(r));
    }
  } else {
    warn_small_m(d.m);
    results = run_detection(sessions, blacklist, &observation, d);
  }
  manifest.stage("detect");

  std::vector<ScanProfile> profiles;
  size_t skipped = 0;
  for (size_t i = 0; i < sessions.size(); ++i) {
    if (!results[i].success()) {
      ++skipped;
      continue;
    }
    try {
      profiles.push_back(characterize(results[i], sessions[i].seq, observation, sessions[i].src));
    } catch (const Error& e) {
      std::cerr << sessions[i].seq.session_id << ": " << e.what() << '\n';
      ++skipped;
    }
  }
  auto groups = group_cooperating_sources(
      profiles, a.window_hours > 0 ? a.window_hours * 3600.0
                                   : std::numeric_limits<double>::infinity());
  manifest.stage("characterize");

  std::vector<Json> rows;
  for (const auto& p : profiles) rows.push_back(profile_json(p));
  for (const auto& g : groups) rows.push_back(group_json(g, profiles));
  rows.push_back(bandwidth_json());
  if (d.out == "-") {
    for (const auto& r : rows) std::cout << r.dump() << '\n';
  } else {
    write_jsonl(d.out, rows);
  }
  if (!a.csv.empty()) {
    std::ofstream out(a.csv);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + a.csv);
    out << profiles_csv(profiles);
  }
  if (!a.plots.empty()) {
    fs::create_directories(a.plots);
    std::vector<std::pair<double, double>> pv;
    std::vector<double> epr;
    for (const auto& p : profiles) {
      pv.emplace_back(p.progress, p.visibility);
      if (p.epr_total) epr.push_back(*p.epr_total);
    }
    write_scatter_svg(fs::path(a.plots) / "visibility_progress.svg",
                      "Visibility against progress", "progress P", "visibility V", pv);
    write_ecdf_svg(fs::path(a.plots) / "epr_ecdf.svg", "Emitted packet rate",
                   "packets per second", epr, true,
                   {{"100Mb", line_rate_pps(100e6)},
                    {"1GbE", line_rate_pps(1e9)},
                    {"10GbE", line_rate_pps(10e9)}});
  }
  std::ostream& info = d.out == "-" ? std::cerr : std::cout;
  info << "profiles: " << profiles.size() << ", skipped without successful detection: "
       << skipped << ", cooperation groups: " << groups.size() << '\n';

  manifest["m"] = d.m;
  manifest["gap_threshold"] = d.in.gap;
  manifest["window_hours"] = a.window_hours;
  manifest["observation"] = d.in.observe;
  manifest["inputs"] = {{"logs", d.in.logs}, {"dryruns", d.in.dryruns}, {"results", a.results}};
  manifest["outputs"] = {d.out, a.csv, a.plots};
  fs::path mpath = !d.manifest.empty() ? fs::path(d.manifest)
                   : d.out != "-"     ? fs::path(d.out + ".manifest.json")
                                      : fs::path();
  if (!mpath.empty()) manifest.write(mpath);
  return 0;
}

void add_detect_flags(CLI::App* cmd, DetectArgs& a) {
  add_input_flags(cmd, a.in);
  cmd->add_option("-b,--blacklist", a.blacklist,
                  "Default blacklist hypothesis: file, CIDR, 'default' or 'none'")
      ->capture_default_str();
  cmd->add_option("--m", a.m, "Addresses per detection attempt")->capture_default_str();
  cmd->add_option("--kmax", a.kmax, "Cap on multipliers tested per hypothesis");
  cmd->add_option("--out", a.out, "Output JSON-lines file ('-' for stdout)")
      ->capture_default_str();
  cmd->add_option("--manifest", a.manifest, "Run manifest path");
  cmd->add_flag("--exhaustive", a.exhaustive, "Evaluate every offset hypothesis");
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Simulate ZMap address generation and identify ZMap scans"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write dry-run address sequences");
  g->add_option("-w,--whitelist", gen.whitelist, "Whitelist CIDR or CIDR file")->required();
  g->add_option("-b,--blacklist", gen.blacklist, "Blacklist file, CIDR or 'default'");
  g->add_option("--seed", gen.seed, "Seed for (g, s0)")->capture_default_str();
  g->add_option("--shards", gen.shards, "Shard count")->capture_default_str();
  g->add_option("--shard-index", gen.shard_index, "Shard index")->capture_default_str();
  g->add_option("--shard-scheme", gen.scheme, "legacy or pizza")
      ->check(CLI::IsMember({"legacy", "pizza", "none"}));
  g->add_option("--observe", gen.observe, "Keep only addresses in these CIDRs");
  g->add_option("--limit", gen.limit, "Stop after this many addresses");
  g->add_option("--out", gen.out, "Output file, or directory with --batch")
      ->capture_default_str();
  g->add_option("--batch", gen.batch, "Consecutive seeds to generate")->capture_default_str();
  g->add_option("--sweep-prefix", gen.sweep,
                "LO:HI, target the /k around the observation for each k");
  g->add_option("--manifest", gen.manifest, "Run manifest path");

  DetectArgs det;
  auto* d = app.add_subcommand("detect", "Identify ZMap scans in packet logs or dry runs");
  add_detect_flags(d, det);
  d->add_option("--alpha", det.alpha, "Brute force false-negative target per offset")
      ->capture_default_str();
  d->add_flag("--brute", det.brute, "Brute force the offset when hypotheses fail");
  d->add_option("--budget", det.budget, "Brute force operation budget");
  d->add_option("--scan-size", det.scan_size, "Assumed |S| for brute force")
      ->capture_default_str();
  d->add_option("--checkpoint", det.checkpoint, "Brute force checkpoint file");

  CharacterizeArgs chr;
  auto* c = app.add_subcommand("characterize", "Profile detected scans");
  add_detect_flags(c, chr.detect);
  c->add_option("--results", chr.results, "Detection JSON lines to reuse");
  c->add_option("--csv", chr.csv, "CSV summary path");
  c->add_option("--plots", chr.plots, "Directory for SVG figures");
  c->add_option("--window", chr.window_hours, "Cooperation time window in hours (0: unlimited)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*g) return cmd_generate(gen, argc, argv);
    if (*d) return cmd_detect(det, argc, argv);
    if (*c) return cmd_characterize(chr, argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error (" << error_code_name(e.code()) << "): " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace scanoracle::cli
