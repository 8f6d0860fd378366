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
#include "scanoracle/report.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "scanoracle/error.h"

namespace scanoracle {
namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr double kW = 640, kH = 480, kPad = 60;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

std::string svg_frame(const std::string& title, const std::string& x_label,
                      const std::string& y_label) {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\""
     << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
     << escape_xml(title) << "</text>\n"
     << "<line x1=\"" << kPad << "\" y1=\"" << kH - kPad << "\" x2=\"" << kW - kPad
     << "\" y2=\"" << kH - kPad << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << kPad << "\" y1=\"" << kPad << "\" x2=\"" << kPad << "\" y2=\""
     << kH - kPad << "\" stroke=\"black\"/>\n"
     << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 20 << "\" text-anchor=\"middle\">"
     << escape_xml(x_label) << "</text>\n"
     << "<text x=\"18\" y=\"" << kH / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << kH / 2 << ")\">" << escape_xml(y_label) << "</text>\n";
  return os.str();
}

}  // namespace

Json detection_json(const DetectionResult& d) {
  Json j;
  j["session_id"] = d.session_id;
  j["detector"] = d.detector;
  j["sampling"] = d.sampling;
  if (d.hypothesis) {
    j["prefix_len"] = d.hypothesis->prefix_len;
    j["blacklist_mode"] = blacklist_mode_name(d.hypothesis->blacklist);
  } else {
    j["prefix_len"] = nullptr;
    j["blacklist_mode"] = nullptr;
  }
  j["g"] = d.g;
  j["offset"] = d.offset;
  j["k"] = d.k;
  j["r"] = d.r;
  j["iterations"] = d.iterations;
  j["elapsed_us"] = d.elapsed_us;
  j["status"] = std::string(error_code_name(d.status));
  j["p"] = d.p;
  j["multiplier"] = d.multiplier;
  j["first_state"] = d.first_state;
  if (d.total_iterations) j["total_iterations"] = d.total_iterations;
  if (d.hypothesis) {
    j["target"] = d.hypothesis->target.to_string();
    j["scan_size"] = d.hypothesis->n;
  }
  j["conflict"] = d.conflict;
  if (!d.message.empty()) j["message"] = d.message;
  if (d.detector == "brute") {
    j["checkpoint"] = d.checkpoint;
    j["operations"] = d.operations;
  }
  if (!d.others.empty()) {
    Json others = Json::array();
    for (const auto& o : d.others) {
      others.push_back({{"prefix_len", o.hypothesis ? o.hypothesis->prefix_len : -1},
                        {"blacklist_mode", o.hypothesis
                                               ? blacklist_mode_name(o.hypothesis->blacklist)
                                               : "none"},
                        {"g", o.g},
                        {"offset", o.offset},
                        {"sampling", o.sampling}});
    }
    j["others"] = others;
  }
  return j;
}

DetectionResult detection_from_json(const Json& j) {
  DetectionResult d;
  try {
    std::string status = j.value("status", std::string("NotZMap"));
    d.status = ErrorCode::kNotZMap;
    for (int c = 0; c <= static_cast<int>(ErrorCode::kZeroDuration); ++c) {
      if (status == error_code_name(static_cast<ErrorCode>(c))) d.status = static_cast<ErrorCode>(c);
    }
    d.session_id = j.value("session_id", std::string());
    d.detector = j.value("detector", std::string());
    d.sampling = j.value("sampling", std::string());
    d.p = j.value("p", uint64_t{0});
    d.g = j.value("g", uint64_t{0});
    d.offset = j.value("offset", int64_t{0});
    d.k = j.value("k", uint64_t{0});
    d.r = j.value("r", uint64_t{0});
    d.multiplier = j.value("multiplier", uint64_t{0});
    d.first_state = j.value("first_state", uint64_t{0});
    d.iterations = j.value("iterations", uint64_t{0});
    d.total_iterations = j.value("total_iterations", uint64_t{0});
    d.conflict = j.value("conflict", false);
    if (j.contains("target") && j["prefix_len"].is_number()) {
      OffsetHypothesis h;
      h.prefix_len = j["prefix_len"].get<int>();
      auto t = parse_cidr(j["target"].get<std::string>());
      if (!t) throw Error(ErrorCode::kFormatError, "bad target prefix");
      h.target = *t;
      std::string mode = j.value("blacklist_mode", std::string("empty"));
      h.blacklist = mode == "default"     ? BlacklistMode::kDefault
                    : mode == "ambiguous" ? BlacklistMode::kAmbiguous
                    : mode == "none"      ? BlacklistMode::kNone
                                          : BlacklistMode::kEmpty;
      h.field = field_for_prime(d.p);
      h.n = j.value("scan_size", uint64_t{0});
      h.offset = d.offset;
      d.hypothesis = h;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("bad detection record: ") + e.what());
  }
  if (d.success() && !field_for_prime(d.p)) {
    throw Error(ErrorCode::kFormatError, "detection record with unknown prime");
  }
  return d;
}

Json profile_json(const ScanProfile& p) {
  Json j;
  j["session_id"] = p.session_id;
  j["record"] = "profile";
  j["p"] = p.detection.p;
  j["g"] = p.detection.g;
  j["offset"] = p.detection.offset;
  j["targeted_prefix"] = p.targeted_prefix.to_string();
  j["blacklist_mode"] = blacklist_mode_name(p.blacklist);
  j["l"] = p.l;
  j["m"] = p.m;
  j["rk_first"] = p.rk_first;
  j["rk_last"] = p.rk_last;
  j["progress"] = p.progress;
  j["visibility"] = p.visibility;
  j["epr"] = p.epr ? Json(*p.epr) : Json(nullptr);
  j["opr"] = p.opr ? Json(*p.opr) : Json(nullptr);
  j["epr_total"] = p.epr_total ? Json(*p.epr_total) : Json(nullptr);
  j["cooperation_group"] = p.cooperation_group >= 0 ? Json(p.cooperation_group) : Json(nullptr);
  return j;
}

Json group_json(const CooperationGroup& g, const std::vector<ScanProfile>& profiles) {
  Json members = Json::array();
  for (size_t i : g.members) members.push_back(profiles[i].session_id);
  Json j;
  j["record"] = "cooperation_group";
  j["group_id"] = g.id;
  j["p"] = g.p;
  j["g"] = g.g;
  j["offset"] = g.offset;
  j["members"] = members;
  j["locality"] = locality_name(g.locality);
  j["summed_visibility"] = g.summed_visibility;
  j["combined_visibility"] =
      g.combined_visibility ? Json(*g.combined_visibility) : Json(nullptr);
  j["overlapping"] = g.overlapping;
  j["sharding_suspected"] = g.sharding_suspected;
  return j;
}

Json bandwidth_json() {
  return {{"record", "bandwidth_reference"},
          {"frame_bytes_on_wire", kSynWireBytes},
          {"pps_100mbps", line_rate_pps(100e6)},
          {"pps_1gbps", line_rate_pps(1e9)},
          {"pps_10gbps", line_rate_pps(10e9)}};
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows) {
  std::string text;
  for (const auto& r : rows) text += r.dump() + "\n";
  write_text(path, text);
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::vector<Json> rows;
  std::string line;
  size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      rows.push_back(Json::parse(line));
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::kFormatError,
                  path.string() + ":" + std::to_string(n) + ": invalid JSON");
    }
  }
  return rows;
}

std::string profiles_csv(const std::vector<ScanProfile>& profiles) {
  std::ostringstream os;
  os << "session_id,p,g,offset,targeted_prefix,blacklist_mode,l,m,rk_first,rk_last,"
        "progress,visibility,epr,opr,epr_total,cooperation_group\n";
  auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  for (const auto& p : profiles) {
    os << p.session_id << ',' << p.detection.p << ',' << p.detection.g << ','
       << p.detection.offset << ',' << p.targeted_prefix.to_string() << ','
       << blacklist_mode_name(p.blacklist) << ',' << p.l << ',' << p.m << ','
       << p.rk_first << ',' << p.rk_last << ',' << fmt(p.progress) << ','
       << fmt(p.visibility) << ',' << opt(p.epr) << ',' << opt(p.opr) << ','
       << opt(p.epr_total) << ','
       << (p.cooperation_group >= 0 ? std::to_string(p.cooperation_group) : "") << '\n';
  }
  return os.str();
}

std::vector<SummaryRow> summarize(const std::vector<DetectionResult>& results,
                                  const std::vector<bool>& fingerprints) {
  std::map<std::tuple<bool, bool, std::string>, size_t> counts;
  for (size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    bool fp = i < fingerprints.size() && fingerprints[i];
    std::string mode = r.success() && r.hypothesis
                           ? blacklist_mode_name(r.hypothesis->blacklist)
                           : (r.success() ? "none" : "-");
    ++counts[{fp, r.success(), mode}];
  }
  std::vector<SummaryRow> rows;
  for (const auto& [k, n] : counts) {
    rows.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), n});
  }
  return rows;
}

std::string summary_table(const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  os << "fingerprint  identified  blacklist  sessions\n";
  size_t total = 0;
  for (const auto& r : rows) {
    char line[96];
    std::snprintf(line, sizeof line, "%-11s  %-10s  %-9s  %zu\n",
                  r.fingerprint ? "zmap_ipid" : "-", r.success ? "yes" : "no",
                  r.blacklist.c_str(), r.count);
    os << line;
    total += r.count;
  }
  os << "total" << std::string(32, ' ') << total << "\n";
  return os.str();
}

void write_scatter_svg(const std::filesystem::path& path, const std::string& title,
                       const std::string& x_label, const std::string& y_label,
                       const std::vector<std::pair<double, double>>& points) {
  std::ostringstream os;
  os << svg_frame(title, x_label, y_label);
  const double w = kW - 2 * kPad, h = kH - 2 * kPad;
  for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    os << "<text x=\"" << kPad + t * w << "\" y=\"" << kH - kPad + 16
       << "\" text-anchor=\"middle\">" << fmt(t) << "</text>\n"
       << "<text x=\"" << kPad - 8 << "\" y=\"" << kH - kPad - t * h + 4
       << "\" text-anchor=\"end\">" << fmt(t) << "</text>\n";
  }
  for (const auto& [x, y] : points) {
    double cx = kPad + std::clamp(x, 0.0, 1.0) * w;
    double cy = kH - kPad - std::clamp(y, 0.0, 1.0) * h;
    os << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy)
       << "\" r=\"3\" fill=\"steelblue\" fill-opacity=\"0.6\"/>\n";
  }
  os << "</svg>\n";
  write_text(path, os.str());
}

void write_ecdf_svg(const std::filesystem::path& path, const std::string& title,
                    const std::string& x_label, std::vector<double> values,
                    bool log_x,
                    const std::vector<std::pair<std::string, double>>& marks) {
  std::ostringstream os;
  os << svg_frame(title, x_label, "ECDF");
  values.erase(std::remove_if(values.begin(), values.end(),
                              [&](double v) { return !std::isfinite(v) || (log_x && v <= 0); }),
               values.end());
  std::sort(values.begin(), values.end());
  const double w = kW - 2 * kPad, h = kH - 2 * kPad;
  auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
  double lo = 0, hi = 1;
  std::vector<double> all = values;
  for (const auto& m : marks) all.push_back(m.second);
  if (!all.empty()) {
    lo = tx(*std::min_element(all.begin(), all.end()));
    hi = tx(*std::max_element(all.begin(), all.end()));
  }
  if (hi <= lo) hi = lo + 1;
  auto px = [&](double v) { return kPad + (tx(v) - lo) / (hi - lo) * w; };
  if (!values.empty()) {
    os << "<polyline fill=\"none\" stroke=\"steelblue\" points=\"";
    for (size_t i = 0; i < values.size(); ++i) {
      double x = px(values[i]);
      os << fmt(x) << ',' << fmt(kH - kPad - static_cast<double>(i) / values.size() * h) << ' '
         << fmt(x) << ',' << fmt(kH - kPad - static_cast<double>(i + 1) / values.size() * h)
         << ' ';
    }
    os << "\"/>\n";
  }
  for (const auto& [label, v] : marks) {
    double x = px(v);
    os << "<line x1=\"" << fmt(x) << "\" y1=\"" << kPad << "\" x2=\"" << fmt(x)
       << "\" y2=\"" << kH - kPad << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n"
       << "<text x=\"" << fmt(x + 3) << "\" y=\"" << kPad + 12 << "\">"
       << escape_xml(label) << "</text>\n";
  }
  os << "<text x=\"" << kPad << "\" y=\"" << kH - kPad + 16 << "\">"
     << (log_x ? "1e" + fmt(lo) : fmt(lo)) << "</text>\n"
     << "<text x=\"" << kW - kPad << "\" y=\"" << kH - kPad + 16
     << "\" text-anchor=\"end\">" << (log_x ? "1e" + fmt(hi) : fmt(hi)) << "</text>\n"
     << "</svg>\n";
  write_text(path, os.str());
}

}  // namespace scanoracle
