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
#ifndef SCANORACLE_REPORT_H_
#define SCANORACLE_REPORT_H_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "scanoracle/characterize.h"
#include "scanoracle/detect.h"

namespace scanoracle {

using Json = nlohmann::ordered_json;

// One JSON-lines record per detection outcome. The leading keys are
// session_id, detector, sampling, prefix_len, blacklist_mode, g, offset, k,
// r, iterations and elapsed_us; the rest are extras.
Json detection_json(const DetectionResult& d);
// Inverse of detection_json for the fields characterization needs. The first
// state is not stored; callers derive it from the session's first address.
DetectionResult detection_from_json(const Json& j);
Json profile_json(const ScanProfile& p);
Json group_json(const CooperationGroup& g, const std::vector<ScanProfile>& profiles);
// Reference packet rates of 100 Mb/s, 1 GbE and 10 GbE SYN scans.
Json bandwidth_json();

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows);
std::vector<Json> read_jsonl(const std::filesystem::path& path);

// One row per profile.
std::string profiles_csv(const std::vector<ScanProfile>& profiles);

// Counts by (fingerprint label, outcome, blacklist mode).
struct SummaryRow {
  bool fingerprint = false;
  bool success = false;
  std::string blacklist;
  size_t count = 0;
};
std::vector<SummaryRow> summarize(const std::vector<DetectionResult>& results,
                                  const std::vector<bool>& fingerprints);
std::string summary_table(const std::vector<SummaryRow>& rows);

// Static figures.
void write_scatter_svg(const std::filesystem::path& path, const std::string& title,
                       const std::string& x_label, const std::string& y_label,
                       const std::vector<std::pair<double, double>>& points);
void write_ecdf_svg(const std::filesystem::path& path, const std::string& title,
                    const std::string& x_label, std::vector<double> values,
                    bool log_x, const std::vector<std::pair<std::string, double>>& marks);

}  // namespace scanoracle

#endif  // SCANORACLE_REPORT_H_
