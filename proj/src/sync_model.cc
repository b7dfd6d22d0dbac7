/*
 * Copyright 2026 The fedcloud Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "fedcloud/sync_model.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "fedcloud/error.h"

namespace fedcloud {
namespace {

constexpr char kTraceHeader[] =
    "timestamp_s,platform_id,latency_ms,bandwidth_MBps,jitter_ms";
constexpr double kLatencyFloorMs = 1e-3;

bool NonNegativeFinite(double x) { return std::isfinite(x) && x >= 0.0; }

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string Trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double ParseNumber(const std::string& cell, const char* column,
                   std::size_t line) {
  const std::string s = Trim(cell);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(std::string("column ") + column + ": '" + s +
                         "' is not a number",
                     line);
  }
  return v;
}

}  // namespace

void CloudPlatform::validate() const {
  if (!(bandwidth_MBps > 0.0) || !std::isfinite(bandwidth_MBps)) {
    throw ValidationError("platform " + platform_id +
                          ": bandwidth_MBps must be > 0");
  }
  if (!NonNegativeFinite(sync_latency_s) || !NonNegativeFinite(payload_MB) ||
      !NonNegativeFinite(load_factor)) {
    throw ValidationError("platform " + platform_id +
                          ": latency, payload and load must be finite and >= 0");
  }
}

double total_delay(std::span<const CloudPlatform> platforms) {
  if (platforms.empty()) throw ValidationError("total_delay: no platforms");
  double total = 0.0;
  for (const auto& p : platforms) {
    p.validate();
    total += p.sync_latency_s + p.payload_MB / p.bandwidth_MBps;
  }
  return total;
}

double weighted_sync_delay(std::span<const CloudPlatform> platforms,
                           const SyncWeights& weights) {
  if (weights.weights.size() != platforms.size()) {
    throw DimensionError("weighted_sync_delay: " +
                         std::to_string(weights.weights.size()) +
                         " weights for " + std::to_string(platforms.size()) +
                         " platforms");
  }
  if (platforms.empty()) {
    throw ValidationError("weighted_sync_delay: no platforms");
  }
  double sum_w = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < platforms.size(); ++i) {
    platforms[i].validate();
    const double w = weights.weights[i];
    if (!NonNegativeFinite(w)) {
      throw ValidationError("weighted_sync_delay: weights must be >= 0");
    }
    sum_w += w;
    total += w * platforms[i].sync_latency_s;
  }
  if (std::abs(sum_w - 1.0) > 1e-9) {
    throw ValidationError("weighted_sync_delay: weights are not normalized");
  }
  return total;
}

std::vector<NetworkSample> latest_samples(
    std::span<const NetworkSample> samples,
    std::span<const CloudPlatform> platforms, const SyncPolicy& policy) {
  double now = policy.now_s;
  if (std::isinf(now)) {
    now = -std::numeric_limits<double>::infinity();
    for (const auto& s : samples) now = std::max(now, s.timestamp_s);
  }
  std::vector<NetworkSample> out;
  std::vector<std::string> stale;
  for (const auto& p : platforms) {
    const NetworkSample* latest = nullptr;
    for (const auto& s : samples) {
      if (s.platform_id != p.platform_id || s.timestamp_s > now) continue;
      if (latest == nullptr || s.timestamp_s >= latest->timestamp_s) latest = &s;
    }
    if (latest == nullptr ||
        now - latest->timestamp_s > policy.staleness_window_s) {
      stale.push_back(p.platform_id);
      continue;
    }
    out.push_back(*latest);
  }
  if (!stale.empty()) {
    std::string names;
    for (const auto& s : stale) names += (names.empty() ? "" : ", ") + s;
    throw StalenessError("no fresh network sample for platform(s): " + names);
  }
  return out;
}

SyncWeights derive_sync_weights(std::span<const NetworkSample> samples,
                                std::span<const CloudPlatform> platforms,
                                const SyncPolicy& policy) {
  if (platforms.empty()) {
    throw ValidationError("derive_sync_weights: no platforms");
  }
  for (const auto& p : platforms) p.validate();
  const auto latest = latest_samples(samples, platforms, policy);

  SyncWeights out;
  double total = 0.0;
  for (std::size_t i = 0; i < platforms.size(); ++i) {
    const double latency = std::max(latest[i].latency_ms, kLatencyFloorMs);
    const double raw =
        latest[i].bandwidth_MBps / (latency * (1.0 + platforms[i].load_factor));
    out.platform_ids.push_back(platforms[i].platform_id);
    out.weights.push_back(raw);
    total += raw;
  }
  if (!(total > 0.0)) {
    throw DegenerateWeightsError(
        "derive_sync_weights: all platforms report zero bandwidth");
  }
  for (auto& w : out.weights) w /= total;
  return out;
}

std::vector<NetworkSample> parse_trace(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<NetworkSample> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    if (!have_header) {
      if (Trim(line) != kTraceHeader) {
        throw ParseError(std::string("expected header '") + kTraceHeader + "'",
                         line_no);
      }
      have_header = true;
      continue;
    }
    const auto cells = SplitCsv(line);
    if (cells.size() != 5) {
      throw ParseError("expected 5 columns, got " + std::to_string(cells.size()),
                       line_no);
    }
    NetworkSample s;
    s.timestamp_s = ParseNumber(cells[0], "timestamp_s", line_no);
    s.platform_id = Trim(cells[1]);
    if (s.platform_id.empty()) throw ParseError("empty platform_id", line_no);
    s.latency_ms = ParseNumber(cells[2], "latency_ms", line_no);
    s.bandwidth_MBps = ParseNumber(cells[3], "bandwidth_MBps", line_no);
    s.jitter_ms = ParseNumber(cells[4], "jitter_ms", line_no);
    if (!NonNegativeFinite(s.timestamp_s) || !NonNegativeFinite(s.latency_ms) ||
        !NonNegativeFinite(s.bandwidth_MBps) || !NonNegativeFinite(s.jitter_ms)) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": trace values must be finite and >= 0");
    }
    out.push_back(std::move(s));
  }
  if (!have_header) throw ParseError("empty trace (missing header)", line_no);
  std::stable_sort(out.begin(), out.end(),
                   [](const NetworkSample& a, const NetworkSample& b) {
                     return a.timestamp_s < b.timestamp_s;
                   });
  return out;
}

std::vector<NetworkSample> ingest_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace file " + path.string());
  return parse_trace(in);
}

nlohmann::json platform_to_json(const CloudPlatform& p) {
  return {{"platform_id", p.platform_id},
          {"sync_latency_s", p.sync_latency_s},
          {"bandwidth_MBps", p.bandwidth_MBps},
          {"payload_MB", p.payload_MB},
          {"load_factor", p.load_factor}};
}

CloudPlatform platform_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("platform: expected an object");
  CloudPlatform p;
  auto num = [&](const char* key, double fallback, bool required) {
    if (!j.contains(key)) {
      if (required) throw ConfigError(std::string("platform: missing '") + key + "'");
      return fallback;
    }
    if (!j.at(key).is_number()) {
      throw ConfigError(std::string("platform: '") + key + "' must be a number");
    }
    return j.at(key).get<double>();
  };
  if (!j.contains("platform_id") || !j.at("platform_id").is_string()) {
    throw ConfigError("platform: 'platform_id' must be a string");
  }
  p.platform_id = j.at("platform_id").get<std::string>();
  p.sync_latency_s = num("sync_latency_s", 0.0, true);
  p.bandwidth_MBps = num("bandwidth_MBps", 1.0, true);
  // payload_MB stands in for the per-platform "training time" term: the data
  // volume shipped per sync, so payload / bandwidth is a time.
  p.payload_MB = num("payload_MB", 0.0, false);
  p.load_factor = num("load_factor", 0.0, false);
  p.validate();
  return p;
}

nlohmann::json sync_weights_to_json(const SyncWeights& w) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < w.weights.size(); ++i) {
    out.push_back({{"platform_id", w.platform_ids[i]}, {"weight", w.weights[i]}});
  }
  return out;
}

}  // namespace fedcloud
