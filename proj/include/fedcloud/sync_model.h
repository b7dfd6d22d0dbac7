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
#ifndef FEDCLOUD_SYNC_MODEL_H_
#define FEDCLOUD_SYNC_MODEL_H_

// Cross-cloud synchronization cost model.
//
//   T_total    = sum_i (sync_latency_i + payload_i / bandwidth_i)
//   T_weighted = sum_i omega_i * sync_latency_i
//
// payload_MB is the volume each platform ships per synchronization. The
// transfer term payload / bandwidth is then in seconds.

#include <filesystem>
#include <istream>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace fedcloud {

struct CloudPlatform {
  std::string platform_id;
  double sync_latency_s = 0.0;
  double bandwidth_MBps = 1.0;
  double payload_MB = 0.0;
  double load_factor = 0.0;

  void validate() const;
};

struct SyncWeights {
  std::vector<std::string> platform_ids;
  std::vector<double> weights;
};

struct NetworkSample {
  double timestamp_s = 0.0;
  std::string platform_id;
  double latency_ms = 0.0;
  double bandwidth_MBps = 0.0;
  double jitter_ms = 0.0;
};

double total_delay(std::span<const CloudPlatform> platforms);

// Weights are matched to platforms by position.
double weighted_sync_delay(std::span<const CloudPlatform> platforms,
                           const SyncWeights& weights);

struct SyncPolicy {
  // Samples older than this (relative to `now_s`) are stale.
  double staleness_window_s = std::numeric_limits<double>::infinity();
  // Reference time. Infinity means "the newest timestamp in the samples".
  double now_s = std::numeric_limits<double>::infinity();
};

// Newest sample per platform (in `platforms` order) at or before the policy's
// reference time. Throws StalenessError listing every platform without a
// fresh sample.
std::vector<NetworkSample> latest_samples(
    std::span<const NetworkSample> samples,
    std::span<const CloudPlatform> platforms, const SyncPolicy& policy = {});

// Default policy: raw_i = bandwidth_i / (latency_i * (1 + load_factor_i)),
// using each platform's newest sample at or before now_s, then normalized.
// Latency is in ms as measured; a zero latency is floored at 1 microsecond.
SyncWeights derive_sync_weights(std::span<const NetworkSample> samples,
                                std::span<const CloudPlatform> platforms,
                                const SyncPolicy& policy = {});

// CSV with header timestamp_s,platform_id,latency_ms,bandwidth_MBps,jitter_ms.
// Returns samples stably sorted by timestamp.
std::vector<NetworkSample> parse_trace(std::istream& in);
std::vector<NetworkSample> ingest_trace(const std::filesystem::path& path);

nlohmann::json platform_to_json(const CloudPlatform& p);
CloudPlatform platform_from_json(const nlohmann::json& j);
nlohmann::json sync_weights_to_json(const SyncWeights& w);

}  // namespace fedcloud

#endif  // FEDCLOUD_SYNC_MODEL_H_
