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
#ifndef FEDCLOUD_FL_RUNTIME_H_
#define FEDCLOUD_FL_RUNTIME_H_

// Round-based simulation of clients, an aggregating server and a key
// authority that holds the decryption key.
//
// Modes:
//   centralized  pooled-data gradient steps, nothing transmitted
//   fl           plaintext updates, uniform weighted average
//   he_fl        blocked encryption, homomorphic sum, authority decrypts mean
//   dp_fl        per-client L2 clipping plus Gaussian noise, plain average
//   ours         loss/size/bandwidth client weights as hybrid mix weights,
//                encrypted hybrid numerator, cross-cloud sync accounting
//
// Every random draw is keyed by (seed, purpose, round, client, ...), so an
// experiment is a pure function of its Scenario.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fedcloud/aggregation.h"
#include "fedcloud/he_core.h"
#include "fedcloud/metrics.h"
#include "fedcloud/sync_model.h"
#include "fedcloud/synthetic_task.h"
#include "fedcloud/transcript.h"
#include "json.hpp"

namespace fedcloud {

struct TrainingConfig {
  int epochs = 1;
  double lr = 0.1;
};

struct CryptoConfig {
  int security_bits = 64;
  he::FixedPointCodec codec;
  std::size_t n_blocks = 4;
  std::size_t workers = 1;
};

struct DpConfig {
  double noise_multiplier = 1.0;  // sigma
  double clip = 1.0;              // C
};

struct SyncConfig {
  std::optional<std::filesystem::path> trace;
  double round_interval_s = 1.0;
  double staleness_window_s = std::numeric_limits<double>::infinity();
};

struct Scenario {
  std::vector<Mode> modes{Mode::kFl};
  std::size_t n_clients = 4;
  std::size_t rounds = 10;
  TaskSpec task;
  TrainingConfig training;
  std::optional<CryptoConfig> crypto;    // he_fl, ours
  std::optional<WeightParams> weighting;  // ours
  std::optional<DpConfig> dp;            // dp_fl
  std::vector<CloudPlatform> platforms;  // ours
  std::optional<SyncConfig> sync;        // ours, optional
  std::vector<double> client_bandwidths;  // Mbit/s; empty = seeded defaults
  std::uint64_t seed = 0;
  bool record_wall_clock = false;

  bool uses(Mode m) const;
  // Throws ConfigError naming the offending key.
  void validate() const;
};

// Unknown keys and wrong types are ConfigErrors that name the key. Relative
// trace paths are resolved against base_dir.
Scenario scenario_from_json(const nlohmann::json& doc,
                            const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);
nlohmann::json scenario_to_json(const Scenario& s);

struct ExperimentState {
  Mode mode = Mode::kFl;
  std::uint64_t round = 0;
  SyntheticTask task;
  GradientVector model;
  std::optional<he::KeyPair> keys;
  std::vector<NetworkSample> trace;
  std::vector<double> client_bandwidths;
};

ExperimentState init_state(const Scenario& scenario, Mode mode);

struct RoundReport {
  std::uint64_t round = 0;
  Mode mode = Mode::kFl;
  double train_loss = 0.0;
  std::optional<double> train_accuracy;
  std::optional<LeakageResult> leakage;
  CostResult cost;
  // Max |decrypted aggregate - plaintext aggregate of the same updates|.
  std::optional<double> shadow_max_abs_diff;
  std::optional<double> total_delay_s;
  std::optional<double> weighted_sync_delay_s;
  std::optional<SyncWeights> sync_weights;
  std::vector<double> mix_weights;
  bool uniform_weight_fallback = false;
  GradientVector model;
};

struct RoundOutput {
  RoundTranscript transcript;
  RoundReport report;
};

// Executes one round and advances `state`.
RoundOutput run_round(const Scenario& scenario, ExperimentState& state);

struct ExperimentReport {
  Mode mode = Mode::kFl;
  std::vector<RoundReport> rounds;
  std::vector<RoundTranscript> transcripts;
  CostResult total_cost;
  std::optional<std::string> key_fingerprint;
  bool non_cryptographic_strength = false;
};

ExperimentReport run_experiment(const Scenario& scenario, Mode mode);
// Runs the first configured mode.
ExperimentReport run_experiment(const Scenario& scenario);
std::vector<ExperimentReport> run_all(const Scenario& scenario);

// Per-round additive Gaussian noise used by dp_fl, exposed for testing.
GradientVector dp_noise(std::size_t dim, double stddev, std::uint64_t seed);
// Scales v down to L2 norm <= clip.
void clip_l2(GradientVector& v, double clip);

std::vector<MetricsRow> metrics_rows(const ExperimentReport& report);
nlohmann::json report_to_json(const ExperimentReport& report,
                              bool include_timing);
// {"schema_version", "scenario", "experiments": [...]}
nlohmann::json experiments_to_json(const Scenario& scenario,
                                   const std::vector<ExperimentReport>& reports,
                                   bool include_timing);

}  // namespace fedcloud

#endif  // FEDCLOUD_FL_RUNTIME_H_
