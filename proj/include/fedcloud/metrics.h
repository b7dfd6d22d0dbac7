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
#ifndef FEDCLOUD_METRICS_H_
#define FEDCLOUD_METRICS_H_

// Post-hoc measurements over round transcripts: data leakage through a
// gradient-inversion attack, bytes on the wire, and cipher operation counts.

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fedcloud/synthetic_task.h"
#include "fedcloud/transcript.h"

namespace fedcloud {

// A sample counts as leaked when ||x_hat - x|| / ||x|| is below this.
inline constexpr double kLeakRelativeError = 1e-3;

struct LeakageResult {
  std::uint64_t round = 0;
  std::string mode;
  double reconstructed_fraction = 0.0;
  double mean_reconstruction_error = 0.0;
  std::size_t samples = 0;
  std::size_t leaked = 0;
};

// Closed-form inversion for squared loss on a single sample: any number of
// gradient steps move the model along (x, 1), so x = update[:d] / update[d].
// Returns nullopt when the bias coordinate is zero (nothing to invert).
std::optional<GradientVector> invert_single_sample_update(
    std::span<const double> update);

// Attacks every plaintext- or noised-tagged upload. Ciphertext uploads give
// the attacker nothing; its guess for those clients is the zero vector
// (relative error 1). Throws UnsupportedTaskError unless the task is linear
// regression with exactly one sample per client.
LeakageResult leakage_rate(const RoundTranscript& transcript,
                           const SyntheticTask& task);

struct CostResult {
  std::uint64_t round = 0;
  std::string mode;
  std::uint64_t upload_bytes = 0;
  std::uint64_t download_bytes = 0;
  std::uint64_t encrypt_ops = 0;
  std::uint64_t decrypt_ops = 0;
  std::uint64_t homomorphic_ops = 0;
  double wall_clock_ms = 0.0;

  CostResult& operator+=(const CostResult& o);
};

CostResult communication_cost(const RoundTranscript& transcript);
CostResult computation_cost(const RoundTranscript& transcript);
// Both of the above in one row.
CostResult round_cost(const RoundTranscript& transcript);
// Sum over rounds; all zero for an empty span.
CostResult communication_cost(std::span<const RoundTranscript> transcripts);
CostResult computation_cost(std::span<const RoundTranscript> transcripts);

struct MetricsRow {
  std::uint64_t round = 0;
  std::string mode;
  std::optional<double> leakage_rate;
  CostResult cost;
};

inline constexpr int kMetricsSchemaVersion = 1;

// One header comment line with the schema version, then
// round,mode,leakage_rate,upload_bytes,download_bytes,encrypt_ops,
// decrypt_ops,homomorphic_ops,wall_clock_ms. Wall-clock is written as 0
// unless include_timing is set, so files stay reproducible.
void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows,
                       bool include_timing);

// Shortest round-trip decimal form.
std::string format_double(double x);

}  // namespace fedcloud

#endif  // FEDCLOUD_METRICS_H_
