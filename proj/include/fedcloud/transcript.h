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
#ifndef FEDCLOUD_TRANSCRIPT_H_
#define FEDCLOUD_TRANSCRIPT_H_

// Everything that crosses the client/server boundary in one round, as the
// exact bytes that were sent. Cost and leakage analyses read only this.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedcloud/aggregation.h"
#include "fedcloud/he_core.h"
#include "fedcloud/sync_model.h"

namespace fedcloud {

enum class Mode { kCentralized, kFl, kHeFl, kDpFl, kOurs };

std::string_view mode_name(Mode mode);
// Throws ConfigError naming `field` for unknown strings.
Mode parse_mode(std::string_view name, std::string_view field = "mode");

// kModel marks the global-model broadcast, which carries no client data.
enum class PayloadTag { kPlaintext, kCiphertext, kNoised, kMetadata, kModel };
enum class Direction { kUpload, kDownload };

std::string_view payload_tag_name(PayloadTag tag);

struct Payload {
  std::size_t client = 0;
  Direction direction = Direction::kUpload;
  PayloadTag tag = PayloadTag::kPlaintext;
  std::vector<std::uint8_t> bytes;
};

struct RoundTranscript {
  std::uint64_t round = 0;
  Mode mode = Mode::kFl;
  std::vector<Payload> payloads;
  he::OpCounts client_ops;
  he::OpCounts server_ops;
  he::OpCounts authority_ops;
  double wall_clock_ms = 0.0;
  std::optional<double> total_delay_s;
  std::optional<double> weighted_sync_delay_s;
  std::optional<SyncWeights> sync_weights;
};

// Plaintext vector layout: 12-byte header (magic "FCPV", version u16,
// flags u16, dim u32; little-endian) followed by dim little-endian f64.
inline constexpr std::size_t kPlainHeaderBytes = 12;
std::vector<std::uint8_t> serialize_plain_vector(std::span<const double> v);
GradientVector deserialize_plain_vector(std::span<const std::uint8_t> bytes);
constexpr std::size_t plain_vector_wire_size(std::size_t dim) {
  return kPlainHeaderBytes + 8 * dim;
}

// Client metadata: loss f64, data_size u64, bandwidth f64 (little-endian).
inline constexpr std::size_t kClientMetaBytes = 24;
std::vector<std::uint8_t> serialize_client_meta(const ClientMeta& meta);
// One f64, little-endian.
inline constexpr std::size_t kScalarBytes = 8;
std::vector<std::uint8_t> serialize_scalar(double x);

}  // namespace fedcloud

#endif  // FEDCLOUD_TRANSCRIPT_H_
