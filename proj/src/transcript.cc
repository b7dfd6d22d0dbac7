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
#include "fedcloud/transcript.h"

#include <bit>
#include <cstring>

#include "fedcloud/error.h"

namespace fedcloud {
namespace {

constexpr std::uint32_t kPlainMagic = 0x56504346;  // "FCPV" little-endian
constexpr std::uint16_t kPlainVersion = 1;

template <typename T>
void PutLe(std::vector<std::uint8_t>& out, T v) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
  }
}

template <typename T>
T GetLe(std::span<const std::uint8_t> bytes, std::size_t pos) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(bytes[pos + i]) << (8 * i);
  }
  return static_cast<T>(v);
}

void PutF64(std::vector<std::uint8_t>& out, double x) {
  PutLe(out, std::bit_cast<std::uint64_t>(x));
}

}  // namespace

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::kCentralized: return "centralized";
    case Mode::kFl: return "fl";
    case Mode::kHeFl: return "he_fl";
    case Mode::kDpFl: return "dp_fl";
    case Mode::kOurs: return "ours";
  }
  return "?";
}

Mode parse_mode(std::string_view name, std::string_view field) {
  for (Mode m : {Mode::kCentralized, Mode::kFl, Mode::kHeFl, Mode::kDpFl,
                 Mode::kOurs}) {
    if (mode_name(m) == name) return m;
  }
  throw ConfigError(std::string(field) + ": unknown mode '" + std::string(name) +
                    "' (expected centralized, fl, he_fl, dp_fl or ours)");
}

std::string_view payload_tag_name(PayloadTag tag) {
  switch (tag) {
    case PayloadTag::kPlaintext: return "plaintext";
    case PayloadTag::kCiphertext: return "ciphertext";
    case PayloadTag::kNoised: return "noised";
    case PayloadTag::kMetadata: return "metadata";
    case PayloadTag::kModel: return "model";
  }
  return "?";
}

std::vector<std::uint8_t> serialize_plain_vector(std::span<const double> v) {
  std::vector<std::uint8_t> out;
  out.reserve(plain_vector_wire_size(v.size()));
  PutLe<std::uint32_t>(out, kPlainMagic);
  PutLe<std::uint16_t>(out, kPlainVersion);
  PutLe<std::uint16_t>(out, 0);
  PutLe<std::uint32_t>(out, static_cast<std::uint32_t>(v.size()));
  for (double x : v) PutF64(out, x);
  return out;
}

GradientVector deserialize_plain_vector(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kPlainHeaderBytes ||
      GetLe<std::uint32_t>(bytes, 0) != kPlainMagic) {
    throw ParseError("plain vector: bad header", 0);
  }
  if (GetLe<std::uint16_t>(bytes, 4) != kPlainVersion) {
    throw ParseError("plain vector: unsupported version", 0);
  }
  const std::size_t dim = GetLe<std::uint32_t>(bytes, 8);
  if (bytes.size() != plain_vector_wire_size(dim)) {
    throw ParseError("plain vector: length does not match dim", 0);
  }
  GradientVector out(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    out[i] = std::bit_cast<double>(
        GetLe<std::uint64_t>(bytes, kPlainHeaderBytes + 8 * i));
  }
  return out;
}

std::vector<std::uint8_t> serialize_client_meta(const ClientMeta& meta) {
  std::vector<std::uint8_t> out;
  out.reserve(kClientMetaBytes);
  PutF64(out, meta.loss);
  PutLe<std::uint64_t>(out, meta.data_size);
  PutF64(out, meta.bandwidth);
  return out;
}

std::vector<std::uint8_t> serialize_scalar(double x) {
  std::vector<std::uint8_t> out;
  out.reserve(kScalarBytes);
  PutF64(out, x);
  return out;
}

}  // namespace fedcloud
