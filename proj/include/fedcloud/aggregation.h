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
#ifndef FEDCLOUD_AGGREGATION_H_
#define FEDCLOUD_AGGREGATION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedcloud/he_core.h"

namespace fedcloud {

struct ClientMeta {
  std::string client_id;
  double loss = 0.0;            // post-training local loss, >= 0
  std::uint64_t data_size = 1;  // local sample count, >= 1
  double bandwidth = 1.0;       // Mbit/s, > 0

  void validate() const;
};

struct ClientUpdate {
  ClientMeta meta;
  std::optional<GradientVector> plain_update;
  std::optional<he::CipherVector> cipher_update;
  std::uint64_t upload_bytes = 0;
};

enum class WeightMode {
  // loss / (data_size * bandwidth^alpha)
  kFormulaAsWritten,
  // 1 / ((loss + eps) * data_size * bandwidth^alpha)
  kInverseLoss,
};

inline constexpr double kInverseLossEpsilon = 1e-9;

struct WeightParams {
  double alpha = 0.5;
  WeightMode mode = WeightMode::kFormulaAsWritten;
};

struct GlobalModel {
  GradientVector weights;
  std::uint64_t round = 0;
};

// Coordinate-wise homomorphic sum of K encrypted updates.
he::CipherVector encrypted_aggregate(const he::PublicKey& pk,
                                     std::span<const he::CipherVector> updates,
                                     he::OpCounts* counts = nullptr);

// Decrypts a homomorphic sum and divides by K in real arithmetic.
GradientVector finalize_mean(const he::SecretKey& sk,
                             const he::CipherVector& summed, std::size_t k,
                             std::size_t workers = 1,
                             he::OpCounts* counts = nullptr);

double client_weight(const ClientMeta& meta, const WeightParams& params);

// Weights for a cohort. When every formula-as-written weight is zero (all
// losses zero) the result falls back to uniform weights and
// `fell_back_to_uniform` is set.
std::vector<double> client_weights(std::span<const ClientMeta> metas,
                                   const WeightParams& params,
                                   bool* fell_back_to_uniform = nullptr);

struct WeightedUpdate {
  double weight = 0.0;
  std::span<const double> update;
};

// sum_k w_k u_k / sum_k w_k. Throws DegenerateWeightsError when the weight
// sum is zero.
GradientVector weighted_global_update(std::span<const WeightedUpdate> updates);

// One client's share of the hybrid numerator:
//   omega * E(w) (+) E(encode((1-omega) w)),  lifted to scale 2f.
//
// `full` is E(encode(w)) at scale f; `complement` is E(encode((1-omega) w)) at
// scale f. The scalar omega enters as round(omega * 2^f) and the complement
// is multiplied by 2^f, so the sum sits at scale 2f.
struct HybridTerms {
  const he::CipherVector* full = nullptr;
  const he::CipherVector* complement = nullptr;
  double mix_weight = 0.0;
};

// Homomorphic numerator summed over clients, at scale 2 * frac_bits.
he::CipherVector hybrid_numerator(const he::PublicKey& pk,
                                  std::span<const HybridTerms> terms,
                                  he::OpCounts* counts = nullptr);

// Decrypts a hybrid numerator and divides by the denominator, which is
// exactly K since omega + (1 - omega) = 1 for every client.
GradientVector finalize_hybrid(const he::SecretKey& sk,
                               const he::CipherVector& numerator, std::size_t k,
                               std::size_t workers = 1,
                               he::OpCounts* counts = nullptr);

// Quantized mix weight round(omega * 2^frac_bits). Throws ValidationError
// when omega is outside [0, 1].
std::int64_t quantize_mix_weight(double omega, int frac_bits);

// Client-side second term E(encode((1 - omega) * w)).
he::CipherVector encrypt_complement_term(const he::PublicKey& pk,
                                         std::span<const double> update,
                                         double mix_weight,
                                         const he::FixedPointCodec& codec,
                                         const he::BlockSpec& spec,
                                         const he::ParallelOptions& opts,
                                         he::OpCounts* counts = nullptr);

// Full hybrid update in one place, for callers that hold the secret key and
// both halves of every update (tests, offline analysis). The plain term is
// encrypted before summation so the whole numerator stays encrypted until
// one final decryption.
GlobalModel hybrid_update(const he::SecretKey& sk,
                          std::span<const ClientUpdate> updates,
                          std::span<const double> mix_weights,
                          std::uint64_t nonce_seed, std::uint64_t round = 0,
                          he::OpCounts* counts = nullptr);

}  // namespace fedcloud

#endif  // FEDCLOUD_AGGREGATION_H_
