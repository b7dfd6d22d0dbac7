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
#include "fedcloud/aggregation.h"

#include <cassert>
#include <cmath>

#include "fedcloud/error.h"
#include "fedcloud/seed.h"

namespace fedcloud {
namespace {

void CheckCompatible(const he::PublicKey& pk, const he::CipherVector& first,
                     const he::CipherVector& other) {
  if (other.key_id != pk.key_id || first.key_id != pk.key_id) {
    throw KeyMismatchError("aggregate: vectors encrypted under different keys");
  }
  if (other.dim != first.dim) {
    throw DimensionError("aggregate: dimension mismatch (" +
                         std::to_string(first.dim) + " vs " +
                         std::to_string(other.dim) + ")");
  }
  if (other.scale_bits != first.scale_bits ||
      other.codec.frac_bits != first.codec.frac_bits) {
    throw DimensionError("aggregate: codec mismatch");
  }
}

he::CipherVector EmptyLike(const he::CipherVector& shape, int scale_bits) {
  he::CipherVector out;
  out.dim = shape.dim;
  out.block_len = shape.block_len;
  out.codec = shape.codec;
  out.scale_bits = scale_bits;
  out.key_id = shape.key_id;
  out.blocks.resize(shape.blocks.size());
  for (std::size_t b = 0; b < shape.blocks.size(); ++b) {
    out.blocks[b].reserve(shape.blocks[b].size());
  }
  return out;
}

}  // namespace

void ClientMeta::validate() const {
  if (!(loss >= 0.0) || !std::isfinite(loss)) {
    throw ValidationError("client " + client_id + ": loss must be finite and >= 0");
  }
  if (data_size < 1) {
    throw ValidationError("client " + client_id + ": data_size must be >= 1");
  }
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw ValidationError("client " + client_id + ": bandwidth must be > 0");
  }
}

he::CipherVector encrypted_aggregate(const he::PublicKey& pk,
                                     std::span<const he::CipherVector> updates,
                                     he::OpCounts* counts) {
  if (updates.empty()) throw ValidationError("aggregate: no updates");
  const auto& first = updates.front();
  for (const auto& u : updates) CheckCompatible(pk, first, u);

  he::CipherVector sum = first;
  std::uint64_t adds = 0;
  for (std::size_t k = 1; k < updates.size(); ++k) {
    for (std::size_t i = 0; i < first.dim; ++i) {
      sum.at(i) = he::ct_add(pk, sum.at(i), updates[k].at(i));
      ++adds;
    }
  }
  if (counts != nullptr) counts->add += adds;
  return sum;
}

GradientVector finalize_mean(const he::SecretKey& sk,
                             const he::CipherVector& summed, std::size_t k,
                             std::size_t workers, he::OpCounts* counts) {
  if (k == 0) throw ValidationError("finalize_mean: K must be >= 1");
  GradientVector out = he::decrypt_vector(sk, summed, workers, counts);
  for (auto& x : out) x /= static_cast<double>(k);
  return out;
}

double client_weight(const ClientMeta& meta, const WeightParams& params) {
  meta.validate();
  if (!std::isfinite(params.alpha) || params.alpha < 0) {
    throw ConfigError("weighting: alpha must be finite and >= 0");
  }
  const double denom = static_cast<double>(meta.data_size) *
                       std::pow(meta.bandwidth, params.alpha);
  switch (params.mode) {
    case WeightMode::kFormulaAsWritten:
      return meta.loss / denom;
    case WeightMode::kInverseLoss:
      return 1.0 / ((meta.loss + kInverseLossEpsilon) * denom);
  }
  return 0.0;
}

std::vector<double> client_weights(std::span<const ClientMeta> metas,
                                   const WeightParams& params,
                                   bool* fell_back_to_uniform) {
  std::vector<double> w;
  w.reserve(metas.size());
  double total = 0.0;
  for (const auto& m : metas) {
    w.push_back(client_weight(m, params));
    total += w.back();
  }
  const bool degenerate = !metas.empty() && total == 0.0;
  if (degenerate) std::fill(w.begin(), w.end(), 1.0);
  if (fell_back_to_uniform != nullptr) *fell_back_to_uniform = degenerate;
  return w;
}

GradientVector weighted_global_update(std::span<const WeightedUpdate> updates) {
  if (updates.empty()) throw ValidationError("weighted update: no updates");
  const std::size_t dim = updates.front().update.size();
  double total = 0.0;
  for (const auto& u : updates) {
    if (u.update.size() != dim) {
      throw DimensionError("weighted update: dimension mismatch");
    }
    if (!std::isfinite(u.weight) || u.weight < 0) {
      throw ValidationError("weighted update: weights must be finite and >= 0");
    }
    total += u.weight;
  }
  if (total <= 0.0) {
    throw DegenerateWeightsError("weighted update: weights sum to zero");
  }
  GradientVector out(dim, 0.0);
  for (const auto& u : updates) {
    for (std::size_t i = 0; i < dim; ++i) out[i] += u.weight * u.update[i];
  }
  for (auto& x : out) x /= total;
  return out;
}

std::int64_t quantize_mix_weight(double omega, int frac_bits) {
  if (!(omega >= 0.0 && omega <= 1.0)) {
    throw ValidationError("hybrid: mix weight outside [0, 1]");
  }
  return std::llround(std::ldexp(omega, frac_bits));
}

he::CipherVector encrypt_complement_term(const he::PublicKey& pk,
                                         std::span<const double> update,
                                         double mix_weight,
                                         const he::FixedPointCodec& codec,
                                         const he::BlockSpec& spec,
                                         const he::ParallelOptions& opts,
                                         he::OpCounts* counts) {
  quantize_mix_weight(mix_weight, codec.frac_bits);  // range check
  GradientVector scaled(update.begin(), update.end());
  for (auto& x : scaled) x *= (1.0 - mix_weight);
  return he::encrypt_vector_blocked(pk, scaled, codec, spec, opts, counts);
}

he::CipherVector hybrid_numerator(const he::PublicKey& pk,
                                  std::span<const HybridTerms> terms,
                                  he::OpCounts* counts) {
  if (terms.empty()) throw ValidationError("hybrid: no updates");
  for (const auto& t : terms) {
    if (t.full == nullptr || t.complement == nullptr) {
      throw ValidationError("hybrid: every client needs both terms");
    }
  }
  const he::CipherVector& shape = *terms.front().full;
  const int f = shape.codec.frac_bits;
  for (const auto& t : terms) {
    CheckCompatible(pk, shape, *t.full);
    CheckCompatible(pk, shape, *t.complement);
    if (t.full->scale_bits != f) {
      throw DimensionError("hybrid: terms must be fresh encodings at scale f");
    }
  }

  const he::BigInt lift = he::BigInt(1) << f;
  he::CipherVector sum = EmptyLike(shape, 2 * f);
  he::OpCounts local;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const auto& t = terms[k];
    const he::BigInt q(static_cast<long>(quantize_mix_weight(t.mix_weight, f)));
    for (std::size_t i = 0; i < shape.dim; ++i) {
      he::Ciphertext a = he::ct_scale(pk, t.full->at(i), q);
      he::Ciphertext b = he::ct_scale(pk, t.complement->at(i), lift);
      local.scale += 2;
      he::Ciphertext term = he::ct_add(pk, a, b);
      ++local.add;
      if (k == 0) {
        sum.blocks[i / sum.block_len].push_back(std::move(term));
      } else {
        sum.at(i) = he::ct_add(pk, sum.at(i), term);
        ++local.add;
      }
    }
  }
  if (counts != nullptr) *counts += local;
  return sum;
}

GradientVector finalize_hybrid(const he::SecretKey& sk,
                               const he::CipherVector& numerator, std::size_t k,
                               std::size_t workers, he::OpCounts* counts) {
  if (k == 0) throw ValidationError("hybrid: K must be >= 1");
  // Denominator: sum_k (omega_k + (1 - omega_k)) == K.
  const double denominator = static_cast<double>(k);
  GradientVector out = he::decrypt_vector(sk, numerator, workers, counts);
  for (auto& x : out) x /= denominator;
  return out;
}

GlobalModel hybrid_update(const he::SecretKey& sk,
                          std::span<const ClientUpdate> updates,
                          std::span<const double> mix_weights,
                          std::uint64_t nonce_seed, std::uint64_t round,
                          he::OpCounts* counts) {
  if (updates.empty()) throw ValidationError("hybrid: no updates");
  if (mix_weights.size() != updates.size()) {
    throw DimensionError("hybrid: one mix weight per update required");
  }
  const he::PublicKey& pk = sk.public_key;
  std::vector<he::CipherVector> complements;
  complements.reserve(updates.size());
  for (std::size_t k = 0; k < updates.size(); ++k) {
    const auto& u = updates[k];
    if (!u.cipher_update || !u.plain_update) {
      throw ValidationError("hybrid: client " + u.meta.client_id +
                            " must supply both cipher and plain updates");
    }
    if (u.plain_update->size() != u.cipher_update->dim) {
      throw DimensionError("hybrid: plain and cipher parts differ in dimension");
    }
    complements.push_back(encrypt_complement_term(
        pk, *u.plain_update, mix_weights[k], u.cipher_update->codec,
        u.cipher_update->spec(), {DeriveSeed(nonce_seed, {k}), 1}, counts));
  }
  std::vector<HybridTerms> terms;
  terms.reserve(updates.size());
  for (std::size_t k = 0; k < updates.size(); ++k) {
    terms.push_back({&*updates[k].cipher_update, &complements[k], mix_weights[k]});
  }
  he::CipherVector numerator = hybrid_numerator(pk, terms, counts);
  return GlobalModel{finalize_hybrid(sk, numerator, updates.size(), 1, counts),
                     round};
}

}  // namespace fedcloud
