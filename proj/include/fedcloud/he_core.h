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
#ifndef FEDCLOUD_HE_CORE_H_
#define FEDCLOUD_HE_CORE_H_

// Paillier cryptosystem over Z_n with g = n + 1, a signed fixed-point codec
// for real-valued gradients, and block-partitioned vector encryption.
//
// Plaintexts are integers in [0, n). Negative reals are stored as n - |v|
// and decoded by treating anything above n / 2 as negative.

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace fedcloud {

using GradientVector = std::vector<double>;

namespace he {

using BigInt = mpz_class;
using KeyId = std::uint64_t;

// Key sizes below this are accepted but flagged in every serialized
// artifact as not cryptographically meaningful.
inline constexpr int kMinSecureBits = 2048;
inline constexpr int kMinToyBits = 16;
inline constexpr int kKeyFormatVersion = 1;

struct PublicKey {
  BigInt n;
  BigInt n_squared;
  KeyId key_id = 0;
  int security_bits = 0;

  // Fixed width of one serialized ciphertext (bytes of n^2).
  std::size_t ciphertext_bytes() const;
};

struct SecretKey {
  PublicKey public_key;
  BigInt p;
  BigInt q;
  BigInt lambda;  // lcm(p - 1, q - 1)
  BigInt mu;      // lambda^-1 mod n
};

struct KeyPair {
  PublicKey public_key;
  SecretKey secret_key;
  int security_bits = 0;

  bool toy_strength() const { return security_bits < kMinSecureBits; }
};

struct Ciphertext {
  BigInt value;
  KeyId key_id = 0;
};

// Tallies of primitive cipher operations. Kept per call site and merged by
// the caller so counts are exact under any worker count.
struct OpCounts {
  std::uint64_t encrypt = 0;
  std::uint64_t decrypt = 0;
  std::uint64_t add = 0;
  std::uint64_t scale = 0;

  std::uint64_t homomorphic() const { return add + scale; }
  OpCounts& operator+=(const OpCounts& o) {
    encrypt += o.encrypt;
    decrypt += o.decrypt;
    add += o.add;
    scale += o.scale;
    return *this;
  }
  friend bool operator==(const OpCounts&, const OpCounts&) = default;
};

struct FixedPointCodec {
  int frac_bits = 16;
  int int_bits = 4;
  double clip_bound = 8.0;

  // Throws ConfigError on out-of-range parameters.
  void validate() const;

  double clip(double x) const;
  // round(clip(x) * 2^frac_bits) as a signed integer.
  std::int64_t to_fixed(double x) const;
  // Plaintext in [0, modulus); negatives wrap.
  BigInt encode(double x, const BigInt& modulus) const;
  double decode(const BigInt& plaintext, const BigInt& modulus) const;
};

// Maps a plaintext in [0, modulus) to the signed representative in
// (-modulus/2, modulus/2].
BigInt to_signed(const BigInt& plaintext, const BigInt& modulus);
// Signed integer -> real, dividing by 2^scale_bits.
double signed_to_real(const BigInt& value, int scale_bits);

// Plaintext space must exceed 2^(2f + int_bits + ceil(log2 K) + 1) so that
// weighted sums of K encodings never wrap.
struct HeadroomRequirement {
  FixedPointCodec codec;
  std::size_t max_clients = 1;

  int required_bits() const;  // the exponent above
};

// Generates a key pair whose modulus has exactly `security_bits` bits.
// Deterministic for a given seed. Throws ConfigError when the size is below
// the toy floor or cannot satisfy `headroom`.
KeyPair keygen(int security_bits, std::uint64_t seed,
               const std::optional<HeadroomRequirement>& headroom = {});

// Uniform integer in [0, bound).
BigInt random_below(const BigInt& bound, std::mt19937_64& rng);

Ciphertext encrypt(const PublicKey& pk, const BigInt& m, std::mt19937_64& rng);
BigInt decrypt(const SecretKey& sk, const Ciphertext& ct);

Ciphertext ct_add(const PublicKey& pk, const Ciphertext& a,
                  const Ciphertext& b);
Ciphertext ct_scale(const PublicKey& pk, const Ciphertext& ct,
                    const BigInt& k);

struct BlockSpec {
  std::size_t n_blocks = 1;
  std::size_t block_len = 0;

  // Smallest block_len covering `dim` with `n_blocks` blocks.
  static BlockSpec for_dim(std::size_t dim, std::size_t n_blocks);
  void validate(std::size_t dim) const;
  // Coordinate range [begin, end) of block i, clamped to dim.
  std::size_t begin(std::size_t i, std::size_t dim) const;
  std::size_t end(std::size_t i, std::size_t dim) const;
};

struct CipherVector {
  std::vector<std::vector<Ciphertext>> blocks;
  std::size_t dim = 0;
  std::size_t block_len = 0;
  FixedPointCodec codec;
  // Fixed-point scale of the underlying plaintexts. Equals codec.frac_bits
  // for fresh encryptions; products with encoded scalars carry more.
  int scale_bits = 0;
  KeyId key_id = 0;

  const Ciphertext& at(std::size_t coord) const;
  Ciphertext& at(std::size_t coord);
  BlockSpec spec() const;
};

struct ParallelOptions {
  // Seed for the per-block randomness streams. Callers draw a fresh one for
  // every vector they encrypt.
  std::uint64_t nonce_seed = 0;
  std::size_t workers = 1;
};

CipherVector encrypt_vector_blocked(const PublicKey& pk,
                                    std::span<const double> v,
                                    const FixedPointCodec& codec,
                                    const BlockSpec& spec,
                                    const ParallelOptions& opts,
                                    OpCounts* counts = nullptr);

// Encrypts already-encoded signed integers (scale given by scale_bits).
CipherVector encrypt_fixed_blocked(const PublicKey& pk,
                                   std::span<const std::int64_t> fixed,
                                   const FixedPointCodec& codec,
                                   int scale_bits, const BlockSpec& spec,
                                   const ParallelOptions& opts,
                                   OpCounts* counts = nullptr);

// Signed plaintext integers, one per coordinate.
std::vector<BigInt> decrypt_vector_signed(const SecretKey& sk,
                                          const CipherVector& cv,
                                          std::size_t workers = 1,
                                          OpCounts* counts = nullptr);

GradientVector decrypt_vector(const SecretKey& sk, const CipherVector& cv,
                              std::size_t workers = 1,
                              OpCounts* counts = nullptr);

// Wire layout (big-endian): dim u32, scale_bits u8, then per coordinate a
// u16 byte length followed by the ciphertext, zero-padded on the left to
// pk.ciphertext_bytes().
std::vector<std::uint8_t> serialize_cipher_vector(const PublicKey& pk,
                                                  const CipherVector& cv);
std::size_t cipher_vector_wire_size(const PublicKey& pk, std::size_t dim);
CipherVector deserialize_cipher_vector(const PublicKey& pk,
                                       std::span<const std::uint8_t> bytes,
                                       const FixedPointCodec& codec,
                                       const BlockSpec& spec);

std::string key_fingerprint(const PublicKey& pk);

nlohmann::json public_key_to_json(const PublicKey& pk);
nlohmann::json secret_key_to_json(const SecretKey& sk);
PublicKey public_key_from_json(const nlohmann::json& doc);
SecretKey secret_key_from_json(const nlohmann::json& doc);

}  // namespace he
}  // namespace fedcloud

#endif  // FEDCLOUD_HE_CORE_H_
