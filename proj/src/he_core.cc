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
#include "fedcloud/he_core.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "fedcloud/error.h"
#include "fedcloud/seed.h"
#include "parallel.h"

namespace fedcloud::he {
namespace {

std::size_t BitLength(const BigInt& x) {
  return x == 0 ? 0 : mpz_sizeinbase(x.get_mpz_t(), 2);
}

int CeilLog2(std::size_t k) {
  int bits = 0;
  while ((std::size_t{1} << bits) < k) ++bits;
  return bits;
}

std::string ToHex(const BigInt& x) { return x.get_str(16); }

BigInt FromHex(const std::string& hex, const char* field) {
  BigInt out;
  if (hex.empty() || out.set_str(hex, 16) != 0 || out <= 0) {
    throw ValidationError(std::string("key document: field '") + field +
                          "' is not a positive hex integer");
  }
  return out;
}

KeyId ComputeKeyId(const BigInt& n) {
  // FNV-1a over the canonical hex form of the modulus.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : ToHex(n)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

BigInt RandomPrime(std::size_t bits, std::mt19937_64& rng) {
  BigInt top;
  mpz_ui_pow_ui(top.get_mpz_t(), 2, bits);
  for (;;) {
    BigInt x = random_below(top, rng);
    mpz_setbit(x.get_mpz_t(), bits - 1);
    mpz_setbit(x.get_mpz_t(), bits - 2);
    mpz_setbit(x.get_mpz_t(), 0);
    BigInt p;
    mpz_nextprime(p.get_mpz_t(), x.get_mpz_t());
    if (BitLength(p) == bits) return p;
  }
}

KeyPair AssembleKeyPair(const BigInt& p, const BigInt& q, int security_bits) {
  KeyPair kp;
  kp.security_bits = security_bits;
  PublicKey& pk = kp.public_key;
  pk.n = p * q;
  pk.n_squared = pk.n * pk.n;
  pk.key_id = ComputeKeyId(pk.n);
  pk.security_bits = security_bits;

  SecretKey& sk = kp.secret_key;
  sk.public_key = pk;
  sk.p = p;
  sk.q = q;
  BigInt pm1 = p - 1;
  BigInt qm1 = q - 1;
  mpz_lcm(sk.lambda.get_mpz_t(), pm1.get_mpz_t(), qm1.get_mpz_t());
  // With g = n + 1, L(g^lambda mod n^2) = lambda mod n.
  if (mpz_invert(sk.mu.get_mpz_t(), sk.lambda.get_mpz_t(), pk.n.get_mpz_t()) ==
      0) {
    throw ValidationError("key material: lambda is not invertible mod n");
  }
  return kp;
}

void CheckKey(const PublicKey& pk, const Ciphertext& ct) {
  if (ct.key_id != pk.key_id) {
    throw KeyMismatchError("ciphertext key_id does not match the key");
  }
}

void PutU16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

}  // namespace

std::size_t PublicKey::ciphertext_bytes() const {
  return (BitLength(n_squared) + 7) / 8;
}

void FixedPointCodec::validate() const {
  if (frac_bits < 0 || int_bits < 0 || frac_bits + int_bits > 62) {
    throw ConfigError(
        "codec: frac_bits and int_bits must be non-negative with "
        "frac_bits + int_bits <= 62");
  }
  if (!(clip_bound > 0) || !std::isfinite(clip_bound)) {
    throw ConfigError("codec: clip_bound must be positive and finite");
  }
  if (clip_bound > std::ldexp(1.0, int_bits)) {
    throw ConfigError("codec: clip_bound exceeds 2^int_bits");
  }
}

double FixedPointCodec::clip(double x) const {
  if (std::isnan(x)) throw ValidationError("codec: cannot encode NaN");
  return std::clamp(x, -clip_bound, clip_bound);
}

std::int64_t FixedPointCodec::to_fixed(double x) const {
  return std::llround(std::ldexp(clip(x), frac_bits));
}

BigInt FixedPointCodec::encode(double x, const BigInt& modulus) const {
  BigInt m(static_cast<long>(to_fixed(x)));
  if (2 * abs(m) >= modulus) {
    throw ConfigError("codec: value does not fit the plaintext space");
  }
  if (m < 0) m += modulus;
  return m;
}

double FixedPointCodec::decode(const BigInt& plaintext,
                               const BigInt& modulus) const {
  return signed_to_real(to_signed(plaintext, modulus), frac_bits);
}

BigInt to_signed(const BigInt& plaintext, const BigInt& modulus) {
  BigInt m = plaintext % modulus;
  if (m < 0) m += modulus;
  if (2 * m > modulus) m -= modulus;
  return m;
}

double signed_to_real(const BigInt& value, int scale_bits) {
  long exp = 0;
  double mant = mpz_get_d_2exp(&exp, value.get_mpz_t());
  return std::ldexp(mant, static_cast<int>(exp) - scale_bits);
}

int HeadroomRequirement::required_bits() const {
  return 2 * codec.frac_bits + codec.int_bits + CeilLog2(max_clients) + 1;
}

BigInt random_below(const BigInt& bound, std::mt19937_64& rng) {
  if (bound <= 0) throw ValidationError("random_below: bound must be positive");
  const std::size_t bits = BitLength(bound);
  const std::size_t words = (bits + 63) / 64;
  std::vector<std::uint64_t> buf(words);
  BigInt x;
  for (;;) {
    for (auto& w : buf) w = rng();
    mpz_import(x.get_mpz_t(), words, -1, sizeof(std::uint64_t), 0, 0,
               buf.data());
    mpz_fdiv_r_2exp(x.get_mpz_t(), x.get_mpz_t(), bits);
    if (x < bound) return x;
  }
}

KeyPair keygen(int security_bits, std::uint64_t seed,
               const std::optional<HeadroomRequirement>& headroom) {
  if (security_bits < kMinToyBits) {
    throw ConfigError("keygen: security_bits must be >= " +
                      std::to_string(kMinToyBits));
  }
  if (headroom) {
    headroom->codec.validate();
    const int need = headroom->required_bits();
    // The modulus lies in [2^(bits-1), 2^bits) and is odd.
    if (security_bits - 1 < need) {
      throw ConfigError(
          "keygen: plaintext space too small: security_bits=" +
          std::to_string(security_bits) + " cannot exceed 2^" +
          std::to_string(need) +
          " (2*frac_bits + int_bits + ceil(log2 max_clients) + 1)");
    }
  }
  std::mt19937_64 rng(DeriveSeed(seed, {kSeedKeygen,
                                        static_cast<std::uint64_t>(security_bits)}));
  const std::size_t p_bits = static_cast<std::size_t>(security_bits) / 2;
  const std::size_t q_bits = static_cast<std::size_t>(security_bits) - p_bits;
  for (;;) {
    BigInt p = RandomPrime(p_bits, rng);
    BigInt q = RandomPrime(q_bits, rng);
    if (p == q) continue;
    BigInt n = p * q;
    BigInt phi = (p - 1) * (q - 1);
    BigInt g;
    mpz_gcd(g.get_mpz_t(), n.get_mpz_t(), phi.get_mpz_t());
    if (g != 1) continue;
    if (BitLength(n) != static_cast<std::size_t>(security_bits)) continue;
    return AssembleKeyPair(p, q, security_bits);
  }
}

Ciphertext encrypt(const PublicKey& pk, const BigInt& m, std::mt19937_64& rng) {
  if (m < 0 || m >= pk.n) {
    throw ValidationError("encrypt: plaintext outside [0, n)");
  }
  BigInt r;
  BigInt g;
  do {
    r = random_below(pk.n, rng);
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t());
  } while (r == 0 || g != 1);
  BigInt rn;
  mpz_powm(rn.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t(),
           pk.n_squared.get_mpz_t());
  // (1 + n)^m = 1 + m*n (mod n^2)
  BigInt c = (1 + m * pk.n) * rn % pk.n_squared;
  return Ciphertext{std::move(c), pk.key_id};
}

BigInt decrypt(const SecretKey& sk, const Ciphertext& ct) {
  const PublicKey& pk = sk.public_key;
  CheckKey(pk, ct);
  if (ct.value <= 0 || ct.value >= pk.n_squared) {
    throw ValidationError("decrypt: ciphertext outside (0, n^2)");
  }
  BigInt u;
  mpz_powm(u.get_mpz_t(), ct.value.get_mpz_t(), sk.lambda.get_mpz_t(),
           pk.n_squared.get_mpz_t());
  BigInt l = (u - 1) / pk.n;
  BigInt m = l * sk.mu % pk.n;
  return m;
}

Ciphertext ct_add(const PublicKey& pk, const Ciphertext& a,
                  const Ciphertext& b) {
  CheckKey(pk, a);
  CheckKey(pk, b);
  return Ciphertext{BigInt(a.value * b.value % pk.n_squared), pk.key_id};
}

Ciphertext ct_scale(const PublicKey& pk, const Ciphertext& ct,
                    const BigInt& k) {
  CheckKey(pk, ct);
  if (k < 0 || k >= pk.n) {
    throw ValidationError("ct_scale: scalar outside [0, n)");
  }
  BigInt out;
  mpz_powm(out.get_mpz_t(), ct.value.get_mpz_t(), k.get_mpz_t(),
           pk.n_squared.get_mpz_t());
  return Ciphertext{std::move(out), pk.key_id};
}

BlockSpec BlockSpec::for_dim(std::size_t dim, std::size_t n_blocks) {
  if (n_blocks == 0) throw ConfigError("block spec: n_blocks must be >= 1");
  std::size_t len = (dim + n_blocks - 1) / n_blocks;
  return BlockSpec{n_blocks, std::max<std::size_t>(len, 1)};
}

void BlockSpec::validate(std::size_t dim) const {
  if (n_blocks == 0 || block_len == 0) {
    throw DimensionError("block spec: n_blocks and block_len must be >= 1");
  }
  if (n_blocks * block_len < dim) {
    throw DimensionError("block spec: " + std::to_string(n_blocks) + " x " +
                         std::to_string(block_len) + " does not cover dim " +
                         std::to_string(dim));
  }
}

std::size_t BlockSpec::begin(std::size_t i, std::size_t dim) const {
  return std::min(i * block_len, dim);
}

std::size_t BlockSpec::end(std::size_t i, std::size_t dim) const {
  return std::min((i + 1) * block_len, dim);
}

const Ciphertext& CipherVector::at(std::size_t coord) const {
  return blocks.at(coord / block_len).at(coord % block_len);
}

Ciphertext& CipherVector::at(std::size_t coord) {
  return blocks.at(coord / block_len).at(coord % block_len);
}

BlockSpec CipherVector::spec() const {
  return BlockSpec{blocks.size(), block_len};
}

CipherVector encrypt_fixed_blocked(const PublicKey& pk,
                                   std::span<const std::int64_t> fixed,
                                   const FixedPointCodec& codec, int scale_bits,
                                   const BlockSpec& spec,
                                   const ParallelOptions& opts,
                                   OpCounts* counts) {
  const std::size_t dim = fixed.size();
  if (dim == 0) throw DimensionError("encrypt: empty vector");
  if (dim > std::numeric_limits<std::uint32_t>::max()) {
    throw DimensionError("encrypt: dimension exceeds u32");
  }
  spec.validate(dim);

  CipherVector cv;
  cv.dim = dim;
  cv.block_len = spec.block_len;
  cv.codec = codec;
  cv.scale_bits = scale_bits;
  cv.key_id = pk.key_id;
  cv.blocks.resize(spec.n_blocks);
  std::vector<std::uint64_t> per_block(spec.n_blocks, 0);

  internal::ParallelFor(spec.n_blocks, opts.workers, [&](std::size_t b) {
    std::mt19937_64 rng(DeriveSeed(opts.nonce_seed, {b}));
    auto& block = cv.blocks[b];
    const std::size_t lo = spec.begin(b, dim);
    const std::size_t hi = spec.end(b, dim);
    block.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
      BigInt m(static_cast<long>(fixed[i]));
      if (2 * abs(m) >= pk.n) {
        throw ConfigError("codec: value does not fit the plaintext space");
      }
      if (m < 0) m += pk.n;
      block.push_back(encrypt(pk, m, rng));
      ++per_block[b];
    }
  });
  if (counts != nullptr) {
    for (auto c : per_block) counts->encrypt += c;
  }
  return cv;
}

CipherVector encrypt_vector_blocked(const PublicKey& pk,
                                    std::span<const double> v,
                                    const FixedPointCodec& codec,
                                    const BlockSpec& spec,
                                    const ParallelOptions& opts,
                                    OpCounts* counts) {
  codec.validate();
  std::vector<std::int64_t> fixed(v.size());
  std::transform(v.begin(), v.end(), fixed.begin(),
                 [&](double x) { return codec.to_fixed(x); });
  return encrypt_fixed_blocked(pk, fixed, codec, codec.frac_bits, spec, opts,
                               counts);
}

std::vector<BigInt> decrypt_vector_signed(const SecretKey& sk,
                                          const CipherVector& cv,
                                          std::size_t workers,
                                          OpCounts* counts) {
  const PublicKey& pk = sk.public_key;
  if (cv.key_id != pk.key_id) {
    throw KeyMismatchError("decrypt_vector: vector was encrypted under another key");
  }
  std::vector<BigInt> out(cv.dim);
  std::vector<std::uint64_t> per_block(cv.blocks.size(), 0);
  internal::ParallelFor(cv.blocks.size(), workers, [&](std::size_t b) {
    const std::size_t lo = b * cv.block_len;
    const auto& block = cv.blocks[b];
    for (std::size_t j = 0; j < block.size(); ++j) {
      out[lo + j] = to_signed(decrypt(sk, block[j]), pk.n);
      ++per_block[b];
    }
  });
  if (counts != nullptr) {
    for (auto c : per_block) counts->decrypt += c;
  }
  return out;
}

GradientVector decrypt_vector(const SecretKey& sk, const CipherVector& cv,
                              std::size_t workers, OpCounts* counts) {
  auto ints = decrypt_vector_signed(sk, cv, workers, counts);
  GradientVector out(ints.size());
  for (std::size_t i = 0; i < ints.size(); ++i) {
    out[i] = signed_to_real(ints[i], cv.scale_bits);
  }
  return out;
}

std::size_t cipher_vector_wire_size(const PublicKey& pk, std::size_t dim) {
  return 4 + 1 + dim * (2 + pk.ciphertext_bytes());
}

std::vector<std::uint8_t> serialize_cipher_vector(const PublicKey& pk,
                                                  const CipherVector& cv) {
  if (cv.key_id != pk.key_id) {
    throw KeyMismatchError("serialize: vector was encrypted under another key");
  }
  if (cv.scale_bits < 0 || cv.scale_bits > 255) {
    throw DimensionError("serialize: scale_bits does not fit u8");
  }
  const std::size_t width = pk.ciphertext_bytes();
  if (width > std::numeric_limits<std::uint16_t>::max()) {
    throw ConfigError("serialize: ciphertext wider than a u16 length prefix");
  }
  std::vector<std::uint8_t> out;
  out.reserve(cipher_vector_wire_size(pk, cv.dim));
  PutU32(out, static_cast<std::uint32_t>(cv.dim));
  out.push_back(static_cast<std::uint8_t>(cv.scale_bits));
  std::vector<std::uint8_t> buf(width);
  for (const auto& block : cv.blocks) {
    for (const auto& ct : block) {
      std::size_t count = 0;
      std::fill(buf.begin(), buf.end(), 0);
      const std::size_t used = (BitLength(ct.value) + 7) / 8;
      mpz_export(buf.data() + (width - used), &count, 1, 1, 1, 0,
                 ct.value.get_mpz_t());
      PutU16(out, static_cast<std::uint16_t>(width));
      out.insert(out.end(), buf.begin(), buf.end());
    }
  }
  return out;
}

CipherVector deserialize_cipher_vector(const PublicKey& pk,
                                       std::span<const std::uint8_t> bytes,
                                       const FixedPointCodec& codec,
                                       const BlockSpec& spec) {
  if (bytes.size() < 5) throw ParseError("cipher vector: truncated header", 0);
  std::size_t pos = 0;
  std::uint32_t dim = 0;
  for (int i = 0; i < 4; ++i) dim = (dim << 8) | bytes[pos++];
  const int scale_bits = bytes[pos++];
  spec.validate(dim);

  CipherVector cv;
  cv.dim = dim;
  cv.block_len = spec.block_len;
  cv.codec = codec;
  cv.scale_bits = scale_bits;
  cv.key_id = pk.key_id;
  cv.blocks.resize(spec.n_blocks);
  for (std::size_t i = 0; i < dim; ++i) {
    if (pos + 2 > bytes.size()) {
      throw ParseError("cipher vector: truncated length prefix", 0);
    }
    const std::size_t len = (std::size_t{bytes[pos]} << 8) | bytes[pos + 1];
    pos += 2;
    if (pos + len > bytes.size()) {
      throw ParseError("cipher vector: truncated ciphertext", 0);
    }
    BigInt value;
    mpz_import(value.get_mpz_t(), len, 1, 1, 1, 0, bytes.data() + pos);
    pos += len;
    if (value <= 0 || value >= pk.n_squared) {
      throw ValidationError("cipher vector: ciphertext outside (0, n^2)");
    }
    cv.blocks[i / spec.block_len].push_back(Ciphertext{value, pk.key_id});
  }
  if (pos != bytes.size()) {
    throw ParseError("cipher vector: trailing bytes", 0);
  }
  return cv;
}

std::string key_fingerprint(const PublicKey& pk) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(pk.key_id));
  return buf;
}

nlohmann::json public_key_to_json(const PublicKey& pk) {
  return nlohmann::json{
      {"version", kKeyFormatVersion},
      {"kind", "paillier-public"},
      {"security_bits", pk.security_bits},
      {"modulus_hex", ToHex(pk.n)},
      {"key_id", key_fingerprint(pk)},
      {"non_cryptographic_strength", pk.security_bits < kMinSecureBits},
  };
}

nlohmann::json secret_key_to_json(const SecretKey& sk) {
  auto doc = public_key_to_json(sk.public_key);
  doc["kind"] = "paillier-secret";
  doc["p_hex"] = ToHex(sk.p);
  doc["q_hex"] = ToHex(sk.q);
  return doc;
}

namespace {

void CheckHeader(const nlohmann::json& doc, const char* kind) {
  if (!doc.is_object()) throw ValidationError("key document: not an object");
  if (!doc.contains("version") || doc["version"] != kKeyFormatVersion) {
    throw ValidationError("key document: unsupported 'version'");
  }
  if (!doc.contains("kind") || doc["kind"] != kind) {
    throw ValidationError(std::string("key document: 'kind' must be ") + kind);
  }
}

template <typename T>
T Field(const nlohmann::json& doc, const char* name) {
  if (!doc.contains(name)) {
    throw ValidationError(std::string("key document: missing '") + name + "'");
  }
  try {
    return doc.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(std::string("key document: bad type for '") + name +
                          "'");
  }
}

}  // namespace

PublicKey public_key_from_json(const nlohmann::json& doc) {
  CheckHeader(doc, "paillier-public");
  PublicKey pk;
  pk.n = FromHex(Field<std::string>(doc, "modulus_hex"), "modulus_hex");
  pk.n_squared = pk.n * pk.n;
  pk.key_id = ComputeKeyId(pk.n);
  pk.security_bits = Field<int>(doc, "security_bits");
  if (BitLength(pk.n) != static_cast<std::size_t>(pk.security_bits)) {
    throw ValidationError("key document: modulus size disagrees with security_bits");
  }
  if (Field<std::string>(doc, "key_id") != key_fingerprint(pk)) {
    throw ValidationError("key document: key_id does not match modulus");
  }
  return pk;
}

SecretKey secret_key_from_json(const nlohmann::json& doc) {
  CheckHeader(doc, "paillier-secret");
  BigInt p = FromHex(Field<std::string>(doc, "p_hex"), "p_hex");
  BigInt q = FromHex(Field<std::string>(doc, "q_hex"), "q_hex");
  BigInt n = FromHex(Field<std::string>(doc, "modulus_hex"), "modulus_hex");
  if (p * q != n) throw ValidationError("key document: p * q != modulus");
  KeyPair kp = AssembleKeyPair(p, q, Field<int>(doc, "security_bits"));
  if (Field<std::string>(doc, "key_id") != key_fingerprint(kp.public_key)) {
    throw ValidationError("key document: key_id does not match modulus");
  }
  return kp.secret_key;
}

}  // namespace fedcloud::he
