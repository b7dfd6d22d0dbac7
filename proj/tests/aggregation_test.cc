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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fedcloud/error.h"

namespace fedcloud {
namespace {

constexpr double kTol = 1.0 / 65536.0;

class EncryptedMeanTest : public ::testing::Test {
 protected:
  he::KeyPair kp = he::keygen(64, 21);
  he::FixedPointCodec codec;

  he::CipherVector Enc(const GradientVector& v, std::uint64_t nonce) {
    return he::encrypt_vector_blocked(kp.public_key, v, codec,
                                      he::BlockSpec::for_dim(v.size(), 2), {nonce, 1});
  }
};

TEST_F(EncryptedMeanTest, TwoPointMean) {
  std::vector<he::CipherVector> cvs{Enc({1.0}, 1), Enc({3.0}, 2)};
  const auto sum = encrypted_aggregate(kp.public_key, cvs);
  const auto mean = finalize_mean(kp.secret_key, sum, 2);
  ASSERT_EQ(mean.size(), 1u);
  EXPECT_NEAR(mean[0], 2.0, kTol);
}

TEST_F(EncryptedMeanTest, SingleClientIdentity) {
  std::vector<he::CipherVector> cvs{Enc({0.5, -1.25}, 1)};
  const auto mean = finalize_mean(kp.secret_key, encrypted_aggregate(kp.public_key, cvs), 1);
  EXPECT_NEAR(mean[0], 0.5, kTol);
  EXPECT_NEAR(mean[1], -1.25, kTol);
}

TEST_F(EncryptedMeanTest, MatchesPlainMean) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<GradientVector> vs(3, GradientVector(2));
  std::vector<he::CipherVector> cvs;
  for (std::size_t k = 0; k < 3; ++k) {
    for (auto& x : vs[k]) x = u(rng);
    cvs.push_back(Enc(vs[k], 10 + k));
  }
  he::OpCounts ops;
  const auto mean = finalize_mean(kp.secret_key, encrypted_aggregate(kp.public_key, cvs, &ops), 3,
                                  1, &ops);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(mean[i], (vs[0][i] + vs[1][i] + vs[2][i]) / 3.0, kTol);
  }
  EXPECT_EQ(ops.add, 2u * 2u);
  EXPECT_EQ(ops.decrypt, 2u);
}

TEST_F(EncryptedMeanTest, Errors) {
  std::vector<he::CipherVector> none;
  EXPECT_ANY_THROW(encrypted_aggregate(kp.public_key, none));
  std::vector<he::CipherVector> mixed{Enc({1.0}, 1), Enc({1.0, 2.0}, 2)};
  EXPECT_THROW(encrypted_aggregate(kp.public_key, mixed), DimensionError);
  const he::KeyPair other = he::keygen(64, 22);
  std::vector<he::CipherVector> keys{
      Enc({1.0}, 1), he::encrypt_vector_blocked(other.public_key, GradientVector{1.0}, codec,
                                                he::BlockSpec::for_dim(1, 1), {1, 1})};
  EXPECT_THROW(encrypted_aggregate(kp.public_key, keys), KeyMismatchError);
}

TEST(ClientWeightTest, Examples) {
  const ClientMeta m{"a", 2.0, 100, 4.0};
  EXPECT_DOUBLE_EQ(client_weight(m, {0.5, WeightMode::kFormulaAsWritten}), 0.01);
  EXPECT_DOUBLE_EQ(client_weight(m, {0.0, WeightMode::kFormulaAsWritten}), 0.02);
  const ClientMeta twin = m;
  EXPECT_EQ(client_weight(m, {}), client_weight(twin, {}));
  EXPECT_DOUBLE_EQ(client_weight(m, {0.5, WeightMode::kInverseLoss}),
                   1.0 / ((2.0 + kInverseLossEpsilon) * 200.0));
}

TEST(ClientWeightTest, Monotonicity) {
  const WeightParams p{0.5, WeightMode::kFormulaAsWritten};
  const ClientMeta base{"a", 1.0, 10, 4.0};
  ClientMeta more_loss = base, more_data = base, more_bw = base;
  more_loss.loss = 1.5;
  more_data.data_size = 11;
  more_bw.bandwidth = 5.0;
  EXPECT_GT(client_weight(more_loss, p), client_weight(base, p));
  EXPECT_LT(client_weight(more_data, p), client_weight(base, p));
  EXPECT_LT(client_weight(more_bw, p), client_weight(base, p));
}

TEST(ClientWeightTest, InvalidMeta) {
  EXPECT_ANY_THROW(client_weight({"a", -1.0, 1, 1.0}, {}));
  EXPECT_ANY_THROW(client_weight({"a", 1.0, 0, 1.0}, {}));
  EXPECT_ANY_THROW(client_weight({"a", 1.0, 1, 0.0}, {}));
}

TEST(ClientWeightTest, AllZeroLossFallsBackToUniform) {
  std::vector<ClientMeta> metas{{"a", 0.0, 5, 1.0}, {"b", 0.0, 7, 2.0}};
  bool fell_back = false;
  const auto w = client_weights(metas, {}, &fell_back);
  EXPECT_TRUE(fell_back);
  EXPECT_EQ(w, (std::vector<double>{1.0, 1.0}));
}

TEST(WeightedUpdateTest, Examples) {
  const GradientVector zero{0.0}, two{2.0}, four{4.0};
  std::vector<WeightedUpdate> a{{1.0, zero}, {1.0, two}};
  EXPECT_EQ(weighted_global_update(a), GradientVector{1.0});
  std::vector<WeightedUpdate> b{{1.0, zero}, {3.0, four}};
  EXPECT_EQ(weighted_global_update(b), GradientVector{3.0});
  std::vector<WeightedUpdate> c{{0.3, four}};
  EXPECT_EQ(weighted_global_update(c), four);
  std::vector<WeightedUpdate> z{{0.0, zero}, {0.0, four}};
  EXPECT_THROW(weighted_global_update(z), DegenerateWeightsError);
}

TEST(WeightedUpdateTest, ScaleInvarianceAndConvexity) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-5.0, 5.0), w(0.01, 3.0), c(0.1, 100.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<GradientVector> vs(4, GradientVector(3));
    std::vector<WeightedUpdate> ws, scaled;
    const double s = c(rng);
    for (auto& v : vs) {
      for (auto& x : v) x = u(rng);
      const double wt = w(rng);
      ws.push_back({wt, v});
      scaled.push_back({wt * s, v});
    }
    const auto a = weighted_global_update(ws);
    const auto b = weighted_global_update(scaled);
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_NEAR(a[i], b[i], 1e-12);
      double lo = vs[0][i], hi = vs[0][i];
      for (const auto& v : vs) {
        lo = std::min(lo, v[i]);
        hi = std::max(hi, v[i]);
      }
      EXPECT_GE(a[i], lo - 1e-12);
      EXPECT_LE(a[i], hi + 1e-12);
    }
  }
}

class HybridTest : public EncryptedMeanTest {
 protected:
  std::vector<ClientUpdate> Updates(const std::vector<GradientVector>& vs) {
    std::vector<ClientUpdate> out;
    for (std::size_t k = 0; k < vs.size(); ++k) {
      ClientUpdate u;
      u.meta = {"c" + std::to_string(k), 1.0, 1, 1.0};
      u.plain_update = vs[k];
      u.cipher_update = Enc(vs[k], 100 + k);
      out.push_back(std::move(u));
    }
    return out;
  }
};

TEST_F(HybridTest, BoundariesAndGeneralWeights) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0), om(0.0, 1.0);
  std::vector<GradientVector> vs(3, GradientVector(2));
  for (auto& v : vs) for (auto& x : v) x = u(rng);
  const auto updates = Updates(vs);
  std::vector<he::CipherVector> cvs;
  for (const auto& up : updates) cvs.push_back(*up.cipher_update);
  const auto eq3 = finalize_mean(kp.secret_key, encrypted_aggregate(kp.public_key, cvs), 3);

  const std::vector<double> ones(3, 1.0), zeros(3, 0.0);
  const std::vector<double> mixed{om(rng), om(rng), om(rng)};
  const auto at_one = hybrid_update(kp.secret_key, updates, ones, 5).weights;
  const auto at_zero = hybrid_update(kp.secret_key, updates, zeros, 5).weights;
  const auto general = hybrid_update(kp.secret_key, updates, mixed, 5).weights;
  for (std::size_t i = 0; i < 2; ++i) {
    const double plain = (vs[0][i] + vs[1][i] + vs[2][i]) / 3.0;
    EXPECT_NEAR(at_one[i], eq3[i], 2 * kTol);
    EXPECT_NEAR(at_zero[i], plain, 2 * kTol);
    EXPECT_NEAR(general[i], plain, 2 * kTol);
  }
}

TEST_F(HybridTest, OpCountsMatchHandTrace) {
  const std::size_t k = 3, d = 4;
  std::vector<GradientVector> vs(k, GradientVector(d, 0.5));
  const auto updates = Updates(vs);
  std::vector<he::CipherVector> complements;
  for (std::size_t i = 0; i < k; ++i) {
    complements.push_back(encrypt_complement_term(kp.public_key, vs[i], 0.5, codec,
                                                  updates[i].cipher_update->spec(), {i, 1}));
  }
  std::vector<HybridTerms> terms;
  for (std::size_t i = 0; i < k; ++i) terms.push_back({&*updates[i].cipher_update, &complements[i], 0.5});
  he::OpCounts ops;
  hybrid_numerator(kp.public_key, terms, &ops);
  EXPECT_EQ(ops.scale, 2 * k * d);
  EXPECT_EQ(ops.add, (2 * k - 1) * d);
  EXPECT_EQ(ops.encrypt, 0u);
}

TEST_F(HybridTest, Errors) {
  auto updates = Updates({{1.0}, {2.0}});
  EXPECT_THROW(hybrid_update(kp.secret_key, updates, std::vector<double>{1.5, 0.0}, 1),
               ValidationError);
  EXPECT_THROW(hybrid_update(kp.secret_key, updates, std::vector<double>{0.5}, 1), DimensionError);
  updates[1].plain_update.reset();
  EXPECT_THROW(hybrid_update(kp.secret_key, updates, std::vector<double>{0.5, 0.5}, 1),
               ValidationError);
  EXPECT_EQ(quantize_mix_weight(0.5, 16), 32768);
}

}  // namespace
}  // namespace fedcloud
