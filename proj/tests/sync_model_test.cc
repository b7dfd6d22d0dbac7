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
#include "fedcloud/sync_model.h"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fedcloud/error.h"

namespace fedcloud {
namespace {

CloudPlatform Plat(std::string id, double latency, double bw, double payload = 0.0,
                   double load = 0.0) {
  return {std::move(id), latency, bw, payload, load};
}

TEST(TotalDelayTest, Examples) {
  const std::vector<CloudPlatform> one{Plat("a", 2.0, 10.0, 100.0)};
  EXPECT_EQ(total_delay(one), 12.0);
  const std::vector<CloudPlatform> two{one[0], one[0]};
  EXPECT_EQ(total_delay(two), 24.0);
  const std::vector<CloudPlatform> zero{Plat("a", 2.0, 10.0), Plat("b", 3.5, 1.0)};
  EXPECT_EQ(total_delay(zero), 5.5);
  EXPECT_THROW(total_delay({}), ValidationError);
}

TEST(TotalDelayTest, DecreasingInBandwidth) {
  std::vector<CloudPlatform> p{Plat("a", 1.0, 10.0, 50.0)};
  const double before = total_delay(p);
  p[0].bandwidth_MBps = 11.0;
  EXPECT_LT(total_delay(p), before);
}

TEST(WeightedDelayTest, Examples) {
  const std::vector<CloudPlatform> p{Plat("a", 2.0, 1.0), Plat("b", 4.0, 1.0)};
  EXPECT_EQ(weighted_sync_delay(p, {{"a", "b"}, {0.5, 0.5}}), 3.0);
  EXPECT_EQ(weighted_sync_delay(p, {{"a", "b"}, {0.0, 1.0}}), 4.0);
  const std::vector<CloudPlatform> single{Plat("a", 2.5, 1.0)};
  EXPECT_EQ(weighted_sync_delay(single, {{"a"}, {1.0}}), 2.5);
  EXPECT_THROW(weighted_sync_delay(p, {{"a"}, {1.0}}), DimensionError);
}

TEST(WeightedDelayTest, RandomizedProperties) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> lat(0.0, 10.0), bw(0.1, 100.0), pay(0.0, 500.0);
  std::uniform_int_distribution<int> count(1, 6);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<CloudPlatform> a, b;
    for (int i = count(rng); i > 0; --i) a.push_back(Plat("a" + std::to_string(i), lat(rng), bw(rng), pay(rng)));
    for (int i = count(rng); i > 0; --i) b.push_back(Plat("b" + std::to_string(i), lat(rng), bw(rng), pay(rng)));
    std::vector<CloudPlatform> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    EXPECT_NEAR(total_delay(ab), total_delay(a) + total_delay(b), 1e-9);

    std::vector<NetworkSample> samples;
    for (const auto& p : ab) samples.push_back({0.0, p.platform_id, lat(rng) + 0.1, bw(rng), 0.0});
    const SyncWeights w = derive_sync_weights(samples, ab);
    double sum = 0.0, lo = 1e300, hi = -1e300;
    for (double x : w.weights) sum += x;
    for (const auto& p : ab) {
      lo = std::min(lo, p.sync_latency_s);
      hi = std::max(hi, p.sync_latency_s);
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    const double d = weighted_sync_delay(ab, w);
    EXPECT_GE(d, lo - 1e-12);
    EXPECT_LE(d, hi + 1e-12);
  }
}

TEST(SyncWeightsTest, Examples) {
  const std::vector<CloudPlatform> p{Plat("a", 1.0, 1.0), Plat("b", 1.0, 1.0)};
  std::vector<NetworkSample> same{{0, "a", 20, 50, 1}, {0, "b", 20, 50, 1}};
  EXPECT_EQ(derive_sync_weights(same, p).weights, (std::vector<double>{0.5, 0.5}));
  std::vector<NetworkSample> dbl{{0, "a", 20, 100, 1}, {0, "b", 20, 50, 1}};
  const auto w = derive_sync_weights(dbl, p).weights;
  EXPECT_NEAR(w[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(w[1], 1.0 / 3.0, 1e-15);
  const std::vector<CloudPlatform> single{Plat("a", 1.0, 1.0)};
  EXPECT_EQ(derive_sync_weights(same, single).weights, std::vector<double>{1.0});
}

TEST(SyncWeightsTest, PermutationEquivariant) {
  const std::vector<CloudPlatform> p{Plat("a", 1, 1), Plat("b", 1, 1, 0, 0.5), Plat("c", 1, 1)};
  const std::vector<CloudPlatform> q{p[2], p[0], p[1]};
  std::vector<NetworkSample> s{{0, "a", 10, 30, 0}, {0, "b", 5, 20, 0}, {0, "c", 40, 90, 0}};
  const auto wp = derive_sync_weights(s, p).weights;
  const auto wq = derive_sync_weights(s, q).weights;
  EXPECT_DOUBLE_EQ(wp[0], wq[1]);
  EXPECT_DOUBLE_EQ(wp[1], wq[2]);
  EXPECT_DOUBLE_EQ(wp[2], wq[0]);
}

TEST(SyncWeightsTest, StalenessListsOffenders) {
  const std::vector<CloudPlatform> p{Plat("a", 1, 1), Plat("b", 1, 1), Plat("c", 1, 1)};
  std::vector<NetworkSample> s{{0, "a", 10, 30, 0}, {100, "b", 10, 30, 0}};
  SyncPolicy policy;
  policy.staleness_window_s = 10;
  try {
    derive_sync_weights(s, p, policy);
    FAIL() << "expected StalenessError";
  } catch (const StalenessError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("a"), std::string::npos);
    EXPECT_NE(msg.find("c"), std::string::npos);
    EXPECT_EQ(msg.find("b,"), std::string::npos);
  }
}

TEST(TraceTest, WellFormed) {
  std::istringstream in(
      "timestamp_s,platform_id,latency_ms,bandwidth_MBps,jitter_ms\n"
      "0,aws,20,100,1\n"
      "0,gcp,40,50,2\n"
      "1,aws,22,90,1\n");
  EXPECT_EQ(parse_trace(in).size(), 3u);
}

TEST(TraceTest, NegativeBandwidthNamesLine) {
  std::istringstream in(
      "timestamp_s,platform_id,latency_ms,bandwidth_MBps,jitter_ms\n"
      "0,aws,20,100,1\n"
      "1,aws,20,-5,1\n");
  try {
    parse_trace(in);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(TraceTest, MalformedRowNamesLine) {
  std::istringstream in(
      "timestamp_s,platform_id,latency_ms,bandwidth_MBps,jitter_ms\n"
      "0,aws,abc,100,1\n");
  try {
    parse_trace(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(TraceTest, StableReorder) {
  std::istringstream in(
      "timestamp_s,platform_id,latency_ms,bandwidth_MBps,jitter_ms\n"
      "5,aws,1,1,0\n"
      "2,aws,2,1,0\n"
      "5,aws,3,1,0\n"
      "2,aws,4,1,0\n");
  const auto s = parse_trace(in);
  std::vector<double> lat;
  for (const auto& x : s) lat.push_back(x.latency_ms);
  EXPECT_EQ(lat, (std::vector<double>{2, 4, 1, 3}));
}

TEST(PlatformJsonTest, RoundTripAndErrors) {
  const CloudPlatform p = Plat("x", 1.5, 20.0, 3.0, 0.25);
  const CloudPlatform q = platform_from_json(platform_to_json(p));
  EXPECT_EQ(q.platform_id, "x");
  EXPECT_EQ(q.load_factor, 0.25);
  EXPECT_THROW(platform_from_json({{"platform_id", "x"}, {"sync_latency_s", 1.0}}), ConfigError);
  EXPECT_THROW(platform_from_json({{"platform_id", "x"}, {"sync_latency_s", 1.0},
                                   {"bandwidth_MBps", 0.0}}),
               ValidationError);
}

}  // namespace
}  // namespace fedcloud
