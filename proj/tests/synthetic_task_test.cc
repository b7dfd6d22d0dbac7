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
#include "fedcloud/synthetic_task.h"

#include <gtest/gtest.h>

#include "fedcloud/error.h"

namespace fedcloud {
namespace {

TEST(LocalTrainTest, SingleLinearStep) {
  const ClientDataset d{{{1.0}}, {2.0}};
  const GradientVector model{0.0, 0.0};
  const LocalResult r = local_train(TaskKind::kLinearRegression, d, model, 1, 0.1);
  // d/dw (w x + b - y)^2 = 2 (w x + b - y) x
  ASSERT_EQ(r.update.size(), 2u);
  EXPECT_DOUBLE_EQ(r.update[0], 0.1 * 2 * (2 - 0) * 1);
  EXPECT_DOUBLE_EQ(r.update[1], 0.1 * 2 * (2 - 0));
  EXPECT_DOUBLE_EQ(r.loss, task_loss(TaskKind::kLinearRegression, d, r.update));
}

TEST(LocalTrainTest, ZeroLearningRate) {
  const ClientDataset d{{{1.0, -2.0}, {0.5, 3.0}}, {1.0, 0.0}};
  const GradientVector model{0.3, -0.1, 0.2};
  const LocalResult r = local_train(TaskKind::kLogisticRegression, d, model, 3, 0.0);
  EXPECT_EQ(r.update, GradientVector(3, 0.0));
  EXPECT_DOUBLE_EQ(r.loss, task_loss(TaskKind::kLogisticRegression, d, model));
}

TEST(LocalTrainTest, StationaryPoint) {
  const ClientDataset d{{{1.0}, {2.0}, {-1.0}}, {1.5, 2.0, 0.5}};  // y = 0.5 x + 1
  const GradientVector model{0.5, 1.0};
  const LocalResult r = local_train(TaskKind::kLinearRegression, d, model, 5, 0.1);
  for (double x : r.update) EXPECT_LE(std::abs(x), 1e-9);
}

TEST(LocalTrainTest, DimensionMismatch) {
  const ClientDataset d{{{1.0}}, {2.0}};
  EXPECT_THROW(local_train(TaskKind::kLinearRegression, d, GradientVector{0.0}, 1, 0.1),
               DimensionError);
}

TEST(MakeTaskTest, Reproducible) {
  TaskSpec spec;
  spec.heterogeneity_skew = 0.5;
  spec.label_noise = 0.1;
  const SyntheticTask a = make_task(spec, 4, 9);
  const SyntheticTask b = make_task(spec, 4, 9);
  ASSERT_EQ(a.clients.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(a.clients[k].features, b.clients[k].features);
    EXPECT_EQ(a.clients[k].labels, b.clients[k].labels);
    EXPECT_EQ(a.clients[k].size(), spec.samples_per_client);
  }
  EXPECT_EQ(a.ground_truth.size(), spec.dim + 1);
  EXPECT_NE(make_task(spec, 4, 10).clients[0].features, a.clients[0].features);
}

TEST(MakeTaskTest, LabelsAreBinaryForLogistic) {
  const SyntheticTask t = make_task(TaskSpec{}, 3, 1);
  for (const auto& c : t.clients) {
    for (double y : c.labels) EXPECT_TRUE(y == 0.0 || y == 1.0);
  }
  EXPECT_EQ(t.pooled().size(), 3 * TaskSpec{}.samples_per_client);
}

TEST(MakeTaskTest, GroundTruthSeparatesNoiselessData) {
  const SyntheticTask t = make_task(TaskSpec{}, 5, 4);
  EXPECT_EQ(accuracy(t.pooled(), t.ground_truth), 1.0);
}

TEST(MakeTaskTest, InvalidSpec) {
  TaskSpec spec;
  spec.dim = 0;
  EXPECT_THROW(make_task(spec, 2, 1), ConfigError);
  EXPECT_THROW(make_task(TaskSpec{}, 0, 1), ConfigError);
}

}  // namespace
}  // namespace fedcloud
