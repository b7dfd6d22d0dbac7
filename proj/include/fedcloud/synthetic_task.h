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
#ifndef FEDCLOUD_SYNTHETIC_TASK_H_
#define FEDCLOUD_SYNTHETIC_TASK_H_

// Seeded convex learning tasks split across clients.
//
// Models are [w_0 .. w_{dim-1}, b]: feature weights followed by a bias, so a
// model vector has dim + 1 entries.
//
//   linear_regression    loss = mean_i (w.x_i + b - y_i)^2
//   logistic_regression  loss = mean_i BCE(sigmoid(w.x_i + b), y_i), y in {0,1}

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fedcloud/he_core.h"

namespace fedcloud {

enum class TaskKind { kLogisticRegression, kLinearRegression };

std::string_view task_kind_name(TaskKind kind);

struct TaskSpec {
  TaskKind kind = TaskKind::kLogisticRegression;
  std::size_t dim = 5;
  std::size_t samples_per_client = 20;
  // 0 = iid. For classification, skews each client's label balance; for
  // regression, shifts each client's feature mean.
  double heterogeneity_skew = 0.0;
  // Classification: label flip probability. Regression: noise std-dev.
  double label_noise = 0.0;

  void validate() const;
};

struct ClientDataset {
  std::vector<std::vector<double>> features;
  std::vector<double> labels;

  std::size_t size() const { return labels.size(); }
};

struct SyntheticTask {
  TaskKind kind = TaskKind::kLogisticRegression;
  std::size_t dim = 0;
  std::vector<ClientDataset> clients;
  GradientVector ground_truth;  // dim + 1 entries

  std::size_t model_dim() const { return dim + 1; }
  ClientDataset pooled() const;
};

SyntheticTask make_task(const TaskSpec& spec, std::size_t n_clients,
                        std::uint64_t seed);

double task_loss(TaskKind kind, const ClientDataset& data,
                 std::span<const double> model);
GradientVector loss_gradient(TaskKind kind, const ClientDataset& data,
                             std::span<const double> model);
// Fraction of correctly classified samples (logistic only).
double accuracy(const ClientDataset& data, std::span<const double> model);

struct LocalResult {
  GradientVector update;  // new_model - old_model
  double loss = 0.0;      // loss after training
};

// Full-batch gradient descent for `epochs` steps.
LocalResult local_train(TaskKind kind, const ClientDataset& data,
                        std::span<const double> model, int epochs, double lr);

}  // namespace fedcloud

#endif  // FEDCLOUD_SYNTHETIC_TASK_H_
