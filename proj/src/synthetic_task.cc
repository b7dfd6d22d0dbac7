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

#include <algorithm>
#include <cmath>
#include <random>

#include "fedcloud/error.h"
#include "fedcloud/seed.h"

namespace fedcloud {
namespace {

double Dot(std::span<const double> x, std::span<const double> model) {
  double z = model[x.size()];  // bias
  for (std::size_t j = 0; j < x.size(); ++j) z += model[j] * x[j];
  return z;
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double Softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

void CheckModel(const ClientDataset& data, std::span<const double> model) {
  if (data.size() == 0) throw ValidationError("dataset is empty");
  if (model.size() != data.features.front().size() + 1) {
    throw DimensionError("model has " + std::to_string(model.size()) +
                         " entries, dataset needs " +
                         std::to_string(data.features.front().size() + 1));
  }
}

}  // namespace

std::string_view task_kind_name(TaskKind kind) {
  return kind == TaskKind::kLinearRegression ? "linear_regression"
                                             : "logistic_regression";
}

void TaskSpec::validate() const {
  if (dim == 0) throw ConfigError("task.dim must be >= 1");
  if (samples_per_client == 0) {
    throw ConfigError("task.samples_per_client must be >= 1");
  }
  if (!(heterogeneity_skew >= 0.0 && heterogeneity_skew <= 1.0)) {
    throw ConfigError("task.heterogeneity_skew must be in [0, 1]");
  }
  if (!(label_noise >= 0.0) || !std::isfinite(label_noise) ||
      (kind == TaskKind::kLogisticRegression && label_noise > 0.5)) {
    throw ConfigError("task.label_noise out of range");
  }
}

ClientDataset SyntheticTask::pooled() const {
  ClientDataset all;
  for (const auto& c : clients) {
    all.features.insert(all.features.end(), c.features.begin(), c.features.end());
    all.labels.insert(all.labels.end(), c.labels.begin(), c.labels.end());
  }
  return all;
}

SyntheticTask make_task(const TaskSpec& spec, std::size_t n_clients,
                        std::uint64_t seed) {
  spec.validate();
  if (n_clients == 0) throw ConfigError("n_clients must be >= 1");
  SyntheticTask task;
  task.kind = spec.kind;
  task.dim = spec.dim;

  std::mt19937_64 truth_rng(DeriveSeed(seed, {kSeedData, 0}));
  std::normal_distribution<double> normal(0.0, 1.0);
  task.ground_truth.resize(spec.dim + 1);
  for (std::size_t j = 0; j < spec.dim; ++j) task.ground_truth[j] = normal(truth_rng);
  task.ground_truth[spec.dim] = 0.5 * normal(truth_rng);

  task.clients.resize(n_clients);
  for (std::size_t k = 0; k < n_clients; ++k) {
    std::mt19937_64 rng(DeriveSeed(seed, {kSeedData, 1, k}));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    // Position of this client in [-1, 1] along the heterogeneity axis.
    const double pos =
        n_clients == 1 ? 0.0 : 2.0 * static_cast<double>(k) / (n_clients - 1) - 1.0;
    const double shift = spec.heterogeneity_skew * pos;
    const double p_positive = 0.5 + 0.5 * shift;
    auto& data = task.clients[k];
    while (data.size() < spec.samples_per_client) {
      std::vector<double> x(spec.dim);
      for (auto& v : x) v = normal(rng);
      if (spec.kind == TaskKind::kLinearRegression) {
        for (auto& v : x) v += shift;
        const double y = Dot(x, task.ground_truth) + spec.label_noise * normal(rng);
        data.features.push_back(std::move(x));
        data.labels.push_back(y);
        continue;
      }
      double y = Dot(x, task.ground_truth) > 0 ? 1.0 : 0.0;
      const double keep = (y == 1.0 ? p_positive : 1.0 - p_positive) /
                          std::max(p_positive, 1.0 - p_positive);
      if (unit(rng) >= keep) continue;
      if (unit(rng) < spec.label_noise) y = 1.0 - y;
      data.features.push_back(std::move(x));
      data.labels.push_back(y);
    }
  }
  return task;
}

double task_loss(TaskKind kind, const ClientDataset& data,
                 std::span<const double> model) {
  CheckModel(data, model);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double z = Dot(data.features[i], model);
    if (kind == TaskKind::kLinearRegression) {
      const double r = z - data.labels[i];
      total += r * r;
    } else {
      // -[y log s + (1-y) log(1-s)] = softplus(z) - y z
      total += Softplus(z) - data.labels[i] * z;
    }
  }
  return total / static_cast<double>(data.size());
}

GradientVector loss_gradient(TaskKind kind, const ClientDataset& data,
                             std::span<const double> model) {
  CheckModel(data, model);
  const std::size_t d = model.size() - 1;
  GradientVector g(model.size(), 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double z = Dot(data.features[i], model);
    const double r = kind == TaskKind::kLinearRegression
                         ? 2.0 * (z - data.labels[i])
                         : Sigmoid(z) - data.labels[i];
    for (std::size_t j = 0; j < d; ++j) g[j] += r * data.features[i][j];
    g[d] += r;
  }
  for (auto& v : g) v /= static_cast<double>(data.size());
  return g;
}

double accuracy(const ClientDataset& data, std::span<const double> model) {
  CheckModel(data, model);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double pred = Dot(data.features[i], model) > 0 ? 1.0 : 0.0;
    if (pred == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

LocalResult local_train(TaskKind kind, const ClientDataset& data,
                        std::span<const double> model, int epochs, double lr) {
  CheckModel(data, model);
  if (epochs < 0) throw ConfigError("training.epochs must be >= 0");
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    throw ConfigError("training.lr must be finite and >= 0");
  }
  GradientVector w(model.begin(), model.end());
  for (int e = 0; e < epochs; ++e) {
    const GradientVector g = loss_gradient(kind, data, w);
    for (std::size_t j = 0; j < w.size(); ++j) w[j] -= lr * g[j];
  }
  LocalResult out;
  out.update.resize(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) out.update[j] = w[j] - model[j];
  out.loss = task_loss(kind, data, w);
  return out;
}

}  // namespace fedcloud
