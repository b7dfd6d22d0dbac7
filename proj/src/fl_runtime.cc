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
#include "fedcloud/fl_runtime.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "fedcloud/error.h"
#include "fedcloud/seed.h"

namespace fedcloud {
namespace {

constexpr double kDefaultBandwidthLo = 5.0;
constexpr double kDefaultBandwidthHi = 50.0;

struct LocalOutcome {
  std::vector<GradientVector> updates;
  std::vector<double> losses;
};

LocalOutcome TrainClients(const Scenario& sc, const ExperimentState& st) {
  LocalOutcome out;
  for (const auto& data : st.task.clients) {
    LocalResult r = local_train(st.task.kind, data, st.model,
                                sc.training.epochs, sc.training.lr);
    out.updates.push_back(std::move(r.update));
    out.losses.push_back(r.loss);
  }
  return out;
}

void Broadcast(RoundTranscript& tr, std::size_t k_clients,
               const GradientVector& model) {
  const auto bytes = serialize_plain_vector(model);
  for (std::size_t k = 0; k < k_clients; ++k) {
    tr.payloads.push_back({k, Direction::kDownload, PayloadTag::kModel, bytes});
  }
}

GradientVector UniformMean(const std::vector<GradientVector>& updates) {
  std::vector<WeightedUpdate> w;
  w.reserve(updates.size());
  for (const auto& u : updates) w.push_back({1.0, u});
  return weighted_global_update(w);
}

// Plaintext aggregate of the same updates after codec clipping.
GradientVector ShadowMean(const std::vector<GradientVector>& updates,
                          const he::FixedPointCodec& codec) {
  std::vector<GradientVector> clipped = updates;
  for (auto& u : clipped) {
    for (auto& x : u) x = codec.clip(x);
  }
  return UniformMean(clipped);
}

double MaxAbsDiff(const GradientVector& a, const GradientVector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<std::vector<std::uint8_t>> Uploads(const RoundTranscript& tr,
                                               PayloadTag tag) {
  std::vector<std::vector<std::uint8_t>> out;
  for (const auto& p : tr.payloads) {
    if (p.direction == Direction::kUpload && p.tag == tag) out.push_back(p.bytes);
  }
  return out;
}

void AccountSync(const Scenario& sc, const ExperimentState& st,
                 std::uint64_t round, RoundTranscript& tr) {
  std::vector<CloudPlatform> plats = sc.platforms;
  const SyncConfig sync = sc.sync.value_or(SyncConfig{});
  SyncPolicy policy;
  policy.staleness_window_s = sync.staleness_window_s;

  std::vector<NetworkSample> samples;
  if (!st.trace.empty()) {
    samples = st.trace;
    policy.now_s = static_cast<double>(round) * sync.round_interval_s;
    const auto latest = latest_samples(samples, plats, policy);
    for (std::size_t i = 0; i < plats.size(); ++i) {
      plats[i].sync_latency_s = latest[i].latency_ms / 1000.0;
      plats[i].bandwidth_MBps = latest[i].bandwidth_MBps;
    }
  } else {
    for (const auto& p : plats) {
      samples.push_back({0.0, p.platform_id, p.sync_latency_s * 1000.0,
                         p.bandwidth_MBps, 0.0});
    }
  }

  // Clients are hosted round-robin on the platforms; each platform ships
  // what its clients uploaded this round.
  std::vector<std::uint64_t> bytes(plats.size(), 0);
  for (const auto& p : tr.payloads) {
    if (p.direction == Direction::kUpload) bytes[p.client % plats.size()] += p.bytes.size();
  }
  for (std::size_t i = 0; i < plats.size(); ++i) {
    plats[i].payload_MB = static_cast<double>(bytes[i]) / 1e6;
  }

  SyncWeights weights = derive_sync_weights(samples, plats, policy);
  tr.total_delay_s = total_delay(plats);
  tr.weighted_sync_delay_s = weighted_sync_delay(plats, weights);
  tr.sync_weights = std::move(weights);
}

bool LeakageApplies(const SyntheticTask& task) {
  if (task.kind != TaskKind::kLinearRegression) return false;
  return std::all_of(task.clients.begin(), task.clients.end(),
                     [](const ClientDataset& c) { return c.size() == 1; });
}

nlohmann::json OptionalNumber(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json CostToJson(const CostResult& c, bool include_timing) {
  return {{"upload_bytes", c.upload_bytes},
          {"download_bytes", c.download_bytes},
          {"encrypt_ops", c.encrypt_ops},
          {"decrypt_ops", c.decrypt_ops},
          {"homomorphic_ops", c.homomorphic_ops},
          {"wall_clock_ms", include_timing ? c.wall_clock_ms : 0.0}};
}

}  // namespace

GradientVector dp_noise(std::size_t dim, double stddev, std::uint64_t seed) {
  GradientVector out(dim, 0.0);
  if (stddev == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  for (auto& x : out) x = normal(rng);
  return out;
}

void clip_l2(GradientVector& v, double clip) {
  double norm2 = 0.0;
  for (double x : v) norm2 += x * x;
  const double norm = std::sqrt(norm2);
  if (norm > clip) {
    const double s = clip / norm;
    for (auto& x : v) x *= s;
  }
}

ExperimentState init_state(const Scenario& sc, Mode mode) {
  sc.validate();
  if (!sc.uses(mode)) {
    throw ConfigError("mode: '" + std::string(mode_name(mode)) +
                      "' is not configured in this scenario");
  }
  ExperimentState st;
  st.mode = mode;
  st.task = make_task(sc.task, sc.n_clients, sc.seed);
  st.model.assign(st.task.model_dim(), 0.0);
  if (mode == Mode::kHeFl || mode == Mode::kOurs) {
    st.keys = he::keygen(sc.crypto->security_bits, sc.seed,
                         he::HeadroomRequirement{sc.crypto->codec, sc.n_clients});
  }
  if (mode == Mode::kOurs && sc.sync && sc.sync->trace) {
    st.trace = ingest_trace(*sc.sync->trace);
  }
  if (!sc.client_bandwidths.empty()) {
    st.client_bandwidths = sc.client_bandwidths;
  } else {
    for (std::size_t k = 0; k < sc.n_clients; ++k) {
      std::mt19937_64 rng(DeriveSeed(sc.seed, {kSeedBandwidth, k}));
      std::uniform_real_distribution<double> u(kDefaultBandwidthLo, kDefaultBandwidthHi);
      st.client_bandwidths.push_back(u(rng));
    }
  }
  return st;
}

RoundOutput run_round(const Scenario& sc, ExperimentState& st) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t round = st.round + 1;
  const std::size_t k_clients = st.task.clients.size();
  const std::size_t dim = st.task.model_dim();

  RoundOutput out;
  RoundTranscript& tr = out.transcript;
  RoundReport& rep = out.report;
  tr.round = rep.round = round;
  tr.mode = rep.mode = st.mode;

  GradientVector delta;
  switch (st.mode) {
    case Mode::kCentralized: {
      LocalResult r = local_train(st.task.kind, st.task.pooled(), st.model,
                                  sc.training.epochs, sc.training.lr);
      delta = std::move(r.update);
      break;
    }
    case Mode::kFl:
    case Mode::kDpFl: {
      Broadcast(tr, k_clients, st.model);
      LocalOutcome local = TrainClients(sc, st);
      const bool dp = st.mode == Mode::kDpFl;
      for (std::size_t k = 0; k < k_clients; ++k) {
        GradientVector u = local.updates[k];
        if (dp) {
          clip_l2(u, sc.dp->clip);
          const double stddev = sc.dp->noise_multiplier * sc.dp->clip;
          if (stddev > 0.0) {
            const GradientVector noise =
                dp_noise(dim, stddev, DeriveSeed(sc.seed, {kSeedDpNoise, round, k}));
            for (std::size_t i = 0; i < dim; ++i) u[i] += noise[i];
          }
        }
        tr.payloads.push_back({k, Direction::kUpload,
                               dp ? PayloadTag::kNoised : PayloadTag::kPlaintext,
                               serialize_plain_vector(u)});
      }
      std::vector<GradientVector> received;
      for (const auto& bytes : Uploads(tr, dp ? PayloadTag::kNoised : PayloadTag::kPlaintext)) {
        received.push_back(deserialize_plain_vector(bytes));
      }
      delta = UniformMean(received);
      break;
    }
    case Mode::kHeFl: {
      const auto& crypto = *sc.crypto;
      const he::PublicKey& pk = st.keys->public_key;
      const auto spec = he::BlockSpec::for_dim(dim, crypto.n_blocks);
      Broadcast(tr, k_clients, st.model);
      LocalOutcome local = TrainClients(sc, st);
      for (std::size_t k = 0; k < k_clients; ++k) {
        he::CipherVector cv = he::encrypt_vector_blocked(
            pk, local.updates[k], crypto.codec, spec,
            {DeriveSeed(sc.seed, {kSeedEncrypt, round, k, 0}), crypto.workers},
            &tr.client_ops);
        tr.payloads.push_back({k, Direction::kUpload, PayloadTag::kCiphertext,
                               he::serialize_cipher_vector(pk, cv)});
      }
      std::vector<he::CipherVector> received;
      for (const auto& bytes : Uploads(tr, PayloadTag::kCiphertext)) {
        received.push_back(he::deserialize_cipher_vector(pk, bytes, crypto.codec, spec));
      }
      he::CipherVector sum = encrypted_aggregate(pk, received, &tr.server_ops);
      delta = finalize_mean(st.keys->secret_key, sum, k_clients, crypto.workers,
                            &tr.authority_ops);
      rep.shadow_max_abs_diff = MaxAbsDiff(delta, ShadowMean(local.updates, crypto.codec));
      break;
    }
    case Mode::kOurs: {
      const auto& crypto = *sc.crypto;
      const he::PublicKey& pk = st.keys->public_key;
      const auto spec = he::BlockSpec::for_dim(dim, crypto.n_blocks);
      Broadcast(tr, k_clients, st.model);
      LocalOutcome local = TrainClients(sc, st);

      // Phase 1: clients report loss, data size and bandwidth.
      std::vector<ClientMeta> metas;
      for (std::size_t k = 0; k < k_clients; ++k) {
        ClientMeta m{"client-" + std::to_string(k), local.losses[k],
                     st.task.clients[k].size(), st.client_bandwidths[k]};
        tr.payloads.push_back({k, Direction::kUpload, PayloadTag::kMetadata,
                               serialize_client_meta(m)});
        metas.push_back(std::move(m));
      }
      // Server turns client weights into mix weights in [0, 1].
      std::vector<double> weights =
          client_weights(metas, *sc.weighting, &rep.uniform_weight_fallback);
      const double top = *std::max_element(weights.begin(), weights.end());
      rep.mix_weights.resize(k_clients);
      for (std::size_t k = 0; k < k_clients; ++k) {
        rep.mix_weights[k] = std::clamp(weights[k] / top, 0.0, 1.0);
        tr.payloads.push_back({k, Direction::kDownload, PayloadTag::kMetadata,
                               serialize_scalar(rep.mix_weights[k])});
      }
      // Phase 2: both hybrid terms, encrypted client-side.
      for (std::size_t k = 0; k < k_clients; ++k) {
        he::CipherVector full = he::encrypt_vector_blocked(
            pk, local.updates[k], crypto.codec, spec,
            {DeriveSeed(sc.seed, {kSeedEncrypt, round, k, 0}), crypto.workers},
            &tr.client_ops);
        he::CipherVector complement = encrypt_complement_term(
            pk, local.updates[k], rep.mix_weights[k], crypto.codec, spec,
            {DeriveSeed(sc.seed, {kSeedEncrypt, round, k, 1}), crypto.workers},
            &tr.client_ops);
        tr.payloads.push_back({k, Direction::kUpload, PayloadTag::kCiphertext,
                               he::serialize_cipher_vector(pk, full)});
        tr.payloads.push_back({k, Direction::kUpload, PayloadTag::kCiphertext,
                               he::serialize_cipher_vector(pk, complement)});
      }
      const auto uploads = Uploads(tr, PayloadTag::kCiphertext);
      std::vector<he::CipherVector> received;
      for (const auto& bytes : uploads) {
        received.push_back(he::deserialize_cipher_vector(pk, bytes, crypto.codec, spec));
      }
      std::vector<HybridTerms> terms;
      for (std::size_t k = 0; k < k_clients; ++k) {
        terms.push_back({&received[2 * k], &received[2 * k + 1], rep.mix_weights[k]});
      }
      he::CipherVector numerator = hybrid_numerator(pk, terms, &tr.server_ops);
      delta = finalize_hybrid(st.keys->secret_key, numerator, k_clients,
                              crypto.workers, &tr.authority_ops);
      rep.shadow_max_abs_diff = MaxAbsDiff(delta, ShadowMean(local.updates, crypto.codec));
      AccountSync(sc, st, round, tr);
      rep.total_delay_s = tr.total_delay_s;
      rep.weighted_sync_delay_s = tr.weighted_sync_delay_s;
      rep.sync_weights = tr.sync_weights;
      break;
    }
  }

  for (std::size_t i = 0; i < dim; ++i) st.model[i] += delta[i];
  st.round = round;

  const ClientDataset pooled = st.task.pooled();
  rep.train_loss = task_loss(st.task.kind, pooled, st.model);
  if (st.task.kind == TaskKind::kLogisticRegression) {
    rep.train_accuracy = accuracy(pooled, st.model);
  }
  if (LeakageApplies(st.task)) rep.leakage = leakage_rate(tr, st.task);
  rep.model = st.model;

  tr.wall_clock_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  rep.cost = round_cost(tr);
  return out;
}

ExperimentReport run_experiment(const Scenario& sc, Mode mode) {
  ExperimentState st = init_state(sc, mode);
  ExperimentReport report;
  report.mode = mode;
  report.total_cost.mode = std::string(mode_name(mode));
  if (st.keys) {
    report.key_fingerprint = he::key_fingerprint(st.keys->public_key);
    report.non_cryptographic_strength = st.keys->toy_strength();
  }
  for (std::size_t t = 0; t < sc.rounds; ++t) {
    RoundOutput r = run_round(sc, st);
    report.total_cost += r.report.cost;
    report.rounds.push_back(std::move(r.report));
    report.transcripts.push_back(std::move(r.transcript));
  }
  return report;
}

ExperimentReport run_experiment(const Scenario& sc) {
  sc.validate();
  return run_experiment(sc, sc.modes.front());
}

std::vector<ExperimentReport> run_all(const Scenario& sc) {
  sc.validate();
  std::vector<ExperimentReport> out;
  for (Mode m : sc.modes) out.push_back(run_experiment(sc, m));
  return out;
}

std::vector<MetricsRow> metrics_rows(const ExperimentReport& report) {
  std::vector<MetricsRow> rows;
  for (const auto& r : report.rounds) {
    MetricsRow row;
    row.round = r.round;
    row.mode = std::string(mode_name(r.mode));
    if (r.leakage) row.leakage_rate = r.leakage->reconstructed_fraction;
    row.cost = r.cost;
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json report_to_json(const ExperimentReport& report, bool include_timing) {
  nlohmann::json rounds = nlohmann::json::array();
  std::optional<double> leak_sum;
  for (const auto& r : report.rounds) {
    nlohmann::json row{
        {"round", r.round},
        {"mode", mode_name(r.mode)},
        {"train_loss", r.train_loss},
        {"train_accuracy", OptionalNumber(r.train_accuracy)},
        {"cost", CostToJson(r.cost, include_timing)},
        {"shadow_max_abs_diff", OptionalNumber(r.shadow_max_abs_diff)},
        {"total_delay_s", OptionalNumber(r.total_delay_s)},
        {"weighted_sync_delay_s", OptionalNumber(r.weighted_sync_delay_s)},
        {"sync_weights", r.sync_weights ? sync_weights_to_json(*r.sync_weights)
                                        : nlohmann::json(nullptr)},
        {"mix_weights", r.mix_weights},
        {"uniform_weight_fallback", r.uniform_weight_fallback},
        {"model", r.model},
    };
    if (r.leakage) {
      row["leakage"] = {{"reconstructed_fraction", r.leakage->reconstructed_fraction},
                        {"mean_reconstruction_error", r.leakage->mean_reconstruction_error},
                        {"leaked", r.leakage->leaked},
                        {"samples", r.leakage->samples}};
      leak_sum = leak_sum.value_or(0.0) + r.leakage->reconstructed_fraction;
    } else {
      row["leakage"] = nullptr;
    }
    rounds.push_back(std::move(row));
  }
  nlohmann::json summary{
      {"rounds", report.rounds.size()},
      {"total_cost", CostToJson(report.total_cost, include_timing)},
      {"mean_leakage_rate",
       leak_sum ? nlohmann::json(*leak_sum / report.rounds.size()) : nlohmann::json(nullptr)},
  };
  if (!report.rounds.empty()) {
    summary["final_train_loss"] = report.rounds.back().train_loss;
    summary["final_train_accuracy"] = OptionalNumber(report.rounds.back().train_accuracy);
  }
  nlohmann::json out{{"mode", mode_name(report.mode)},
                     {"summary", summary},
                     {"rounds", rounds}};
  if (report.key_fingerprint) {
    out["key"] = {{"fingerprint", *report.key_fingerprint},
                  {"non_cryptographic_strength", report.non_cryptographic_strength}};
  }
  return out;
}

nlohmann::json experiments_to_json(const Scenario& scenario,
                                   const std::vector<ExperimentReport>& reports,
                                   bool include_timing) {
  nlohmann::json exps = nlohmann::json::array();
  for (const auto& r : reports) exps.push_back(report_to_json(r, include_timing));
  return {{"schema_version", 1},
          {"scenario", scenario_to_json(scenario)},
          {"experiments", exps}};
}

}  // namespace fedcloud
