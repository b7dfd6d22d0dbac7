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
#include "fedcloud/metrics.h"

#include <charconv>
#include <cmath>

#include "fedcloud/error.h"

namespace fedcloud {

std::optional<GradientVector> invert_single_sample_update(
    std::span<const double> update) {
  if (update.size() < 2) return std::nullopt;
  const std::size_t d = update.size() - 1;
  const double bias = update[d];
  if (bias == 0.0 || !std::isfinite(bias)) return std::nullopt;
  GradientVector x(d);
  for (std::size_t j = 0; j < d; ++j) x[j] = update[j] / bias;
  return x;
}

LeakageResult leakage_rate(const RoundTranscript& transcript,
                           const SyntheticTask& task) {
  if (task.kind != TaskKind::kLinearRegression) {
    throw UnsupportedTaskError(
        "leakage_rate: the inversion attack is exact only for linear regression");
  }
  for (const auto& c : task.clients) {
    if (c.size() != 1) {
      throw UnsupportedTaskError(
          "leakage_rate: the inversion attack needs one sample per client");
    }
  }

  const std::size_t n = task.clients.size();
  std::vector<double> best_error(n, 1.0);
  for (const auto& p : transcript.payloads) {
    if (p.direction != Direction::kUpload) continue;
    if (p.tag != PayloadTag::kPlaintext && p.tag != PayloadTag::kNoised) continue;
    if (p.client >= n) {
      throw ValidationError("leakage_rate: payload from unknown client " +
                            std::to_string(p.client));
    }
    const GradientVector update = deserialize_plain_vector(p.bytes);
    const auto& x = task.clients[p.client].features.front();
    if (update.size() != x.size() + 1) {
      throw DimensionError("leakage_rate: update does not match task dimension");
    }
    const auto guess = invert_single_sample_update(update);
    if (!guess) continue;
    double diff2 = 0.0;
    double norm2 = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      diff2 += ((*guess)[j] - x[j]) * ((*guess)[j] - x[j]);
      norm2 += x[j] * x[j];
    }
    const double err = norm2 > 0 ? std::sqrt(diff2 / norm2) : std::sqrt(diff2);
    if (std::isfinite(err)) best_error[p.client] = std::min(best_error[p.client], err);
  }

  LeakageResult r;
  r.round = transcript.round;
  r.mode = std::string(mode_name(transcript.mode));
  r.samples = n;
  double total_err = 0.0;
  for (double e : best_error) {
    if (e < kLeakRelativeError) ++r.leaked;
    total_err += e;
  }
  r.reconstructed_fraction = n == 0 ? 0.0 : static_cast<double>(r.leaked) / n;
  r.mean_reconstruction_error = n == 0 ? 0.0 : total_err / n;
  return r;
}

CostResult& CostResult::operator+=(const CostResult& o) {
  upload_bytes += o.upload_bytes;
  download_bytes += o.download_bytes;
  encrypt_ops += o.encrypt_ops;
  decrypt_ops += o.decrypt_ops;
  homomorphic_ops += o.homomorphic_ops;
  wall_clock_ms += o.wall_clock_ms;
  return *this;
}

CostResult communication_cost(const RoundTranscript& transcript) {
  CostResult c;
  c.round = transcript.round;
  c.mode = std::string(mode_name(transcript.mode));
  for (const auto& p : transcript.payloads) {
    (p.direction == Direction::kUpload ? c.upload_bytes : c.download_bytes) +=
        p.bytes.size();
  }
  return c;
}

CostResult computation_cost(const RoundTranscript& transcript) {
  CostResult c;
  c.round = transcript.round;
  c.mode = std::string(mode_name(transcript.mode));
  he::OpCounts all = transcript.client_ops;
  all += transcript.server_ops;
  all += transcript.authority_ops;
  c.encrypt_ops = all.encrypt;
  c.decrypt_ops = all.decrypt;
  c.homomorphic_ops = all.homomorphic();
  c.wall_clock_ms = transcript.wall_clock_ms;
  return c;
}

CostResult round_cost(const RoundTranscript& transcript) {
  CostResult c = communication_cost(transcript);
  CostResult ops = computation_cost(transcript);
  ops.upload_bytes = c.upload_bytes;
  ops.download_bytes = c.download_bytes;
  return ops;
}

CostResult communication_cost(std::span<const RoundTranscript> transcripts) {
  CostResult total;
  for (const auto& t : transcripts) total += communication_cost(t);
  if (!transcripts.empty()) total.mode = std::string(mode_name(transcripts[0].mode));
  return total;
}

CostResult computation_cost(std::span<const RoundTranscript> transcripts) {
  CostResult total;
  for (const auto& t : transcripts) total += computation_cost(t);
  if (!transcripts.empty()) total.mode = std::string(mode_name(transcripts[0].mode));
  return total;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows,
                       bool include_timing) {
  out << "# fedcloud metrics schema v" << kMetricsSchemaVersion << "\n";
  out << "round,mode,leakage_rate,upload_bytes,download_bytes,encrypt_ops,"
         "decrypt_ops,homomorphic_ops,wall_clock_ms\n";
  for (const auto& r : rows) {
    out << r.round << ',' << r.mode << ','
        << (r.leakage_rate ? format_double(*r.leakage_rate) : "nan") << ','
        << r.cost.upload_bytes << ',' << r.cost.download_bytes << ','
        << r.cost.encrypt_ops << ',' << r.cost.decrypt_ops << ','
        << r.cost.homomorphic_ops << ','
        << format_double(include_timing ? r.cost.wall_clock_ms : 0.0) << '\n';
  }
}

}  // namespace fedcloud
