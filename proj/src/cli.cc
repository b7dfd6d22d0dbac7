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
#include "fedcloud/cli.h"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fedcloud/error.h"
#include "fedcloud/fl_runtime.h"
#include "fedcloud/he_core.h"
#include "fedcloud/seed.h"
#include "fedcloud/sync_model.h"

namespace fedcloud {
namespace {

namespace fs = std::filesystem;

constexpr char kSeedEnv[] = "FEDCLOUD_SEED";

std::optional<std::uint64_t> EnvSeed() {
  const char* v = std::getenv(kSeedEnv);
  if (v == nullptr || *v == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long s = std::stoull(v, &used);
    if (used != std::string(v).size()) throw std::invalid_argument(v);
    return s;
  } catch (const std::exception&) {
    throw ConfigError(std::string(kSeedEnv) + ": '" + v + "' is not an unsigned integer");
  }
}

std::optional<std::uint64_t> ResolveSeed(const std::optional<std::uint64_t>& flag) {
  return flag ? flag : EnvSeed();
}

void WriteFile(const fs::path& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f << body;
  if (!f) throw Error("write failed: " + path.string());
}

nlohmann::json ReadJson(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

std::string Stamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

struct KeygenArgs {
  int bits = he::kMinSecureBits;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool force = false;
};

int CmdKeygen(const KeygenArgs& a, std::ostream& out, std::ostream& err) {
  const std::uint64_t seed = ResolveSeed(a.seed).value_or(0);
  const fs::path dir(a.out_dir);
  const fs::path pub = dir / "public_key.json";
  const fs::path sec = dir / "secret_key.json";
  if (!a.force && (fs::exists(pub) || fs::exists(sec))) {
    throw Error("refusing to overwrite existing key files in " + dir.string() +
                " (use --force)");
  }
  const he::KeyPair kp = he::keygen(a.bits, seed);
  fs::create_directories(dir);
  WriteFile(pub, public_key_to_json(kp.public_key).dump(2) + "\n");
  WriteFile(sec, secret_key_to_json(kp.secret_key).dump(2) + "\n");
  std::error_code ec;
  fs::permissions(sec, fs::perms::owner_read | fs::perms::owner_write,
                  fs::perm_options::replace, ec);
  if (kp.toy_strength()) {
    err << "warning: " << a.bits << "-bit modulus is not cryptographically strong\n";
  }
  out << he::key_fingerprint(kp.public_key) << "\n";
  return kExitOk;
}

struct RunArgs {
  std::string scenario;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  int verbosity = 0;
};

int CmdRun(const RunArgs& a, std::ostream& out, std::ostream& err) {
  Scenario sc = load_scenario(a.scenario);
  if (auto s = ResolveSeed(a.seed)) sc.seed = *s;
  if (a.workers) {
    if (*a.workers == 0) throw ConfigError("--workers: must be >= 1");
    if (sc.crypto) sc.crypto->workers = *a.workers;
  }
  sc.validate();

  std::vector<ExperimentReport> reports;
  for (Mode m : sc.modes) {
    if (a.verbosity > 0) err << Stamp() << " running mode " << mode_name(m) << "\n";
    reports.push_back(run_experiment(sc, m));
    if (a.verbosity > 0) {
      for (const auto& r : reports.back().rounds) {
        err << Stamp() << "   round " << r.round << " loss " << r.train_loss << "\n";
      }
    }
  }

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  WriteFile(dir / "report.json",
            experiments_to_json(sc, reports, sc.record_wall_clock).dump(2) + "\n");
  std::vector<MetricsRow> rows;
  for (const auto& r : reports) {
    auto more = metrics_rows(r);
    rows.insert(rows.end(), more.begin(), more.end());
  }
  std::ostringstream csv;
  write_metrics_csv(csv, rows, sc.record_wall_clock);
  WriteFile(dir / "metrics.csv", csv.str());
  out << "wrote " << (dir / "report.json").string() << " and "
      << (dir / "metrics.csv").string() << "\n";
  return kExitOk;
}

std::vector<std::size_t> ParseCounts(const std::string& csv, const char* flag) {
  std::vector<std::size_t> out;
  std::stringstream ss(csv);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(cell, &used);
      if (used != cell.size() || v <= 0) throw std::invalid_argument(cell);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ValidationError(std::string(flag) + ": '" + cell + "' is not a positive integer");
    }
  }
  if (out.empty()) throw ValidationError(std::string(flag) + ": empty list");
  return out;
}

struct BenchArgs {
  long long dim = 1000;
  std::string blocks = "1,4,16";
  std::string workers = "1,4";
  int bits = 64;
  std::optional<std::uint64_t> seed;
};

int CmdBench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  if (a.dim <= 0) throw ValidationError("--dim: must be >= 1");
  const auto blocks = ParseCounts(a.blocks, "--blocks");
  const auto workers = ParseCounts(a.workers, "--workers");
  const std::uint64_t seed = ResolveSeed(a.seed).value_or(0);
  const std::size_t dim = static_cast<std::size_t>(a.dim);

  const he::KeyPair kp = he::keygen(a.bits, seed);
  const he::FixedPointCodec codec;
  std::mt19937_64 rng(DeriveSeed(seed, {kSeedData}));
  std::uniform_real_distribution<double> u(-codec.clip_bound, codec.clip_bound);
  GradientVector v(dim);
  for (auto& x : v) x = u(rng);

  out << "n_blocks,workers,wall_clock_ms,encrypt_ops\n";
  std::optional<std::vector<he::BigInt>> reference;
  for (std::size_t nb : blocks) {
    for (std::size_t w : workers) {
      he::OpCounts ops;
      const auto spec = he::BlockSpec::for_dim(dim, nb);
      const auto t0 = std::chrono::steady_clock::now();
      const he::CipherVector cv = he::encrypt_vector_blocked(
          kp.public_key, v, codec, spec, {DeriveSeed(seed, {kSeedEncrypt}), w}, &ops);
      const double ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t0).count();
      const auto plain = he::decrypt_vector_signed(kp.secret_key, cv, w);
      if (!reference) {
        reference = plain;
      } else if (plain != *reference) {
        err << "error: decryption differs for n_blocks=" << nb << " workers=" << w << "\n";
        return kExitRuntime;
      }
      out << nb << "," << w << "," << format_double(ms) << "," << ops.encrypt << "\n";
    }
  }
  return kExitOk;
}

struct SyncPlanArgs {
  std::string trace;
  std::string platforms;
  bool json = false;
  std::optional<double> now_s;
  std::optional<double> staleness_window_s;
};

int CmdSyncPlan(const SyncPlanArgs& a, std::ostream& out, std::ostream&) {
  const auto samples = ingest_trace(a.trace);
  const nlohmann::json doc = ReadJson(a.platforms);
  const nlohmann::json& arr = doc.is_object() && doc.contains("platforms") ? doc.at("platforms") : doc;
  if (!arr.is_array() || arr.empty()) {
    throw ConfigError("platforms: expected a non-empty array");
  }
  std::vector<CloudPlatform> plats;
  for (const auto& p : arr) plats.push_back(platform_from_json(p));

  SyncPolicy policy;
  if (a.now_s) policy.now_s = *a.now_s;
  if (a.staleness_window_s) policy.staleness_window_s = *a.staleness_window_s;
  const SyncWeights w = derive_sync_weights(samples, plats, policy);
  const double total = total_delay(plats);
  const double weighted = weighted_sync_delay(plats, w);

  if (a.json) {
    const nlohmann::json j{{"sync_weights", sync_weights_to_json(w)},
                           {"total_delay_s", total},
                           {"weighted_sync_delay_s", weighted}};
    out << j.dump(2) << "\n";
  } else {
    for (std::size_t i = 0; i < w.weights.size(); ++i) {
      out << w.platform_ids[i] << " " << format_double(w.weights[i]) << "\n";
    }
    out << "total_delay_s " << format_double(total) << "\n";
    out << "weighted_sync_delay_s " << format_double(weighted) << "\n";
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"fedcloud: privacy-preserving federated learning simulator"};
  app.require_subcommand(1);

  KeygenArgs kg;
  auto* keygen = app.add_subcommand("keygen", "Generate a Paillier key pair");
  keygen->add_option("--bits", kg.bits, "Modulus size in bits")->capture_default_str();
  keygen->add_option("--out", kg.out_dir, "Output directory")->capture_default_str();
  keygen->add_option("--seed", kg.seed, "Deterministic seed");
  keygen->add_flag("--force", kg.force, "Overwrite existing key files");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run the experiments of a scenario");
  run_cmd->add_option("--scenario", run.scenario, "Scenario JSON")->required();
  run_cmd->add_option("--out", run.out_dir, "Output directory")->capture_default_str();
  run_cmd->add_option("--seed", run.seed, "Override the scenario seed");
  run_cmd->add_option("--workers", run.workers, "Crypto worker threads");
  run_cmd->add_flag("-v,--verbose", run.verbosity, "Progress on stderr");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench-encrypt", "Blocked encryption timing table");
  bench_cmd->add_option("--dim", bench.dim, "Vector length")->capture_default_str();
  bench_cmd->add_option("--blocks", bench.blocks, "Comma-separated block counts")->capture_default_str();
  bench_cmd->add_option("--workers", bench.workers, "Comma-separated worker counts")->capture_default_str();
  bench_cmd->add_option("--bits", bench.bits, "Modulus size in bits")->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed, "Deterministic seed");

  SyncPlanArgs plan;
  auto* plan_cmd = app.add_subcommand("sync-plan", "Sync weights and delays from a trace");
  plan_cmd->add_option("--trace", plan.trace, "Network trace CSV")->required();
  plan_cmd->add_option("--platforms", plan.platforms, "Platforms JSON")->required();
  plan_cmd->add_flag("--json", plan.json, "Emit JSON");
  plan_cmd->add_option("--now", plan.now_s, "Reference time in seconds");
  plan_cmd->add_option("--staleness-window", plan.staleness_window_s, "Max sample age in seconds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  try {
    if (*keygen) return CmdKeygen(kg, out, err);
    if (*run_cmd) return CmdRun(run, out, err);
    if (*bench_cmd) return CmdBench(bench, out, err);
    if (*plan_cmd) return CmdSyncPlan(plan, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return IsConfigError(e) ? kExitConfig : kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace fedcloud
