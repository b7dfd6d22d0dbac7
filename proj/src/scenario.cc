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
#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "fedcloud/error.h"
#include "fedcloud/fl_runtime.h"

namespace fedcloud {
namespace {

// Reads one JSON object, tracking which keys were consumed so that unknown
// keys can be reported by their full dotted path.
class Section {
 public:
  Section(const nlohmann::json& j, std::string path)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  std::string key(const std::string& k) const {
    return path_.empty() ? k : path_ + "." + k;
  }

  bool has(const std::string& k) {
    seen_.insert(k);
    return j_.contains(k);
  }

  const nlohmann::json& raw(const std::string& k) {
    seen_.insert(k);
    return j_.at(k);
  }

  double number(const std::string& k, double fallback) {
    if (!has(k)) return fallback;
    const auto& v = j_.at(k);
    if (!v.is_number()) throw ConfigError(key(k) + ": expected a number");
    return v.get<double>();
  }

  std::uint64_t uinteger(const std::string& k, std::uint64_t fallback) {
    if (!has(k)) return fallback;
    const auto& v = j_.at(k);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ConfigError(key(k) + ": expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& k, const std::string& fallback) {
    if (!has(k)) return fallback;
    const auto& v = j_.at(k);
    if (!v.is_string()) throw ConfigError(key(k) + ": expected a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& k, bool fallback) {
    if (!has(k)) return fallback;
    const auto& v = j_.at(k);
    if (!v.is_boolean()) throw ConfigError(key(k) + ": expected true or false");
    return v.get<bool>();
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError(key(k) + ": unknown key");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "scenario" : path_; }

  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

int ToInt(std::uint64_t v, const std::string& name) {
  if (v > 1'000'000'000ULL) throw ConfigError(name + ": value too large");
  return static_cast<int>(v);
}

TaskKind ParseTaskKind(const std::string& s) {
  if (s == "logistic_regression") return TaskKind::kLogisticRegression;
  if (s == "linear_regression") return TaskKind::kLinearRegression;
  throw ConfigError("task.kind: unknown task '" + s +
                    "' (expected logistic_regression or linear_regression)");
}

WeightMode ParseWeightMode(const std::string& s) {
  if (s == "formula_as_written") return WeightMode::kFormulaAsWritten;
  if (s == "inverse_loss") return WeightMode::kInverseLoss;
  throw ConfigError("weighting.mode: unknown weight mode '" + s +
                    "' (expected formula_as_written or inverse_loss)");
}

std::string_view WeightModeName(WeightMode m) {
  return m == WeightMode::kInverseLoss ? "inverse_loss" : "formula_as_written";
}

}  // namespace

bool Scenario::uses(Mode m) const {
  return std::find(modes.begin(), modes.end(), m) != modes.end();
}

void Scenario::validate() const {
  if (modes.empty()) throw ConfigError("mode: at least one mode required");
  if (n_clients < 1) throw ConfigError("n_clients: must be >= 1");
  if (rounds < 1) throw ConfigError("rounds: must be >= 1");
  task.validate();
  if (training.epochs < 0) throw ConfigError("training.epochs: must be >= 0");
  if (!(training.lr >= 0.0) || !std::isfinite(training.lr)) {
    throw ConfigError("training.lr: must be finite and >= 0");
  }

  const bool needs_crypto = uses(Mode::kHeFl) || uses(Mode::kOurs);
  if (needs_crypto && !crypto) {
    throw ConfigError("crypto: section required for modes he_fl and ours");
  }
  if (!needs_crypto && crypto) {
    throw ConfigError("crypto: section only valid with modes he_fl or ours");
  }
  if (crypto) {
    if (crypto->security_bits < he::kMinToyBits) {
      throw ConfigError("crypto.security_bits: must be >= 16");
    }
    try {
      crypto->codec.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("crypto.") + e.what());
    }
    if (crypto->n_blocks < 1) throw ConfigError("crypto.n_blocks: must be >= 1");
    if (crypto->workers < 1) throw ConfigError("crypto.workers: must be >= 1");
  }

  if (uses(Mode::kDpFl) != dp.has_value()) {
    throw ConfigError(dp ? "dp: section only valid with mode dp_fl"
                         : "dp: section required for mode dp_fl");
  }
  if (dp) {
    if (!(dp->noise_multiplier >= 0.0) || !std::isfinite(dp->noise_multiplier)) {
      throw ConfigError("dp.noise_multiplier: must be finite and >= 0");
    }
    if (!(dp->clip > 0.0) || !std::isfinite(dp->clip)) {
      throw ConfigError("dp.clip: must be finite and > 0");
    }
  }

  const bool ours = uses(Mode::kOurs);
  if (ours != weighting.has_value()) {
    throw ConfigError(weighting ? "weighting: section only valid with mode ours"
                                : "weighting: section required for mode ours");
  }
  if (weighting && (!std::isfinite(weighting->alpha) || weighting->alpha < 0)) {
    throw ConfigError("weighting.alpha: must be finite and >= 0");
  }
  if (ours && platforms.empty()) {
    throw ConfigError("platforms: at least one platform required for mode ours");
  }
  if (!ours && !platforms.empty()) {
    throw ConfigError("platforms: only valid with mode ours");
  }
  if (!ours && sync) throw ConfigError("sync: only valid with mode ours");
  std::set<std::string> ids;
  for (const auto& p : platforms) {
    p.validate();
    if (!ids.insert(p.platform_id).second) {
      throw ConfigError("platforms: duplicate platform_id '" + p.platform_id + "'");
    }
  }
  if (sync) {
    if (!(sync->round_interval_s > 0.0) || !std::isfinite(sync->round_interval_s)) {
      throw ConfigError("sync.round_interval_s: must be finite and > 0");
    }
    if (!(sync->staleness_window_s >= 0.0)) {
      throw ConfigError("sync.staleness_window_s: must be >= 0");
    }
  }
  if (!client_bandwidths.empty()) {
    if (client_bandwidths.size() != n_clients) {
      throw ConfigError("client_bandwidths: expected one entry per client");
    }
    for (double b : client_bandwidths) {
      if (!(b > 0.0) || !std::isfinite(b)) {
        throw ConfigError("client_bandwidths: entries must be > 0");
      }
    }
  }
}

Scenario scenario_from_json(const nlohmann::json& doc,
                            const std::filesystem::path& base_dir) {
  Scenario s;
  Section top(doc, "");

  if (!top.has("mode")) throw ConfigError("mode: missing");
  const auto& mode = top.raw("mode");
  s.modes.clear();
  if (mode.is_string()) {
    s.modes.push_back(parse_mode(mode.get<std::string>(), "mode"));
  } else if (mode.is_array()) {
    for (const auto& m : mode) {
      if (!m.is_string()) throw ConfigError("mode: entries must be strings");
      s.modes.push_back(parse_mode(m.get<std::string>(), "mode"));
    }
  } else {
    throw ConfigError("mode: expected a string or a list of strings");
  }

  s.n_clients = top.uinteger("n_clients", s.n_clients);
  s.rounds = top.uinteger("rounds", s.rounds);
  s.seed = top.uinteger("seed", s.seed);
  s.record_wall_clock = top.boolean("record_wall_clock", s.record_wall_clock);

  if (top.has("task")) {
    Section t(top.raw("task"), "task");
    s.task.kind = ParseTaskKind(t.string("kind", "logistic_regression"));
    s.task.dim = t.uinteger("dim", s.task.dim);
    s.task.samples_per_client = t.uinteger("samples_per_client", s.task.samples_per_client);
    s.task.heterogeneity_skew = t.number("heterogeneity_skew", s.task.heterogeneity_skew);
    s.task.label_noise = t.number("label_noise", s.task.label_noise);
    t.finish();
  }
  if (top.has("training")) {
    Section t(top.raw("training"), "training");
    s.training.epochs = ToInt(t.uinteger("epochs", s.training.epochs), "training.epochs");
    s.training.lr = t.number("lr", s.training.lr);
    t.finish();
  }
  if (top.has("crypto")) {
    Section c(top.raw("crypto"), "crypto");
    CryptoConfig cc;
    cc.security_bits = ToInt(c.uinteger("security_bits", cc.security_bits),
                             "crypto.security_bits");
    cc.codec.frac_bits = ToInt(c.uinteger("frac_bits", cc.codec.frac_bits),
                               "crypto.frac_bits");
    cc.codec.int_bits = ToInt(c.uinteger("int_bits", cc.codec.int_bits),
                              "crypto.int_bits");
    cc.codec.clip_bound = c.number("clip_bound", cc.codec.clip_bound);
    cc.n_blocks = c.uinteger("n_blocks", cc.n_blocks);
    cc.workers = c.uinteger("workers", cc.workers);
    c.finish();
    s.crypto = cc;
  }
  if (top.has("weighting")) {
    Section w(top.raw("weighting"), "weighting");
    WeightParams wp;
    wp.alpha = w.number("alpha", wp.alpha);
    wp.mode = ParseWeightMode(w.string("mode", "formula_as_written"));
    w.finish();
    s.weighting = wp;
  }
  if (top.has("dp")) {
    Section d(top.raw("dp"), "dp");
    DpConfig dc;
    dc.noise_multiplier = d.number("noise_multiplier", dc.noise_multiplier);
    dc.clip = d.number("clip", dc.clip);
    d.finish();
    s.dp = dc;
  }
  if (top.has("platforms")) {
    const auto& arr = top.raw("platforms");
    if (!arr.is_array()) throw ConfigError("platforms: expected a list");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      try {
        s.platforms.push_back(platform_from_json(arr[i]));
      } catch (const Error& e) {
        throw ConfigError("platforms[" + std::to_string(i) + "]: " + e.what());
      }
    }
  }
  if (top.has("sync")) {
    Section y(top.raw("sync"), "sync");
    SyncConfig sc;
    if (y.has("trace")) {
      std::filesystem::path p = y.string("trace", "");
      sc.trace = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    sc.round_interval_s = y.number("round_interval_s", sc.round_interval_s);
    sc.staleness_window_s = y.number("staleness_window_s", sc.staleness_window_s);
    y.finish();
    s.sync = sc;
  }
  if (top.has("client_bandwidths")) {
    const auto& arr = top.raw("client_bandwidths");
    if (!arr.is_array()) throw ConfigError("client_bandwidths: expected a list");
    for (const auto& b : arr) {
      if (!b.is_number()) throw ConfigError("client_bandwidths: expected numbers");
      s.client_bandwidths.push_back(b.get<double>());
    }
  }
  top.finish();
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("scenario: ") + e.what(), 0);
  }
  return scenario_from_json(doc, path.parent_path());
}

nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json j;
  if (s.modes.size() == 1) {
    j["mode"] = mode_name(s.modes[0]);
  } else {
    for (Mode m : s.modes) j["mode"].push_back(mode_name(m));
  }
  j["n_clients"] = s.n_clients;
  j["rounds"] = s.rounds;
  j["seed"] = s.seed;
  j["record_wall_clock"] = s.record_wall_clock;
  j["task"] = {{"kind", task_kind_name(s.task.kind)},
               {"dim", s.task.dim},
               {"samples_per_client", s.task.samples_per_client},
               {"heterogeneity_skew", s.task.heterogeneity_skew},
               {"label_noise", s.task.label_noise}};
  j["training"] = {{"epochs", s.training.epochs}, {"lr", s.training.lr}};
  if (s.crypto) {
    j["crypto"] = {{"security_bits", s.crypto->security_bits},
                   {"frac_bits", s.crypto->codec.frac_bits},
                   {"int_bits", s.crypto->codec.int_bits},
                   {"clip_bound", s.crypto->codec.clip_bound},
                   {"n_blocks", s.crypto->n_blocks},
                   {"workers", s.crypto->workers}};
  }
  if (s.weighting) {
    j["weighting"] = {{"alpha", s.weighting->alpha},
                      {"mode", WeightModeName(s.weighting->mode)}};
  }
  if (s.dp) {
    j["dp"] = {{"noise_multiplier", s.dp->noise_multiplier}, {"clip", s.dp->clip}};
  }
  if (!s.platforms.empty()) {
    j["platforms"] = nlohmann::json::array();
    for (const auto& p : s.platforms) j["platforms"].push_back(platform_to_json(p));
  }
  if (s.sync) {
    nlohmann::json y{{"round_interval_s", s.sync->round_interval_s}};
    if (s.sync->trace) y["trace"] = s.sync->trace->generic_string();
    if (std::isfinite(s.sync->staleness_window_s)) {
      y["staleness_window_s"] = s.sync->staleness_window_s;
    }
    j["sync"] = y;
  }
  if (!s.client_bandwidths.empty()) j["client_bandwidths"] = s.client_bandwidths;
  return j;
}

}  // namespace fedcloud
