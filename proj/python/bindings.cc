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
#include <pybind11/pybind11.h>
#include <pybind11/iostream.h>
#include <pybind11/stl.h>

#include <iostream>

#include <string>
#include <vector>

#include "fedcloud/aggregation.h"
#include "fedcloud/cli.h"
#include "fedcloud/error.h"
#include "fedcloud/fl_runtime.h"
#include "fedcloud/he_core.h"
#include "fedcloud/sync_model.h"

namespace py = pybind11;
using namespace fedcloud;

namespace {

he::FixedPointCodec Codec(int frac_bits, int int_bits, double clip_bound) {
  he::FixedPointCodec c{frac_bits, int_bits, clip_bound};
  c.validate();
  return c;
}

std::vector<CloudPlatform> Platforms(const std::vector<py::dict>& in) {
  std::vector<CloudPlatform> out;
  for (const auto& d : in) {
    out.push_back(platform_from_json(nlohmann::json::parse(
        py::module_::import("json").attr("dumps")(d).cast<std::string>())));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "fedcloud core bindings";

  // Translators run in reverse registration order, so the base class goes
  // first. Validation and parse failures are configuration errors in Python.
  auto& base = py::register_exception<Error>(m, "FedcloudError");
  auto& config = py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", config.ptr());
  py::register_exception<ParseError>(m, "ParseError", config.ptr());

  py::class_<he::OpCounts>(m, "OpCounts")
      .def_readonly("encrypt", &he::OpCounts::encrypt)
      .def_readonly("decrypt", &he::OpCounts::decrypt)
      .def_readonly("add", &he::OpCounts::add)
      .def_readonly("scale", &he::OpCounts::scale);

  py::class_<he::KeyPair>(m, "KeyPair")
      .def_readonly("security_bits", &he::KeyPair::security_bits)
      .def_property_readonly("toy_strength", &he::KeyPair::toy_strength)
      .def_property_readonly("fingerprint",
                             [](const he::KeyPair& k) { return he::key_fingerprint(k.public_key); })
      .def_property_readonly("modulus_hex", [](const he::KeyPair& k) {
        return k.public_key.n.get_str(16);
      });

  py::class_<he::CipherVector>(m, "CipherVector")
      .def_readonly("dim", &he::CipherVector::dim)
      .def_property_readonly("n_blocks", [](const he::CipherVector& c) { return c.blocks.size(); });

  m.def("keygen",
        [](int bits, std::uint64_t seed) { return he::keygen(bits, seed); },
        py::arg("security_bits"), py::arg("seed") = 0);

  m.def("encode",
        [](double x, const he::KeyPair& kp, int frac_bits, int int_bits, double clip_bound) {
          return Codec(frac_bits, int_bits, clip_bound).encode(x, kp.public_key.n).get_str();
        },
        py::arg("x"), py::arg("keys"), py::arg("frac_bits") = 16, py::arg("int_bits") = 4,
        py::arg("clip_bound") = 8.0, "Encoded plaintext as a decimal string.");

  m.def("encrypt_vector",
        [](const he::KeyPair& kp, const std::vector<double>& v, std::size_t n_blocks,
           std::uint64_t nonce_seed, std::size_t workers) {
          he::FixedPointCodec codec;
          return he::encrypt_vector_blocked(kp.public_key, v, codec,
                                            he::BlockSpec::for_dim(v.size(), n_blocks),
                                            {nonce_seed, workers});
        },
        py::arg("keys"), py::arg("v"), py::arg("n_blocks") = 1, py::arg("nonce_seed") = 0,
        py::arg("workers") = 1);

  m.def("decrypt_vector",
        [](const he::KeyPair& kp, const he::CipherVector& cv) {
          return he::decrypt_vector(kp.secret_key, cv);
        },
        py::arg("keys"), py::arg("cv"));

  m.def("encrypted_mean",
        [](const he::KeyPair& kp, const std::vector<he::CipherVector>& cvs) {
          he::OpCounts ops;
          auto sum = encrypted_aggregate(kp.public_key, cvs, &ops);
          auto mean = finalize_mean(kp.secret_key, sum, cvs.size(), 1, &ops);
          return py::make_tuple(mean, ops);
        },
        py::arg("keys"), py::arg("updates"), "Returns (mean, op_counts).");

  m.def("serialized_size",
        [](const he::KeyPair& kp, const he::CipherVector& cv) {
          return he::serialize_cipher_vector(kp.public_key, cv).size();
        },
        py::arg("keys"), py::arg("cv"));

  m.def("client_weight",
        [](double loss, std::uint64_t data_size, double bandwidth, double alpha,
           const std::string& mode) {
          WeightParams p{alpha, mode == "inverse_loss" ? WeightMode::kInverseLoss
                                                       : WeightMode::kFormulaAsWritten};
          if (mode != "inverse_loss" && mode != "formula_as_written") {
            throw ConfigError("weighting.mode: unknown value '" + mode + "'");
          }
          return client_weight({"py", loss, data_size, bandwidth}, p);
        },
        py::arg("loss"), py::arg("data_size"), py::arg("bandwidth"), py::arg("alpha") = 0.5,
        py::arg("mode") = "formula_as_written");

  m.def("weighted_global_update",
        [](const std::vector<double>& weights, const std::vector<std::vector<double>>& updates) {
          if (weights.size() != updates.size()) throw DimensionError("one weight per update");
          std::vector<WeightedUpdate> wu;
          for (std::size_t i = 0; i < weights.size(); ++i) wu.push_back({weights[i], updates[i]});
          return weighted_global_update(wu);
        },
        py::arg("weights"), py::arg("updates"));

  m.def("total_delay",
        [](const std::vector<py::dict>& platforms) { return total_delay(Platforms(platforms)); },
        py::arg("platforms"));

  m.def("weighted_sync_delay",
        [](const std::vector<py::dict>& platforms, const std::vector<double>& weights) {
          auto p = Platforms(platforms);
          SyncWeights w;
          for (const auto& x : p) w.platform_ids.push_back(x.platform_id);
          w.weights = weights;
          return weighted_sync_delay(p, w);
        },
        py::arg("platforms"), py::arg("weights"));

  m.def("run_scenario",
        [](const std::string& scenario_json) {
          const Scenario sc = scenario_from_json(nlohmann::json::parse(scenario_json));
          std::vector<ExperimentReport> reports;
          {
            py::gil_scoped_release release;
            reports = run_all(sc);
          }
          return experiments_to_json(sc, reports, false).dump();
        },
        py::arg("scenario_json"), "Runs every mode of a scenario; returns the report as JSON text.");

  m.def("main",
        [](const std::vector<std::string>& args) {
          std::vector<const char*> argv{"fedcloud"};
          for (const auto& a : args) argv.push_back(a.c_str());
          py::scoped_ostream_redirect out(std::cout, py::module_::import("sys").attr("stdout"));
          py::scoped_ostream_redirect err(std::cerr, py::module_::import("sys").attr("stderr"));
          return run_cli(static_cast<int>(argv.size()), argv.data(), std::cout, std::cerr);
        },
        py::arg("args"), "Runs the command-line tool; returns its exit code.");
}
