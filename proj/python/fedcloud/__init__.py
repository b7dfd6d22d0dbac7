# Copyright 2026 The fedcloud Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Python bindings for the fedcloud simulator."""

import json as _json

from fedcloud._core import (
    CipherVector,
    ConfigError,
    FedcloudError,
    KeyPair,
    OpCounts,
    client_weight,
    decrypt_vector,
    encode,
    encrypt_vector,
    encrypted_mean,
    keygen,
    main,
    serialized_size,
    total_delay,
    weighted_global_update,
    weighted_sync_delay,
)


def run_scenario(scenario):
    """Runs a scenario given as a dict; returns the report as a dict."""
    from fedcloud._core import run_scenario as _run

    return _json.loads(_run(_json.dumps(scenario)))


__all__ = [
    "CipherVector",
    "ConfigError",
    "FedcloudError",
    "KeyPair",
    "OpCounts",
    "client_weight",
    "decrypt_vector",
    "encode",
    "encrypt_vector",
    "encrypted_mean",
    "keygen",
    "main",
    "run_scenario",
    "serialized_size",
    "total_delay",
    "weighted_global_update",
    "weighted_sync_delay",
]
