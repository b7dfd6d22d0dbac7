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

import pytest

import fedcloud

TOL = 2.0**-16


@pytest.fixture(scope="module")
def keys():
    return fedcloud.keygen(64, seed=7)


def test_keygen_is_deterministic(keys):
    assert keys.toy_strength
    assert fedcloud.keygen(64, seed=7).fingerprint == keys.fingerprint


def test_encode(keys):
    assert fedcloud.encode(1.5, keys) == "98304"
    assert fedcloud.encode(0.0, keys) == "0"


def test_vector_round_trip(keys):
    v = [1.0, -2.5, 0.125, 3.0]
    cv = fedcloud.encrypt_vector(keys, v, n_blocks=2, nonce_seed=3)
    assert cv.dim == 4 and cv.n_blocks == 2
    assert fedcloud.decrypt_vector(keys, cv) == pytest.approx(v, abs=TOL)
    assert fedcloud.serialized_size(keys, cv) == 5 + 4 * (2 + 16)


def test_encrypted_mean(keys):
    a = fedcloud.encrypt_vector(keys, [1.0], nonce_seed=1)
    b = fedcloud.encrypt_vector(keys, [3.0], nonce_seed=2)
    mean, ops = fedcloud.encrypted_mean(keys, [a, b])
    assert mean == pytest.approx([2.0], abs=TOL)
    assert ops.add == 1 and ops.decrypt == 1


def test_weights_and_delays():
    assert fedcloud.client_weight(2.0, 100, 4.0, alpha=0.5) == pytest.approx(0.01)
    assert fedcloud.weighted_global_update([1, 3], [[0.0], [4.0]]) == [3.0]
    one = {"platform_id": "a", "sync_latency_s": 2.0, "bandwidth_MBps": 10.0, "payload_MB": 100.0}
    assert fedcloud.total_delay([one]) == 12.0
    two = [dict(one, payload_MB=0.0), dict(one, platform_id="b", sync_latency_s=4.0)]
    assert fedcloud.weighted_sync_delay(two, [0.5, 0.5]) == 3.0


def test_run_scenario():
    report = fedcloud.run_scenario(
        {
            "mode": ["fl", "he_fl"],
            "n_clients": 2,
            "rounds": 2,
            "seed": 3,
            "task": {"kind": "linear_regression", "dim": 3, "samples_per_client": 1},
            "crypto": {"security_bits": 64},
        }
    )
    fl, he = report["experiments"]
    assert fl["rounds"][0]["leakage"]["reconstructed_fraction"] == 1.0
    assert he["rounds"][0]["leakage"]["reconstructed_fraction"] == 0.0
    assert he["key"]["non_cryptographic_strength"] is True


def test_config_errors_raise():
    with pytest.raises(fedcloud.ConfigError, match="mode"):
        fedcloud.run_scenario({"mode": "nope"})
    with pytest.raises(fedcloud.ConfigError):
        fedcloud.keygen(8)
