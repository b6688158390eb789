#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
"""Python interface to the snls solvers.

Configs are plain dicts with the same layout as the JSON config files; missing
keys keep their defaults.
"""

import json

import numpy as np

from . import _core
from ._core import BlowUpError, ConfigError, check_names, fft_backend_version, version

__all__ = [
    "BlowUpError",
    "ConfigError",
    "check",
    "check_names",
    "config_hash",
    "default_config",
    "fft_backend_version",
    "mass",
    "normalize_config",
    "rate",
    "run_cli",
    "sde",
    "skeleton",
    "sweep",
    "version",
]


def _text(config):
    return json.dumps({} if config is None else config)


def default_config():
    return json.loads(_core.default_config())


def normalize_config(config=None):
    """Full validated config; raises ConfigError naming the offending key."""
    return json.loads(_core.normalize_config(_text(config)))


def config_hash(config=None):
    return _core.config_hash(_text(config))


def _trajectory(d):
    out = {k: v for k, v in d.items() if k != "summary"}
    out["summary"] = json.loads(d["summary"])
    return out


def skeleton(config=None):
    """Deterministic controlled solve. Returns times, norm_h, norm_lr (arrays),
    final_field (complex array) and a summary dict."""
    return _trajectory(_core.skeleton(_text(config)))


def sde(config=None):
    """One stochastic path with seed config["seed"]."""
    return _trajectory(_core.sde(_text(config)))


def rate(config=None):
    return json.loads(_core.rate(_text(config)))


def sweep(config=None):
    return json.loads(_core.sweep(_text(config)))


def check(name, config=None):
    return json.loads(_core.check(name, _text(config)))


def run_cli(*args):
    """Runs the command-line driver in-process; returns (exit_code, stdout, stderr)."""
    return _core.run_cli([str(a) for a in args])


def mass(field, config=None):
    """Discrete squared L2 norm of a 1-D field on the config's grid."""
    grid = normalize_config(config)["grid"]
    dx = (2.0 * grid["half_width"] / grid["n"]) ** grid["dim"]
    return float(np.sum(np.abs(field) ** 2) * dx)
