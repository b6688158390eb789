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
import math

import numpy as np
import pytest

import snls

SMALL = {"grid": {"n": 32}, "solver": {"dt": 0.01}}


def test_version_and_backend():
    assert snls.version() == "0.1.0"
    assert "fftw" in snls.fft_backend_version()


def test_default_config_round_trips():
    cfg = snls.default_config()
    assert cfg["grid"]["n"] == 256
    assert snls.normalize_config(cfg) == cfg
    assert snls.config_hash(cfg) == snls.config_hash({})


def test_unknown_key_names_the_key():
    with pytest.raises(snls.ConfigError, match="model.bogus"):
        snls.normalize_config({"model": {"bogus": 1}})


def test_supercritical_alpha_is_rejected():
    with pytest.raises(snls.ConfigError, match="alpha"):
        snls.normalize_config({"model": {"alpha": 6}})
    assert issubclass(snls.ConfigError, ValueError)


def test_skeleton_conserves_mass():
    out = snls.skeleton(SMALL)
    assert out["norm_h"].shape == out["times"].shape
    assert out["final_field"].dtype == np.complex128
    m0 = out["norm_h"][0] ** 2
    assert abs(out["norm_h"][-1] ** 2 - m0) <= 1e-10 * m0
    assert math.isclose(snls.mass(out["final_field"], SMALL), out["norm_h"][-1] ** 2, rel_tol=1e-12)
    assert out["summary"]["max_mass_drift"] <= 1e-10


def test_free_packet_matches_closed_form():
    cfg = {
        "grid": {"n": 256},
        "model": {"nonlinear": False},
        "noise": {"m1": 0, "m2": 0, "b_amplitudes": [], "b_widths": [], "g_amplitudes": [], "g_widths": []},
        "initial": {"wavenumber": 0.0},
        "solver": {"dt": 0.01},
    }
    out = snls.skeleton(cfg)
    n, half = 256, cfg_half(cfg)
    x = -half + 2.0 * half * np.arange(n) / n
    a = 1.0  # exp(-x^2 / 4) = exp(-x^2 / (4 a))
    t = 1.0
    exact = np.sqrt(a / (a + 1j * t)) * np.exp(-x**2 / (4.0 * (a + 1j * t)))
    assert np.max(np.abs(out["final_field"] - exact)) < 1e-4


def cfg_half(cfg):
    return snls.normalize_config(cfg)["grid"]["half_width"]


def test_blow_up_raises():
    with pytest.raises(snls.BlowUpError):
        snls.skeleton({**SMALL, "initial": {"amplitude": 1e155}})


def test_sde_is_seed_deterministic():
    cfg = {**SMALL, "seed": 3}
    a = snls.sde(cfg)
    b = snls.sde(cfg)
    assert np.array_equal(a["final_field"], b["final_field"])
    c = snls.sde({**SMALL, "seed": 4})
    assert not np.array_equal(a["final_field"], c["final_field"])


def test_sweep_rows_and_threads():
    cfg = {**SMALL, "sweep": {"epsilons": [0.2, 0.1], "n_paths": 40}, "event": {"radius": 0.05}}
    def strip(rows):
        return [{k: v for k, v in r.items() if k != "wall_seconds"} for r in rows]

    one = strip(snls.sweep({**cfg, "threads": 1}))
    two = strip(snls.sweep({**cfg, "threads": 2}))
    assert one == two
    assert [r["epsilon"] for r in one] == [0.2, 0.1]
    for r in one:
        assert 0.0 <= r["ci_lo"] <= r["p_hat"] <= r["ci_hi"] <= 1.0


def test_check_picard():
    res = snls.check("picard", SMALL)
    assert res["name"] == "picard"
    assert res["pass"] is True
    assert "picard" in snls.check_names()


def test_cli_in_process(tmp_path):
    code, out, err = snls.run_cli("skeleton", "--out", tmp_path, "--set", "grid.n=32", "--set", "solver.dt=0.01")
    assert code == 0, err
    (run,) = list(tmp_path.iterdir())
    assert (run / "trajectory.csv").exists()
    code, _, err = snls.run_cli("skeleton", "--dry-run", "--set", "model.alpha=6")
    assert code == 2
    assert "1 < alpha < 1 + 4/d" in err
