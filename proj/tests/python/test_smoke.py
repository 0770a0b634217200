import json
import os
import pathlib
import random

import pytest

import warpres

SRC = pathlib.Path(os.environ.get("WARPRES_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))
CONFIGS = SRC / "configs"


def test_chain_values_match_frozen():
    c1, c2 = warpres.chain_coefficients(1.0, 0.1)
    assert c1 == pytest.approx(0.21041120381899614, rel=1e-13)
    assert c2 == pytest.approx(0.070498174646078562, rel=1e-13)
    kappa = warpres.kappa_schedule(5, c1, c2)
    assert len(kappa) == 4
    assert kappa[-1] == pytest.approx(c2, rel=1e-12)
    assert warpres.schedule_violation(kappa, c1, c2) <= 1e-12
    assert warpres.path_gamma(5) == pytest.approx(253.59963831941593, rel=1e-12)


def test_banded_sigma_matches_dense():
    rng = random.Random(3)
    n = 60
    diag = [complex(rng.uniform(-2, 2), rng.uniform(-1, 1)) for _ in range(n)]
    sub = [complex(rng.uniform(-1, 1), 0) for _ in range(n - 1)]
    sup = [complex(rng.uniform(-1, 1), 0) for _ in range(n - 1)]
    A = warpres.Tridiag(sub, diag, sup)
    assert len(A) == n
    assert warpres.sigma_min(A) == pytest.approx(warpres.dense_sigma_min(A), rel=1e-9)


def test_bad_tridiag_rejected():
    with pytest.raises(Exception):
        warpres.Tridiag([1.0], [1.0, 2.0, 3.0], [1.0, 1.0])


def test_free_scenario_exponent_and_norm():
    p, q = warpres.predicted_exponent(str(CONFIGS / "free.conf"))
    assert p == pytest.approx(4.0 / 3.0)
    assert q == pytest.approx(1.0)
    res = warpres.cutoff_norm(str(CONFIGS / "free.conf"), ["params.h=0.1"])
    assert res["norm"] == pytest.approx(22.978165985574062, rel=1e-9)
    assert res["dominant_mode"] == 12


def test_phase_profile_runs():
    prof = warpres.phase_profile(str(CONFIGS / "profile.conf"))
    assert prof["a"] > prof["r1"] > 0
    assert prof["phase_max"] > 0
    assert len(prof["r"]) == len(prof["phi"])


def test_bad_override_raises_config_error():
    with pytest.raises(warpres.ConfigError):
        warpres.resolved_config(str(CONFIGS / "free.conf"), ["params.h=abc"])


def test_run_command_chain(tmp_path):
    code, line, run_dir = warpres.run_command("chain", str(CONFIGS / "chain.conf"), out_dir=str(tmp_path / "chain"))
    assert code == 0
    assert "gamma" in line
    manifest = json.loads((pathlib.Path(run_dir) / "manifest.json").read_text())
    assert manifest["command"] == "chain"


def test_run_command_bad_input_is_exit_2(tmp_path):
    code, _, _ = warpres.run_command("chain", str(CONFIGS / "chain.conf"), overrides=["chain.beta=oops"],
                                     out_dir=str(tmp_path / "bad"))
    assert code == 2
