import math
import os
import subprocess

import pytest

import permasim


def ideal(**extra):
    cfg = {
        "sim.duration_days": 2,
        "topology.spots": 8,
        "topology.redundancy": 3,
        "fault.pb0": 0,
        "lora.base_loss": 0,
        "nvis.base_loss": 0,
        "nvis.availability_min": 1,
        "nvis.availability_max": 1,
    }
    cfg.update(extra)
    return cfg


def test_closed_forms():
    assert [permasim.pbft_message_count(n) for n in (4, 5, 10)] == [24, 40, 180]
    assert permasim.fqc_message_count(7) == 28
    assert [permasim.byzantine_tolerance(n) for n in (4, 5, 10)] == [1, 1, 3]
    assert permasim.superadditive_success([0.5, 0.5], 1.2) == pytest.approx(1 - 0.5**2.4)
    assert permasim.superposed_success(0.3, 0.7, 0.0) == pytest.approx(0.7)


def test_statistics():
    mean, half = permasim.mean_ci99([0.5, 0.7])
    assert mean == pytest.approx(0.6)
    assert half == pytest.approx(6.37, abs=1e-2)
    assert permasim.t_quantile(0.995, 29) == pytest.approx(2.756, abs=1e-3)
    with pytest.raises(ValueError):
        permasim.mean_ci99([0.5])


def test_modes():
    modes = permasim.modes()
    assert len(modes) == 9
    assert modes[0] == ("Standard", "standard")


@pytest.mark.parametrize("social,consensus", [(s, c) for s in ("none", "classical", "quantum")
                                              for c in ("none", "classical", "quantum")])
def test_ideal_run(social, consensus):
    stats = permasim.run(ideal(**{"mode.social": social, "mode.consensus": consensus}), seed=3)
    assert stats["transactions"] == 8 * 48
    assert stats["str"] == 1.0


def test_run_is_deterministic():
    cfg = {"sim.duration_days": 2, "mode.consensus": "classical", "topology.redundancy": 4}
    a = permasim.run(cfg, seed=5)
    b = permasim.run(cfg, seed=5)
    assert a["trace_hash"] == b["trace_hash"]
    assert a["str"] == b["str"]
    assert 0.0 <= a["str"] <= 1.0


def test_config_errors():
    with pytest.raises(permasim.ConfigError) as err:
        permasim.run({"fault.pb0": 1.5})
    assert "fault.pb0" in str(err.value)
    with pytest.raises(ValueError):
        permasim.normalize_config("no.such.key = 1\n")
    text = permasim.default_config()
    assert "fault.pb0 = 0.01" in text
    assert permasim.normalize_config("") == text


def test_sweep_matches_cli(tmp_path):
    base = {"topology.concentrators": 5}
    res = permasim.sweep(grid="usecase", modes="standard", reps=2, profile="desk", jobs=2,
                         config=base, out_raw=str(tmp_path / "raw.csv"), out_mesh=str(tmp_path / "mesh.csv"))
    assert len(res["raw"]) == 60
    assert len(res["mesh"]) == 30
    rows = permasim.load_mesh(str(tmp_path / "mesh.csv"))
    assert [r["str_mean"] for r in rows] == [r["str_mean"] for r in res["mesh"]]
    (label, mx, mean), = permasim.summarize(str(tmp_path / "mesh.csv"))
    assert label == "Standard"
    assert mx == max(r["str_mean"] for r in rows)
    assert mean == pytest.approx(sum(r["str_mean"] for r in rows) / 30)

    sim = os.environ.get("PERMASIM_SIM")
    if not sim:
        pytest.skip("sim executable not provided")
    subprocess.run([sim, "sweep", "--grid", "usecase", "--modes", "standard", "--reps", "2",
                    "--profile", "desk", "--jobs", "1", "--quiet",
                    "--out-raw", str(tmp_path / "cli_raw.csv"), "--out-mesh", str(tmp_path / "cli_mesh.csv")],
                   check=True)
    assert (tmp_path / "cli_raw.csv").read_bytes() == (tmp_path / "raw.csv").read_bytes()
    assert (tmp_path / "cli_mesh.csv").read_bytes() == (tmp_path / "mesh.csv").read_bytes()
