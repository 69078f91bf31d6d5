import csv
import io
import json

import numpy as np
import pytest

import gosprl


def test_env_info_riverswim():
    info = gosprl.env_info("riverswim:6")
    assert info["n_states"] == 6
    assert info["n_actions"] == 2
    assert 14.6 <= info["diameter"] <= 14.9
    assert info["communicating"]


def test_kernel_rows_are_distributions():
    k = np.array(gosprl.kernel("garnet:6,2,3,1"))
    assert k.shape == (6, 2, 6)
    np.testing.assert_allclose(k.sum(axis=2), 1.0)


def test_known_dynamics_run_meets_requirement():
    t = gosprl.run_treasure("riverswim:6", k=3, seed=1, known_dynamics=True)
    assert t["completed"]
    assert min(t["visits"]) >= 3
    assert sum(t["visits"]) == t["stopping_time"]


def test_run_config_roundtrip():
    cfg = {
        "environment": "riverswim:4",
        "requirement": {"kind": "treasure", "k": 2},
        "algorithms": ["gosprl", "random"],
        "seeds": [0, 1],
    }
    runs, summary = gosprl.run_config(cfg, workers=2)
    again, _ = gosprl.run_config(cfg)
    assert runs == again
    rows = list(csv.DictReader(io.StringIO(runs)))
    taus = [float(r["value"]) for r in rows if r["metric"] == "stopping_time" and r["algo"] == "gosprl"]
    assert len(taus) == 2
    agg = next(a for a in summary["aggregates"] if a["algo"] == "gosprl")
    assert agg["stopping_time"]["mean"] == pytest.approx(sum(taus) / 2)
    assert summary["config_hash"] == gosprl.git_blob_hash(json.dumps(cfg))


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        gosprl.env_info("moon:3")
    with pytest.raises(ValueError):
        gosprl.run_config({"environment": "riverswim:4", "algorithms": []})
    with pytest.raises(ValueError):
        gosprl.estimate_diameter("riverswim:4", eps=0.0)


def test_blob_hash():
    assert gosprl.git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391"
