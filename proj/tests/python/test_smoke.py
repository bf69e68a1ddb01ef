import math

import numpy as np
import pytest

import grasswalk as gw


def test_quadratic_walk_reaches_zero():
    res = gw.run_walk(gw.quadratic(np.zeros(10)), k=2, solver="exact", seed=7)
    assert res["loss"] == 0.0
    assert 1 <= res["rounds"] <= 2
    assert res["termination"] == "converged_exact"


def test_walk_is_monotone_and_seeded():
    loss = gw.rastrigin(np.full(12, 0.4))
    a = gw.run_walk(loss, k=3, T=3, max_rounds=40, seed=5, m=10, r=2)
    b = gw.run_walk(loss, k=3, T=3, max_rounds=40, seed=5, m=10, r=2, threads=2)
    losses = [r["loss"] for r in a["trace"]]
    assert all(y <= x for x, y in zip(losses, losses[1:]))
    assert a["trace_jsonl"] == b["trace_jsonl"]


def test_python_callable_loss():
    calls = []

    def f(x):
        calls.append(1)
        return float(np.sum((x - 1.0) ** 2))

    loss = gw.function_loss(4, f, "shifted")
    assert loss(np.ones(4)) == 0.0
    res = gw.run_walk(loss, k=2, T=2, max_rounds=200, seed=1, m=30, r=3, threads=2)
    assert res["loss"] < 1e-3
    assert len(calls) == res["loss_evals"] + 1


def test_thomson_and_stereo():
    assert gw.thomson_s2_optimum(4) == pytest.approx(3.6742346142, abs=1e-9)
    p = gw.stereo(np.array([1.0, 0.0]))
    assert p == pytest.approx([1.0, 0.0, 0.0])
    res = gw.run_walk(gw.thomson(2, 2), k=2, m=40, r=25, max_rounds=5000, seed=3)
    assert abs(res["loss"] - 0.5) < 1e-3


def test_sampling():
    b = gw.sample_uniform(6, 2, seed=3)
    assert np.allclose(b.T @ b, np.eye(2), atol=1e-12)
    x = np.array([1.0, 2.0, 0.0, -1.0])
    c = gw.sample_conditioned(x, 3, seed=4, mode="span-gaussian")
    assert np.allclose(c @ (c.T @ x), x, atol=1e-10)


def test_phi_stats_oracle():
    s = gw.phi_stats(gw.quadratic(np.array([1.0, 0.0])), k=1, samples=10000, solver="exact")
    assert abs(s["mean_hat"] - 0.5) < 0.02
    assert abs(s["delta_hat"] - 0.25) < 0.02
    with pytest.raises(gw.DegenerateError):
        gw.phi_stats(gw.quadratic(np.zeros(3)), k=2, samples=100, solver="exact")


def test_verify_and_predict():
    r = gw.verify_sin_circle(-1.0, 100000, seed=2)
    assert abs(r["delta"] - 0.25) < 0.01
    assert r["status"] == "holds"
    p = gw.predict_bounds(0.0, math.sqrt(2) * 0.1, 1.0, 1e-3)
    assert p["predicted_iterations"] == 67
    with pytest.raises(ValueError):
        gw.predict_bounds(0.1, 0.0)


def test_presets_and_cli(tmp_path):
    assert "thomson-n5" in gw.preset_names()
    s = gw.run_preset("thomson-n2", trials=5, seed=1)
    assert s["success_rate"] == 1.0
    b = gw.run_preset("blindspot-far", trials=5)
    assert b["hits"] == 0 and b["nonhitting_identical"]
    code, out, _ = gw.cli(["predict", "--delta", "0", "--theta", "0.14142135623730951",
                           "--out", str(tmp_path / "p.json")])
    assert code == 0 and "predicted_iterations=67" in out
    code, _, err = gw.cli(["run", "--k", "0", "--out", str(tmp_path / "x.jsonl")])
    assert code == 2 and "k=0" in err
