import json
import math
import os
import subprocess

import numpy as np
import pytest

import svtime

STUDY = {
    "model": "ou-sv-leverage",
    "params": {"kappa_x": 0.2, "mu_x": 0.1, "kappa_a": 0.3, "mu_a": -0.2,
               "sigma": 0.4, "rho": -0.5, "alpha0": -0.2},
    "prior": {"kappa_x": [0, 2], "mu_x": [-2, 2], "kappa_a": [0, 2], "mu_a": [-3, 3],
              "sigma": [0, 2], "alpha0": [-5, 5]},
    "sampler": {"m": 4, "n_iter": 120, "n_burn": 20, "seed": 3},
    "simulate": {"x0": 0.1, "delta": 0.01, "horizon": 20, "thin": 100, "seed": 4},
}


def test_models_listed():
    assert "ou-sv-leverage" in svtime.models()
    assert svtime.model_params("const-vol-scalar") == ["theta0", "theta1", "sigma"]


def test_simulate_and_fit():
    sim = svtime.simulate_dict(STUDY)
    assert sim["times"].shape == (21,)
    assert sim["x"].shape == (2001,)
    assert sim["values"][5] == sim["x"][500]

    trace = svtime.run(STUDY, sim["times"], sim["values"])
    assert trace["draws"].shape == (100, 7)
    assert trace["names"][5] == "rho"
    assert 0.0 <= trace["acceptance"]["gamma"] <= 1.0
    assert np.all(np.isfinite(trace["loglik"]))

    again = svtime.run(STUDY, sim["times"], sim["values"])
    np.testing.assert_array_equal(trace["draws"], again["draws"])

    row = svtime.summarize("rho", trace["draws"][:, 5])
    assert row["q2.5"] <= row["median"] <= row["q97.5"]


def test_diagnostics():
    rng = np.random.default_rng(1)
    x = rng.normal(size=20000)
    r = svtime.acf(x, 5)
    assert r[0] == 1.0
    assert abs(r[1]) < 0.05
    assert abs(svtime.iact(x) - 1.0) < 0.2
    grid, dens = svtime.kde(x, 200)
    assert abs(np.sum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid)) - 1.0) < 1e-3
    assert svtime.ks_two_sample(x[:10000], x[10000:]) > 0.01


def test_time_change_and_densities():
    s = svtime.z_time(0.25, 2.0)
    assert s == pytest.approx(1.0 / 14.0)
    assert svtime.u_time(s, 2.0) == pytest.approx(0.25)
    assert svtime.log_end_density(0.0, 0.0, 1.0) == pytest.approx(-0.5 * math.log(2 * math.pi))
    t = np.linspace(0.0, 1.0, 11)
    u = t + 0.1 * np.sin(7 * t) * t * (1 - t)
    assert svtime.log_girsanov(t, u, lambda tt, uu: 1.0) == pytest.approx(0.5)


def test_errors():
    with pytest.raises(svtime.ValidationError):
        svtime.simulate(json.dumps({"model": "nope"}))
    with pytest.raises(ValueError):
        svtime.acf(np.ones(50), 5)
    bad = dict(STUDY, params=dict(STUDY["params"]), simulate={"delta": 0.01, "horizon": 100})
    bad["model"] = "const-vol-scalar"
    bad["params"] = {"theta0": 0, "theta1": -50, "sigma": 1}
    bad.pop("prior")
    with pytest.raises(svtime.NumericalError):
        svtime.simulate_dict(bad)


def test_csv(tmp_path):
    p = tmp_path / "obs.csv"
    p.write_text("value\n1.0\n1.5\n2.0\n")
    times, values = svtime.ingest_csv(str(p), spacing=0.5)
    np.testing.assert_allclose(times, [0.0, 0.5, 1.0])
    p.write_text("time,value\n0,1\n2,1\n1,1\n")
    with pytest.raises(svtime.ValidationError, match="line 4"):
        svtime.ingest_csv(str(p))


@pytest.mark.skipif("SVTIME_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_round_trip(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps(STUDY))
    cli = os.environ["SVTIME_CLI"]
    subprocess.run([cli, "simulate", "--config", str(cfg), "--out", str(tmp_path / "sim")], check=True)
    times, values = svtime.ingest_csv(str(tmp_path / "sim" / "observations.csv"),
                                      model="ou-sv-leverage")
    assert len(times) == 21
