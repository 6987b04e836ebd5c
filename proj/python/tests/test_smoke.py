import json
import math

import numpy as np
import pytest

import exittime as et


def test_brownian_solution():
    sde = et.brownian_periodic_drift(sigma=1.0, period=1.0)
    grid = et.make_grid(et.ExitDomain(0.0, 1.0), 1.0, 99, 4)
    tau, report = et.solve_expected_duration(sde, grid, "direct", tol_F=1e-12)
    assert tau.shape == (5, 99)
    x = np.asarray(grid.nodes())
    assert np.max(np.abs(tau - x * (1 - x))) < 1e-3
    assert report["converged"]


def test_bad_method_raises():
    sde = et.duffing(omega=0.05, sigma=0.3)
    grid = et.make_grid(et.ExitDomain(-1.0, 3.0), sde.period, 20, 8)
    with pytest.raises(et.ExitTimeError):
        et.solve_expected_duration(sde, grid, "newton")


def test_monte_carlo_and_bounds():
    sde = et.brownian_periodic_drift(sigma=1.0, period=1.0)
    cfg = et.McConfig()
    cfg.dt = 1e-4
    cfg.n_paths = 200
    cfg.seed = 5
    stats = et.estimate_expected_exit_curve(sde, et.ExitDomain(0.0, 1.0), 0.0, [0.5], cfg)
    assert abs(stats[0].mean - 0.25) < 4 * stats[0].std_error + 0.01
    a, b = et.moment_bounds(0.5, 1.0)
    assert a == pytest.approx(4.0)
    with pytest.raises(et.ExitTimeError):
        et.moment_bounds(1.0, 1.0)


def test_survival_matches_closed_form():
    sde = et.brownian_periodic_drift(sigma=1.0, period=1.0)
    grid = et.make_grid(et.ExitDomain(0.0, 1.0), 1.0, 199, 400)
    assert et.survival_duration(sde, grid, 0.0, 99, 1e-10) == pytest.approx(0.25, rel=0.01)


def test_sweep_decreasing():
    out = et.sweep_sigma([0.3, 0.5], n_x=60, omega=0.05, n_t=64)
    assert [r.sigma for r in out] == [0.3, 0.5]
    assert all(r.converged for r in out)
    assert out[0].tau_at_one > out[1].tau_at_one


def test_run(tmp_path):
    cfg = {
        "mode": "pde",
        "sde": {"family": "periodic_ou", "params": {"alpha": 1.0, "s_amp": 0.5, "omega": 2 * math.pi, "sigma": 1.0}},
        "domain": {"left": -1.0, "right": 1.0},
        "grid": {"n_x": 99, "n_t": 50},
    }
    summary = json.loads(et.run(json.dumps(cfg), str(tmp_path)))
    assert (tmp_path / "tau.csv").exists()
    assert summary["mode"] == "pde"
