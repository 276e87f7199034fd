"""Deterministic output files: digests, lossless floats, atomic writes."""

import json

import numpy as np

from fockatom import AtomParams, PulseSpec, TimeGrid, solve_markov
from fockatom.serialize import params_digest, write_csv, write_trajectory


def test_params_digest_is_stable_and_order_free():
    a = params_digest({"x": 1.0, "y": [1, 2]})
    b = params_digest({"y": [1, 2], "x": 1.0})
    assert a == b
    assert params_digest({"x": 1.0000001}) != a


def test_csv_floats_round_trip_losslessly(tmp_path):
    rng = np.random.default_rng(3)
    col = rng.standard_normal(50) * 10.0 ** rng.integers(-12, 12, size=50)
    path = tmp_path / "vals.csv"
    write_csv(path, ["x"], [col])
    back = np.loadtxt(path, skiprows=1)
    assert np.array_equal(back, col)


def test_trajectory_bundle(tmp_path):
    grid = TimeGrid.from_span(0.0, 2.0, 1e-2)
    traj = solve_markov(AtomParams(), PulseSpec("gaussian", tau_f=0.3, t_a=1.0), grid)
    base = tmp_path / "traj"
    write_trajectory(base, traj)
    data = np.loadtxt(f"{base}.csv", delimiter=",", skiprows=1)
    assert data.shape == (grid.n, 4)
    assert np.array_equal(data[:, 3], traj.p)
    meta = json.loads((tmp_path / "traj.json").read_text())
    assert meta["solver_id"] == "markov"
    assert meta["grid"]["n"] == grid.n
    assert "created_at" in meta and "code_version" in meta


def test_identical_runs_identical_bytes(tmp_path):
    grid = TimeGrid.from_span(0.0, 2.0, 1e-2)
    pulse = PulseSpec("gaussian", tau_f=0.3, t_a=1.0)
    for name in ("a", "b"):
        write_trajectory(tmp_path / name, solve_markov(AtomParams(), pulse, grid))
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_sweep_csv_deterministic(tmp_path):
    from fockatom import sweep_pmax
    from fockatom.serialize import write_sweep

    tau = np.array([0.5, 1.0])
    kap = np.array([1.0, 10.0])
    for name in ("s1", "s2"):
        sweep = sweep_pmax(AtomParams(), "gaussian", tau, kap)
        write_sweep(tmp_path / name, sweep)
    assert (tmp_path / "s1.csv").read_bytes() == (tmp_path / "s2.csv").read_bytes()
