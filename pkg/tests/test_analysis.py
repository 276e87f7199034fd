"""Density, rise/fall metrics, jitter-bound scaling, sweeps."""

import numpy as np
import pytest

from fockatom import (
    AtomParams,
    PulseSpec,
    TimeGrid,
    Trajectory,
    delta_pulse_rise,
    find_optimum,
    probability_density,
    solve_markov,
    sweep_pmax,
    transduction_metrics,
)
from fockatom.analysis import _argmax_with_tiebreak

LN9 = np.log(9.0)


def _markov_delta_traj(gamma=1.0, t_arr=1.0, dt=1e-3, t_max=15.0):
    atom = AtomParams(gamma=gamma, gamma_p=gamma)
    grid = TimeGrid.from_span(0.0, t_max, dt)
    return solve_markov(atom, PulseSpec("delta", xi0=0.1, t_a=t_arr), grid)


def _rise_edge_traj(gamma, kappa, dt=2e-4, t_max=4.0):
    """Trajectory whose P is the squared delta-pulse rising edge."""
    grid = TimeGrid.from_span(0.0, t_max, dt)
    c_r, _ = delta_pulse_rise(AtomParams(gamma=gamma, gamma_p=gamma), kappa, grid)
    return Trajectory.from_amplitude(grid, c_r.astype(complex), "rise_edge",
                                     {"kappa": kappa}, check_bound=False)


# ---------------------------------------------------------------------------
# probability density
# ---------------------------------------------------------------------------

def test_density_unit_integral():
    traj = _markov_delta_traj()
    dens = probability_density(traj)
    w = np.full(len(dens), traj.dt)
    w[0] *= 0.5
    w[-1] *= 0.5
    assert abs(np.sum(w * dens) - 1.0) < 1e-12


def test_density_markov_delta_is_exponential():
    # dt = 1e-4: the trapezoid normalization carries an O(dt/2) error from
    # the probability jump at arrival
    traj = _markov_delta_traj(t_arr=1.0, dt=1e-4)
    dens = probability_density(traj)
    t = traj.times
    expected = np.where(t >= 1.0, np.exp(-(t - 1.0)), 0.0)
    assert np.abs(dens - expected).max() < 1e-4


def test_density_scale_invariance():
    traj = _markov_delta_traj()
    scaled = Trajectory(t0=traj.t0, dt=traj.dt, c=np.sqrt(2.0) * traj.c,
                        p=2.0 * traj.p, solver_id="x", params_digest="y")
    assert np.array_equal(probability_density(traj), probability_density(scaled))


def test_density_rejects_zero_trajectory():
    grid = TimeGrid.from_span(0.0, 1.0, 1e-2)
    traj = solve_markov(AtomParams(), None, grid)
    with pytest.raises(ValueError, match="no absorption event"):
        probability_density(traj)


# ---------------------------------------------------------------------------
# transduction metrics
# ---------------------------------------------------------------------------

def test_markov_delta_fall_time():
    traj = _markov_delta_traj()
    m = transduction_metrics(traj, kappa=np.inf, gamma=1.0)
    assert abs(m.fall_90_10 - LN9) / LN9 < 0.01
    assert abs(m.fall_90_10 - 2.19722) < 0.03


def test_markov_delta_rise_below_two_steps():
    traj = _markov_delta_traj(dt=1e-3)
    m = transduction_metrics(traj, kappa=np.inf, gamma=1.0)
    assert m.rise_10_90 < 2e-3


def test_rise_halves_when_kappa_doubles():
    r10 = transduction_metrics(_rise_edge_traj(1.0, 10.0), 10.0, 1.0).rise_10_90
    r20 = transduction_metrics(_rise_edge_traj(1.0, 20.0), 20.0, 1.0).rise_10_90
    assert abs(r20 / r10 - 0.5) < 0.05


def test_metrics_window_and_bound():
    traj = _markov_delta_traj()
    m = transduction_metrics(traj, kappa=10.0, gamma=1.0)
    assert m.analytic_bound == pytest.approx(1.1)
    assert m.window == pytest.approx((m.rise_10_90 + m.fall_90_10) / LN9)
    assert m.p_max == pytest.approx(0.01, rel=1e-3)
    assert not m.ambiguous


def test_metrics_flags_oscillatory_trajectory_ambiguous():
    # two comparable bumps: secondary peak above 0.8 p_max
    grid = TimeGrid.from_span(0.0, 10.0, 1e-3)
    t = grid.times
    p = np.exp(-((t - 3.0) ** 2)) + 0.9 * np.exp(-((t - 7.0) ** 2))
    traj = Trajectory(t0=0.0, dt=1e-3, c=np.sqrt(p).astype(complex), p=p,
                      solver_id="synthetic", params_digest="none")
    m = transduction_metrics(traj, kappa=1.0, gamma=1.0)
    assert m.ambiguous


def test_metrics_reject_zero():
    grid = TimeGrid.from_span(0.0, 1.0, 1e-2)
    traj = solve_markov(AtomParams(), None, grid)
    with pytest.raises(ValueError, match="no absorption event"):
        transduction_metrics(traj, 1.0, 1.0)


def test_nonmarkov_rise_floors_as_pulse_shrinks():
    # shrinking the pulse shrinks the Markov rise time without bound, while
    # the finite interaction bandwidth pins the rise at its delta-pulse floor
    from fockatom import solve_closed_form_lorentzian

    atom = AtomParams()
    kappa = 10.0
    grid = TimeGrid.from_span(0.0, 8.0, 2e-4)
    delta_resp = solve_closed_form_lorentzian(
        atom, kappa, PulseSpec("delta", xi0=0.05, t_a=2.0), grid)
    rise_floor = transduction_metrics(delta_resp, kappa, 1.0).rise_10_90
    rise_m = {}
    rise_l = {}
    for tf in (0.1, 0.01):
        pulse = PulseSpec("gaussian", tau_f=tf, t_a=2.0)
        rise_m[tf] = transduction_metrics(solve_markov(atom, pulse, grid),
                                          kappa, 1.0).rise_10_90
        rise_l[tf] = transduction_metrics(
            solve_closed_form_lorentzian(atom, kappa, pulse, grid), kappa, 1.0).rise_10_90
    assert rise_m[0.01] < 0.2 * rise_m[0.1]          # Markov rise follows the pulse
    assert rise_m[0.01] < 0.25 * rise_floor          # and undercuts the floor freely
    assert rise_l[0.01] == pytest.approx(rise_floor, rel=0.05)
    assert rise_l[0.1] > rise_l[0.01]                # shrinking toward the floor


# ---------------------------------------------------------------------------
# jitter-bound scaling
# ---------------------------------------------------------------------------

def test_rise_time_scales_inversely_with_kappa():
    kappas = np.array([5.0, 10.0, 20.0, 40.0])
    rises = np.array([
        transduction_metrics(_rise_edge_traj(1.0, k, dt=1e-4), k, 1.0).rise_10_90
        for k in kappas
    ])
    a = np.sum(rises / kappas) / np.sum(1.0 / kappas**2)
    pred = a / kappas
    r2 = 1.0 - np.sum((rises - pred) ** 2) / np.sum((rises - rises.mean()) ** 2)
    assert 1.5 <= a <= 3.0
    assert r2 > 0.99


def test_fall_time_scales_inversely_with_gamma():
    gammas = np.array([0.5, 1.0, 2.0, 4.0])
    falls = []
    for g in gammas:
        traj = _markov_delta_traj(gamma=g, t_arr=0.5, dt=5e-4, t_max=4.0 + 10.0 / g)
        falls.append(transduction_metrics(traj, kappa=100.0, gamma=g).fall_90_10)
    falls = np.array(falls)
    b = np.sum(falls * (1.0 / gammas)) / np.sum(1.0 / gammas**2)
    assert abs(b - LN9) / LN9 < 0.05


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def test_sweep_gaussian_optimum_location_and_value():
    atom = AtomParams()
    tau_f_grid = np.logspace(-2, 1, 13)
    kappa_grid = np.array([1.0, 2.0, 10.0, 100.0])
    sweep = sweep_pmax(atom, "gaussian", tau_f_grid, kappa_grid)
    tf_star, kap_star, p_star = find_optimum(sweep)
    assert 0.5 <= tf_star <= 2.0
    assert p_star > 0.96
    assert sweep.row(1.0).max() > 0.96
    # kappa = gamma row beats the weak-coupling row for the Gaussian pulse
    assert sweep.row(1.0).max() > sweep.row(100.0).max()


def test_sweep_rising_exp_strong_coupling_depresses():
    atom = AtomParams()
    tau_f_grid = np.array([1.0])
    kappa_grid = np.array([1.0, 10.0])
    sweep = sweep_pmax(atom, "rising_exp", tau_f_grid, kappa_grid)
    assert sweep.p_max[0, 0] < sweep.p_max[1, 0]


def test_sweep_records_cell_errors_and_continues():
    atom = AtomParams()
    sweep = sweep_pmax(atom, "gaussian", np.array([1.0]), np.array([1.0, 1000.0]),
                       solver="ode_rk4", dt=1e-3)
    assert sweep.status[0][0] == "ok"
    assert sweep.status[1][0].startswith("error: step too large")
    assert np.isnan(sweep.p_max[1, 0])
    assert np.isfinite(sweep.p_max[0, 0])


def test_sweep_input_validation():
    atom = AtomParams()
    with pytest.raises(ValueError, match="nonempty"):
        sweep_pmax(atom, "gaussian", np.array([]), np.array([1.0]))
    with pytest.raises(ValueError, match="ascending"):
        sweep_pmax(atom, "gaussian", np.array([2.0, 1.0]), np.array([1.0]))
    with pytest.raises(ValueError, match="solver"):
        sweep_pmax(atom, "gaussian", np.array([1.0]), np.array([1.0]), solver="magic")


def test_argmax_tiebreak_prefers_small_tau_then_kappa():
    tau = np.array([0.5, 1.0])
    kap = np.array([2.0, 3.0])
    flat = np.ones((2, 2))
    assert _argmax_with_tiebreak(tau, kap, flat) == (0.5, 2.0, 1.0)
    single = np.array([[0.7]])
    assert _argmax_with_tiebreak(np.array([1.5]), np.array([4.0]), single) == (1.5, 4.0, 0.7)


def test_sweep_single_cell():
    atom = AtomParams()
    sweep = sweep_pmax(atom, "gaussian", np.array([1.0]), np.array([1.0]))
    tf, kp, p = find_optimum(sweep)
    assert (tf, kp) == (1.0, 1.0)
    assert p > 0.95
