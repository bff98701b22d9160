"""Finite-difference reference solver: accuracy, energy, blow-up brackets."""

import json

import numpy as np
import pytest

from wavecrit import (
    CauchyData,
    ConfigError,
    ConvergenceError,
    Field3D,
    RadialField,
    RadialGrid,
    build_profile,
    builtin_nonlinearity,
    convergence_order,
    discrete_energy,
    fd_solve,
    propagate_radial,
)
from wavecrit.focusing import soliton
from wavecrit.nullwave import detect_blowup, solve_null

GRID = RadialGrid.uniform(8.0, 801)


def zeros(r):
    return np.zeros_like(r)


def pair(f0, f1, grid=GRID):
    return CauchyData.from_callables(grid, f0, f1)


def gaussian(grid=GRID):
    return pair(lambda r: np.exp(-((r - 2.0) ** 2)), zeros, grid)


def probe(run, radii):
    return np.interp(radii, run.radii, run.final)


# ---------------------------------------------------------------------------
# free-mode accuracy


def test_constant_data_reproduced_to_machine_precision():
    run = fd_solve(pair(lambda r: np.ones_like(r), zeros), None, 1.0, h=0.02, r_max=4.0)
    assert run.status == "completed"
    assert np.max(np.abs(run.final - 1.0)) < 1e-12


def test_free_gaussian_matches_exact_propagator_at_second_order():
    data = gaussian()
    exact = propagate_radial(data, 1.0)
    rs = np.linspace(0.0, 5.0, 41)
    target = np.interp(rs, exact.grid.nodes, exact.values)
    errors = []
    for h in (0.04, 0.02, 0.01):
        run = fd_solve(data, None, 1.0, h=h, r_max=7.0)
        errors.append(np.max(np.abs(probe(run, rs) - target)))
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all(orders > 1.7) and np.all(orders < 2.3)


def test_staggered_energy_conserved_in_free_mode():
    run = fd_solve(gaussian(), None, 10.0, h=0.05, r_max=8.0)
    report = discrete_energy(run)
    assert report["drift"] < 1e-4  # measured 1.3e-15: exact for frozen boundary
    assert report["values"].size > 100


# ---------------------------------------------------------------------------
# null-form mode against the exact solver


@pytest.fixture(scope="module")
def unit_profile():
    return build_profile(builtin_nonlinearity("const", 1.0))


@pytest.fixture(scope="module")
def sin_profile():
    return build_profile(builtin_nonlinearity("sin"))


def small_data(grid=GRID):
    return pair(
        lambda r: 0.3 * np.exp(-((r - 2.0) ** 2)),
        lambda r: -0.1 * np.exp(-(r**2)),
        grid,
    )


def test_null_mode_converges_to_exact_solution(unit_profile):
    data = small_data()
    exact = solve_null(data, unit_profile, 1.0)
    rs = np.linspace(0.0, 5.0, 41)
    target = np.interp(rs, exact.grid.nodes, exact.values)
    errors = []
    for h in (0.04, 0.02, 0.01):
        run = fd_solve(data, ("null", lambda u: np.ones_like(u)), 1.0, h=h, r_max=7.0)
        errors.append(np.max(np.abs(probe(run, rs) - target)))
    assert errors[0] < 3e-4  # frozen: 1.6e-4 / 4.0e-5 / 9.5e-6
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all(orders > 1.7) and np.all(orders < 2.3)


def test_null_mode_sin_weight(sin_profile):
    data = small_data()
    exact = solve_null(data, sin_profile, 1.0)
    rs = np.linspace(0.0, 5.0, 41)
    target = np.interp(rs, exact.grid.nodes, exact.values)
    errs = []
    for h in (0.02, 0.01):
        run = fd_solve(data, ("null", np.sin), 1.0, h=h, r_max=7.0)
        errs.append(np.max(np.abs(probe(run, rs) - target)))
    assert errs[0] < 2e-4 and errs[1] < 0.35 * errs[0]  # frozen: 7.0e-5 -> 1.7e-5


# ---------------------------------------------------------------------------
# convergence_order


FREE_SCENARIO = {
    "u0": lambda r: np.exp(-((r - 2.0) ** 2)),
    "u1": lambda r: np.zeros_like(r),
    "rhs": None,
    "horizon": 1.0,
    "r_max": 7.0,
}


def test_convergence_order_with_reference():
    exact = propagate_radial(gaussian(), 1.0)
    scenario = dict(
        FREE_SCENARIO,
        reference=lambda r: np.interp(r, exact.grid.nodes, exact.values),
    )
    p = convergence_order(scenario, [0.04, 0.02, 0.01])
    assert 1.8 < p < 2.2  # frozen: 2.001


def test_convergence_order_reference_free():
    scenario = dict(FREE_SCENARIO)
    p = convergence_order(scenario, [0.08, 0.04, 0.02, 0.01])
    assert 1.7 < p < 2.3


def test_convergence_order_needs_three_resolutions():
    with pytest.raises(ConfigError):
        convergence_order(FREE_SCENARIO, [0.04, 0.02])


def test_convergence_order_rejects_non_decreasing_sequence():
    with pytest.raises(ConfigError):
        convergence_order(FREE_SCENARIO, [0.04, 0.04, 0.02])


def test_convergence_order_reference_free_needs_constant_ratio():
    with pytest.raises(ConfigError):
        convergence_order(FREE_SCENARIO, [0.04, 0.02, 0.012])


def test_degenerate_study_rejected_as_out_of_regime():
    # constant data are reproduced exactly; errors are rounding noise with
    # no order, and the study must refuse to quote one
    scenario = {
        "u0": lambda r: np.ones_like(r),
        "u1": lambda r: np.zeros_like(r),
        "rhs": None,
        "horizon": 1.0,
        "r_max": 4.0,
        "reference": lambda r: np.ones_like(r),
    }
    with pytest.raises(ConvergenceError, match="asymptotic"):
        convergence_order(scenario, [0.04, 0.02, 0.01])


# ---------------------------------------------------------------------------
# blow-up detection


@pytest.fixture(scope="module")
def ground():
    return soliton("ground", 4)


def grown_soliton_data(scale, grid):
    g = soliton("ground", 4)
    return CauchyData(
        RadialField(grid, scale * g(grid.nodes)),
        RadialField(grid, np.zeros(grid.n)),
    )


def test_detection_time_nondecreasing_in_threshold():
    grid = RadialGrid.uniform(12.0, 481)
    data = grown_soliton_data(1.2, grid)
    detections = []
    for threshold in (1e2, 1e4, 1e6, 1e8):
        run = fd_solve(data, ("power", 4, 1), 10.0, h=0.025, threshold=threshold)
        assert run.status == "blew-up"
        detections.append(run.t_detect)
    assert all(a <= b + 1e-12 for a, b in zip(detections, detections[1:]))
    assert detections[-1] < 10.0


def test_power_runs_without_threshold_go_unstable_not_silent():
    grid = RadialGrid.uniform(12.0, 241)
    run = fd_solve(grown_soliton_data(1.2, grid), ("power", 4, 1), 10.0, h=0.05,
                   threshold=np.inf)
    assert run.status == "unstable"
    assert run.step_index is not None


def test_detection_brackets_exact_blowup_time(unit_profile):
    # the exact solver puts the first touch at t0 inside a window radius r0;
    # detection must land in [t0 - delta, r0 + delta] with delta shrinking
    data = pair(lambda r: -2.2 * np.exp(-(r**2)), zeros)
    report = detect_blowup(data, unit_profile)
    t0, r0 = report.t0, report.window
    overshoots = []
    for h in (0.02, 0.01):
        run = fd_solve(data, ("null", lambda u: np.ones_like(u)), 1.0, h=h, r_max=4.0)
        assert run.status == "blew-up"
        assert run.t_detect >= t0 - 0.05
        overshoots.append(max(run.t_detect - r0, t0 - run.t_detect, 0.0))
    assert overshoots[1] < overshoots[0]  # frozen: 0.030 -> 0.016
    assert overshoots[0] < 0.05


def test_defocusing_sign_stays_bounded():
    grid = RadialGrid.uniform(12.0, 241)
    run = fd_solve(grown_soliton_data(1.2, grid), ("power", 4, -1), 6.0, h=0.05)
    assert run.status == "completed"
    assert np.max(np.abs(run.final)) < 1.3


# ---------------------------------------------------------------------------
# validation and serialization


def test_cfl_cap_enforced():
    with pytest.raises(ConfigError):
        fd_solve(gaussian(), None, 1.0, h=0.02, cfl=0.95)


def test_rhs_specs_validated():
    data = gaussian()
    for bad in ("banana", ("power", -1, 1), ("power", 4, 3), ("null",), 42):
        with pytest.raises(ConfigError):
            fd_solve(data, bad, 1.0, h=0.04)


def test_horizon_and_extent_validated():
    with pytest.raises(ConfigError):
        fd_solve(gaussian(), None, 0.0, h=0.04)
    with pytest.raises(ConfigError):
        fd_solve(gaussian(), None, 1.0, h=0.04, r_max=20.0)


def test_radial_data_required():
    bump = Field3D(fn=lambda p: np.exp(-np.sum(p * p, axis=1)), support_radius=6.0)
    with pytest.raises(ConfigError):
        fd_solve(CauchyData(bump, bump), None, 1.0, h=0.04)


def test_snapshot_sampling_and_write(tmp_path):
    run = fd_solve(gaussian(), None, 1.0, h=0.04, r_max=6.0,
                   snapshot_times=[0.0, 0.5, 1.0])
    t, u = run.sample(0.5)
    assert abs(t - 0.5) < run.k
    assert u.shape == run.radii.shape

    first, second = tmp_path / "a", tmp_path / "b"
    run.write(first)
    run.write(second)
    meta = json.loads((first / "run.json").read_text())
    assert meta["status"] == "completed"
    assert (first / "run.json").read_bytes() == (second / "run.json").read_bytes()
    csvs = sorted(first.glob("snapshot_*.csv"))
    assert len(csvs) == len(run.snapshot_times)
    loaded = np.loadtxt(csvs[0], delimiter=",", skiprows=1)
    assert loaded.shape[1] == 2
