"""Exact null-equation solver: slices, blow-up localization, bounds, decay."""

import math

import numpy as np
import pytest

from wavecrit import (
    AdmissibilityError,
    CauchyData,
    CeasedSolutionError,
    ExtentError,
    GridError,
    RadialGrid,
    WitnessError,
    build_profile,
    builtin_nonlinearity,
    propagate_radial,
    push_forward,
    wave_energy,
)
from wavecrit.nullwave import (
    asymptotic_profile,
    conserved_energy_quadratic,
    detect_blowup,
    dispersion_metrics,
    null_solution,
    solve_null,
    verify_pointwise_bounds,
)

GRID = RadialGrid.uniform(8.0, 801)


def zeros(r):
    return np.zeros_like(r)


def pair(f0, f1, grid=GRID):
    return CauchyData.from_callables(grid, f0, f1)


@pytest.fixture(scope="module")
def unit():
    return build_profile(builtin_nonlinearity("const", 1.0))


@pytest.fixture(scope="module")
def identity():
    return build_profile(builtin_nonlinearity("const", 0.0))


def gaussian_well(beta, grid=GRID):
    return pair(lambda r: -beta * np.exp(-(r**2)), zeros, grid)


def passing_data(grid=GRID):
    return pair(
        lambda r: 0.3 * np.exp(-((r - 2.0) ** 2)),
        lambda r: -0.1 * np.exp(-(r**2)),
        grid,
    )


class TestSolveNull:
    @pytest.mark.parametrize("t", [0.0, 1.0, 3.0])
    def test_constant_stays_constant(self, unit, t):
        u = solve_null(pair(lambda r: 0.4 * np.ones_like(r), zeros), unit, t)
        np.testing.assert_allclose(u.values, 0.4, atol=1e-12)

    def test_zero_weight_is_free_wave(self, identity):
        data = passing_data()
        u = solve_null(data, identity, 0.8)
        free = propagate_radial(data, 0.8)
        np.testing.assert_allclose(u.values, free.values, atol=1e-12)

    def test_ceased_solution_reports_location(self, unit):
        with pytest.raises(CeasedSolutionError) as err:
            solve_null(gaussian_well(1.5), unit, 1.0)
        assert err.value.radius >= 0.0

    def test_extent_guard(self, unit):
        with pytest.raises(ExtentError):
            solve_null(passing_data(), unit, 10.0)

    def test_equation_residual_second_order(self, unit):
        # centered differences of exact slices must satisfy the equation
        # u_tt - u_rr - 2u_r/r = u_t² - u_r² to truncation accuracy
        def residual(n):
            grid = RadialGrid.uniform(8.0, n)
            data = passing_data(grid)
            h = grid.nodes[1] - grid.nodes[0]
            t = 0.7
            um = solve_null(data, unit, t - h).values
            uc = solve_null(data, unit, t).values
            up = solve_null(data, unit, t + h).values
            r = grid.nodes
            sel = slice(2, -2)
            utt = (up - 2 * uc + um)[sel] / h**2
            ut = (up - um)[sel] / (2 * h)
            ur = (uc[3:-1] - uc[1:-3]) / (2 * h)
            urr = (uc[3:-1] - 2 * uc[2:-2] + uc[1:-3]) / h**2
            res = utt - urr - 2 * ur / r[sel] - (ut**2 - ur**2)
            keep = (r[sel] > 0.5) & (r[sel] < 5.0)
            return float(np.max(np.abs(res[keep])))

        coarse, fine = residual(401), residual(801)
        assert fine <= 1e-3
        assert coarse / fine > 2.5


class TestDetectBlowup:
    def test_gaussian_well_window(self, unit):
        report = detect_blowup(gaussian_well(1.5), unit)
        assert 0.0 < report.t0 <= 1.0
        assert abs(report.t0) <= report.window + 1e-8
        assert report.side == "upper"
        assert report.x0_radius == pytest.approx(0.0, abs=0.05)

    def test_log_rate_slope_near_one(self, unit):
        report = detect_blowup(gaussian_well(1.5), unit)
        _, slope = report.log_rate_fit
        assert slope == pytest.approx(1.0, abs=0.1)

    def test_equality_case_touches_at_witness(self, unit):
        # (ru0)'(1) = 1 exactly for beta = e/2, so the touch is at the
        # cone apex: t0 = r0 = 1, x0 = 0
        report = detect_blowup(gaussian_well(math.e / 2.0), unit, fit_rate=False)
        assert report.window == pytest.approx(1.0, abs=1e-9)
        assert report.t0 == pytest.approx(1.0, abs=1e-3)
        assert report.x0_radius == pytest.approx(0.0, abs=1e-3)

    def test_symmetric_data_prefer_forward_time(self, unit):
        assert detect_blowup(gaussian_well(1.5), unit, fit_rate=False).t0 > 0.0

    def test_passing_data_rejected(self, unit):
        with pytest.raises(WitnessError):
            detect_blowup(passing_data(), unit)

    def test_fit_can_be_skipped(self, unit):
        report = detect_blowup(gaussian_well(1.5), unit, fit_rate=False)
        assert math.isnan(report.log_rate_fit[1])


class TestNullSolution:
    def test_global_validity(self, unit):
        sol = null_solution(passing_data(), unit)
        assert sol.validity == "global"
        assert sol.first_zero is None

    def test_cone_limited_records_touch(self, unit):
        sol = null_solution(gaussian_well(1.5), unit)
        assert sol.validity == "cone-limited"
        report = detect_blowup(gaussian_well(1.5), unit, fit_rate=False)
        assert sol.first_zero[0] == pytest.approx(report.t0, abs=1e-12)

    def test_v_range_before_touch(self, unit):
        sol = null_solution(gaussian_well(1.5), unit)
        t0 = sol.first_zero[0]
        for t in (0.0, 0.5 * t0):
            v = sol.v(t).values
            assert np.max(v) < unit.b

    def test_slice_derivatives_consistent(self, unit):
        from wavecrit import differentiate

        sol = null_solution(passing_data(), unit)
        u = sol.u(0.6)
        np.testing.assert_allclose(
            sol.u_r(0.6).values, differentiate(u).values, atol=1e-3
        )


class TestVerifyPointwiseBounds:
    def test_constant_solution_all_slack(self, unit):
        sol = null_solution(pair(lambda r: 0.2 * np.ones_like(r), zeros), unit)
        report = verify_pointwise_bounds(sol, np.linspace(0.0, 2.0, 8))
        assert report["checked"] > 0
        assert report["violations"] == []

    def test_gaussian_probe_sweep_clean(self, unit):
        sol = null_solution(passing_data(), unit)
        report = verify_pointwise_bounds(sol, np.linspace(0.0, 2.5, 32))
        assert report["checked"] >= 1000
        assert report["violations"] == []
        assert report["lower"] <= 0.0 <= report["upper"]

    def test_c0_formula(self, unit):
        sol = null_solution(passing_data(), unit)
        report = verify_pointwise_bounds(sol, [0.0], epsilon=0.5)
        u0 = sol.data.u0.values
        expected = (
            math.exp(float(np.max(u0)) - float(np.min(u0)))
            / 0.5
            * (1.0 + report["shell_norm"])
        )
        assert report["c0"] == pytest.approx(expected, rel=1e-12)

    def test_requires_unit_weight(self):
        profile = build_profile(builtin_nonlinearity("sin"))
        sol = null_solution(passing_data(), profile)
        with pytest.raises(AdmissibilityError):
            verify_pointwise_bounds(sol, [0.0])

    def test_requires_positive_margin(self, unit):
        sol = null_solution(gaussian_well(1.5), unit)
        with pytest.raises(AdmissibilityError):
            verify_pointwise_bounds(sol, [0.0])


class TestDispersionMetrics:
    def test_zero_data(self, unit):
        sol = null_solution(pair(zeros, zeros), unit)
        report = dispersion_metrics(sol)
        assert report["data_norm"] == 0.0
        assert report["sup_state_norm"] == 0.0
        assert report["v_energy_drift"] == 0.0
        assert report["first_line_holds"]

    def test_first_line_on_passing_scenario(self, unit):
        sol = null_solution(passing_data(), unit)
        report = dispersion_metrics(sol)
        assert report["first_line_holds"]
        assert report["sup_state_norm"] <= report["amplification_limit"]
        assert report["strichartz_ratio"] > 0.0

    def test_v_energy_constancy(self, unit):
        grid = RadialGrid.uniform(8.0, 12801)
        sol = null_solution(passing_data(grid), unit)
        report = dispersion_metrics(sol, probes=np.linspace(0.0, 2.0, 9))
        assert report["v_energy_drift"] <= 1e-6

    def test_infinite_energy_rejected(self, unit):
        sol = null_solution(pair(zeros, lambda r: 0.1 * np.ones_like(r)), unit)
        with pytest.raises(AdmissibilityError):
            dispersion_metrics(sol)


class TestConservedEnergy:
    def test_constant_field_zero(self, unit):
        data = pair(lambda r: 0.7 * np.ones_like(r), zeros)
        assert conserved_energy_quadratic(data.u0, data.u1) == pytest.approx(0.0, abs=1e-15)

    def test_matches_transformed_picture(self, unit):
        sol = null_solution(passing_data(), unit)
        u, ut = sol.u(0.7), sol.u_t(0.7)
        direct = conserved_energy_quadratic(u, ut)
        pushed = wave_energy(push_forward(CauchyData(u, ut), unit, orientation="exp"))
        assert direct == pytest.approx(pushed, rel=1e-4)

    def test_conservation_sweep(self, unit):
        grid = RadialGrid.uniform(8.0, 12801)
        sol = null_solution(passing_data(grid), unit)
        values = [
            conserved_energy_quadratic(sol.u(t), sol.u_t(t)) for t in (0.0, 0.5, 1.0, 2.0)
        ]
        drift = (max(values) - min(values)) / max(values)
        assert drift <= 1e-6

    def test_grid_mismatch(self):
        a = pair(zeros, zeros)
        b = pair(zeros, zeros, RadialGrid.uniform(8.0, 201))
        with pytest.raises(GridError):
            conserved_energy_quadratic(a.u0, b.u1)


class TestAsymptoticProfile:
    def test_free_wave_global(self, identity):
        grid = RadialGrid.uniform(10.0, 1001)
        data = pair(lambda r: 0.05 * np.exp(-(r**2)), zeros, grid)
        report = asymptotic_profile(data, identity)
        assert report["classification"] == "global"
        assert report["decay"]["ratio"] < 2.0
        assert report["scattering_coefficient"] == pytest.approx(1.0, rel=1e-12)

    def test_small_data_decay_band(self, unit):
        grid = RadialGrid.uniform(10.0, 1001)
        data = pair(lambda r: 0.05 * np.exp(-(r**2)), zeros, grid)
        report = asymptotic_profile(data, unit)
        assert report["classification"] == "global"
        assert report["decay"]["eta_max"] > 0.0
        assert report["decay"]["ratio"] < 2.0

    def test_failing_data_takes_blowup_branch(self, unit):
        data = gaussian_well(1.5)
        report = asymptotic_profile(data, unit)
        assert report["classification"] == "blow-up"
        direct = detect_blowup(data, unit)
        assert report["blowup"].t0 == pytest.approx(direct.t0, abs=1e-12)
        assert report["decay"] is None

    def test_near_boundary_excursion_flagged(self, unit):
        # margin fails by 1e-3 but the boundary excursion lives in a
        # spacetime ball smaller than the probe stride, so the extrema
        # disagree with the criterion and the verdict is downgraded
        report = asymptotic_profile(gaussian_well(1.001 * math.e / 2.0), unit)
        assert report["classification"] == "indeterminate"
        assert report["flags"]
