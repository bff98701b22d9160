"""Second-order finite-difference reference solver for both radial equations.

Everything here is deliberately independent of the exact solvers: the scheme
works on the substitution w = r u, for which the radial Laplacian becomes a
plain second derivative and the origin condition is w(0, t) = 0.  Runs are
used as cross-checks only; no analytic structure of either equation enters.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray
from scipy.interpolate import CubicSpline

from .errors import ConfigError, ConvergenceError
from .freewave import CauchyData

__all__ = [
    "FDRun",
    "convergence_order",
    "discrete_energy",
    "fd_solve",
]

DEFAULT_THRESHOLD = 1.0e8
MAX_CFL = 0.9

RhsSpec = Union[None, Tuple[str, Callable], Tuple[str, float, int]]


@dataclass(frozen=True)
class FDRun:
    """One leapfrog run on w = r u: snapshots, status, and energy history.

    status is "completed", "blew-up" (sup|u| crossed the threshold at
    t_detect), or "unstable" (non-finite values at step_index).
    """

    scheme: str
    h: float
    k: float
    radii: NDArray
    snapshot_times: NDArray
    snapshots: NDArray
    status: str
    horizon: float
    threshold: float
    t_detect: Optional[float] = None
    step_index: Optional[int] = None
    energy_times: NDArray = field(default_factory=lambda: np.zeros(0))
    energy_values: NDArray = field(default_factory=lambda: np.zeros(0))

    def sample(self, t: float) -> Tuple[float, NDArray]:
        """Snapshot nearest to time t, as (actual time, u values)."""
        idx = int(np.argmin(np.abs(self.snapshot_times - t)))
        return float(self.snapshot_times[idx]), self.snapshots[idx]

    @property
    def final(self) -> NDArray:
        return self.snapshots[-1]

    def write(self, out_dir) -> Path:
        """Emit run metadata JSON plus one CSV per snapshot time."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        meta = {
            "h": self.h,
            "horizon": self.horizon,
            "k": self.k,
            "n_nodes": int(self.radii.size),
            "r_max": float(self.radii[-1]),
            "scheme": self.scheme,
            "status": self.status,
            "step_index": self.step_index,
            "t_detect": self.t_detect,
            "threshold": self.threshold,
        }
        (out / "run.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
        for i, (t, u) in enumerate(zip(self.snapshot_times, self.snapshots)):
            np.savetxt(
                out / f"snapshot_{i:03d}.csv",
                np.column_stack([self.radii, u]),
                delimiter=",",
                header=f"r,u at t={t!r}",
            )
        return out


def _normalize_rhs(rhs: RhsSpec):
    """Return (mode, f, exponent, sign) with mode in free | null | power."""
    if rhs is None or rhs == "free":
        return "free", None, 0.0, 0
    if not isinstance(rhs, tuple) or not rhs:
        raise ConfigError("rhs must be None, 'free', ('null', f) or ('power', N, sign)")
    if rhs[0] == "null":
        if len(rhs) != 2 or not callable(rhs[1]):
            raise ConfigError("null-form rhs needs a callable: ('null', f)")
        return "null", rhs[1], 0.0, 0
    if rhs[0] == "power":
        if len(rhs) != 3:
            raise ConfigError("power rhs needs ('power', N, sign)")
        exponent, sign = float(rhs[1]), int(rhs[2])
        if exponent <= 0:
            raise ConfigError("power rhs needs N > 0", exponent=exponent)
        if sign not in (-1, 1):
            raise ConfigError("power rhs sign must be +1 (self-amplifying) or -1")
        return "power", None, exponent, sign
    raise ConfigError(f"unknown rhs family {rhs[0]!r}")


def _origin_estimate(w: NDArray, h: float) -> float:
    # u(0) from w = r u: (4 w_1 - w_2) / (2h) is O(h^2) and avoids 0/0.
    return (4.0 * w[1] - w[2]) / (2.0 * h)


def _u_of(w: NDArray, radii: NDArray, h: float) -> NDArray:
    u = np.empty_like(w)
    u[1:] = w[1:] / radii[1:]
    u[0] = _origin_estimate(w, h)
    return u


def _u_r(u: NDArray, h: float) -> NDArray:
    du = np.empty_like(u)
    du[1:-1] = (u[2:] - u[:-2]) / (2.0 * h)
    du[0] = 0.0
    du[-1] = (u[-1] - u[-2]) / h
    return du


def _solve_arrays(
    radii: NDArray,
    w0: NDArray,
    w1: NDArray,
    rhs: RhsSpec,
    horizon: float,
    cfl: float,
    threshold: float,
    snapshot_times,
) -> FDRun:
    mode, f, exponent, sign = _normalize_rhs(rhs)
    h = float(radii[1] - radii[0])
    if not 0.0 < cfl <= MAX_CFL:
        raise ConfigError("CFL ratio must lie in (0, 0.9]", cfl=cfl)
    if horizon <= 0:
        raise ConfigError("horizon must be positive", horizon=horizon)
    n_steps = max(1, int(np.ceil(horizon / (cfl * h) - 1e-12)))
    k = horizon / n_steps

    if snapshot_times is None:
        snapshot_times = np.linspace(0.0, horizon, 9)
    snap_steps = sorted({int(round(t / k)) for t in np.atleast_1d(snapshot_times)})

    def rhs_w(w: NDArray, w_t: NDArray) -> NDArray:
        # r * nonlinearity(u, u_t, u_r); returns 0 identically in free mode.
        # Overflow past the threshold is expected and caught as non-finite.
        if mode == "free":
            return 0.0
        with np.errstate(over="ignore", invalid="ignore"):
            u = _u_of(w, radii, h)
            if mode == "power":
                return sign * np.abs(u) ** exponent * w
            ut = _u_of(w_t, radii, h)
            ur = _u_r(u, h)
            return radii * f(u) * (ut * ut - ur * ur)

    def lap(w: NDArray) -> NDArray:
        out = np.zeros_like(w)
        out[1:-1] = (w[2:] - 2.0 * w[1:-1] + w[:-2]) / (h * h)
        return out

    taken_times, taken = [], []
    if 0 in snap_steps:
        taken_times.append(0.0)
        taken.append(_u_of(w0, radii, h))

    w_prev = w0.copy()
    w_prev[0] = 0.0
    # Taylor first step: second order, uses the prescribed velocity exactly.
    w_cur = w_prev + k * w1 + 0.5 * k * k * (lap(w_prev) + rhs_w(w_prev, w1))
    w_cur[0] = 0.0
    # Outer node frozen at its initial value: any reflection stays outside
    # probed radii when r_max >= probe + horizon, and the free scheme then
    # conserves its staggered energy exactly.
    w_cur[-1] = w_prev[-1]

    status, t_detect, step_index = "completed", None, None
    energy_times = np.empty(n_steps)
    energy_values = np.empty(n_steps)
    energy_times[0] = 0.5 * k
    energy_values[0] = _pair_energy(w_prev, w_cur, h, k)
    en_count = 1
    if 1 in snap_steps:
        taken_times.append(k)
        taken.append(_u_of(w_cur, radii, h))

    for j in range(1, n_steps):
        with np.errstate(over="ignore", invalid="ignore"):
            w_t = (w_cur - w_prev) / k
            accel = lap(w_cur) + rhs_w(w_cur, w_t)
            w_next = 2.0 * w_cur - w_prev + k * k * accel
            if mode == "null":
                # u_t enters the source: one predictor, two centered correctors.
                for _ in range(2):
                    w_t = (w_next - w_prev) / (2.0 * k)
                    accel = lap(w_cur) + rhs_w(w_cur, w_t)
                    w_next = 2.0 * w_cur - w_prev + k * k * accel
        w_next[0] = 0.0
        w_next[-1] = w_cur[-1]

        t_next = (j + 1) * k
        if not np.all(np.isfinite(w_next)):
            status, step_index = "unstable", j + 1
            break
        energy_times[j] = (j + 0.5) * k
        energy_values[j] = _pair_energy(w_cur, w_next, h, k)
        en_count = j + 1
        u_next = _u_of(w_next, radii, h)
        if j + 1 in snap_steps:
            taken_times.append(t_next)
            taken.append(u_next)
        if np.max(np.abs(u_next)) > threshold:
            status, t_detect = "blew-up", t_next
            break
        w_prev, w_cur = w_cur, w_next

    if not taken:
        taken_times = [0.0]
        taken = [_u_of(w0, radii, h)]
    return FDRun(
        scheme="leapfrog on w = r u",
        h=h,
        k=k,
        radii=radii,
        snapshot_times=np.asarray(taken_times),
        snapshots=np.asarray(taken),
        status=status,
        horizon=horizon,
        threshold=threshold,
        t_detect=t_detect,
        step_index=step_index,
        energy_times=energy_times[:en_count],
        energy_values=energy_values[:en_count],
    )


def _pair_energy(w_a: NDArray, w_b: NDArray, h: float, k: float) -> float:
    # Staggered leapfrog invariant: exactly conserved by the free scheme.
    kinetic = np.sum(((w_b - w_a) / k) ** 2)
    grad = np.sum(np.diff(w_a) * np.diff(w_b)) / (h * h)
    return 4.0 * np.pi * h * 0.5 * (kinetic + grad)


def fd_solve(
    data: CauchyData,
    rhs: RhsSpec,
    horizon: float,
    h: float,
    cfl: float = 0.8,
    threshold: float = DEFAULT_THRESHOLD,
    snapshot_times=None,
    r_max: Optional[float] = None,
) -> FDRun:
    """Leapfrog the requested equation to the horizon or until blow-up.

    The data are resampled onto a uniform step-h grid through their moment
    splines, so velocities carrying a 1/r pole are handled exactly.  Choose
    the data grid with r_max at least probe radius + horizon; the outflow
    boundary is then immaterial for probed values.
    """
    if data.symmetry != "radial":
        raise ConfigError("the reference solver is radial only")
    grid_max = data.grid.r_max
    r_top = grid_max if r_max is None else float(r_max)
    if r_top > grid_max + 1e-12:
        raise ConfigError(
            "data are not resolved out to the requested domain",
            requested=r_top,
            available=grid_max,
        )
    n = int(np.floor(r_top / h + 1e-9)) + 1
    radii = h * np.arange(n)
    nodes = data.grid.nodes
    w0 = CubicSpline(nodes, data.u0.moment())(radii)
    w1 = CubicSpline(nodes, data.u1.moment())(radii)
    return _solve_arrays(radii, w0, w1, rhs, horizon, cfl, threshold, snapshot_times)


def discrete_energy(run: FDRun) -> dict:
    """Staggered energy history with its relative drift."""
    values = run.energy_values
    scale = max(abs(values[0]), 1e-300)
    return {
        "times": run.energy_times,
        "values": values,
        "drift": float(np.max(np.abs(values - values[0])) / scale),
    }


def _scenario_arrays(scenario: Mapping, radii: NDArray):
    if "w0" in scenario:
        w0 = np.asarray(scenario["w0"](radii), dtype=float)
    else:
        w0 = radii * np.asarray(scenario["u0"](radii), dtype=float)
    if "w1" in scenario:
        w1 = np.asarray(scenario["w1"](radii), dtype=float)
    else:
        w1 = radii * np.asarray(scenario["u1"](radii), dtype=float)
    return w0, w1


def convergence_order(scenario: Mapping, hs: Sequence[float]) -> float:
    """Observed order from successive errors over a decreasing h-sequence.

    The scenario maps keys u0/u1 (or moment callables w0/w1), rhs, horizon,
    r_max, and optionally probe_r, cfl, and a reference callable giving the
    exact profile at the horizon.  Without a reference the three finest runs
    are compared pairwise (Richardson style), which requires a constant
    refinement ratio.
    """
    hs = [float(h) for h in hs]
    if len(hs) < 3:
        raise ConfigError("need at least three resolutions", count=len(hs))
    for a, b in zip(hs, hs[1:]):
        if b >= a:
            raise ConfigError("resolution sequence must strictly decrease", pair=(a, b))
    horizon = float(scenario["horizon"])
    r_top = float(scenario["r_max"])
    cfl = float(scenario.get("cfl", 0.8))
    probe_r = np.asarray(
        scenario.get("probe_r", np.linspace(0.0, max(r_top - horizon, 8 * hs[-1]), 33))
    )
    reference = scenario.get("reference")

    profiles = []
    for h in hs:
        n = int(np.floor(r_top / h + 1e-9)) + 1
        radii = h * np.arange(n)
        w0, w1 = _scenario_arrays(scenario, radii)
        run = _solve_arrays(
            radii, w0, w1, scenario.get("rhs"), horizon, cfl,
            scenario.get("threshold", DEFAULT_THRESHOLD), [0.0, horizon],
        )
        if run.status != "completed":
            raise ConvergenceError(
                "run did not reach the horizon", h=h, status=run.status
            )
        profiles.append(np.interp(probe_r, run.radii, run.final))

    if reference is not None:
        target = np.asarray(reference(probe_r), dtype=float)
        errors = [float(np.max(np.abs(p - target))) for p in profiles]
        scales = hs
    else:
        ratios = [a / b for a, b in zip(hs, hs[1:])]
        if np.ptp(ratios) > 1e-6 * ratios[0]:
            raise ConfigError("reference-free mode needs a constant refinement ratio")
        errors = [
            float(np.max(np.abs(a - b))) for a, b in zip(profiles, profiles[1:])
        ]
        scales = hs[:-1]
    for a, b in zip(errors, errors[1:]):
        if b >= a:
            raise ConvergenceError("not in asymptotic regime", errors=tuple(errors))
    orders = [
        np.log(ea / eb) / np.log(sa / sb)
        for ea, eb, sa, sb in zip(errors, errors[1:], scales, scales[1:])
    ]
    return float(np.mean(orders))
