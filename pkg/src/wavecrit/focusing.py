"""Focusing power equation: radial Duhamel kernel and monotone iteration.

The solution map is iterated in its integral form on an (r, t) lattice:
u^{n+1} = free wave of the data plus the time integral of the sine kernel
applied to |u^n|^N u^n.  The kernel is positivity-preserving, so for data
whose free wave stays nonnegative the iterates increase monotonically and
their limit solves the equation wherever it is finite.  Nodes crossing a
divergence cap are masked "presumed infinite" and absorb their forward
light cone; the limit object remains meaningful as a weak solution.

The module also carries the two stationary profiles (bounded ground state
and singular power-law), the quartic energy functional, the comparison
integrals around the ground state, the two-sided dispersion/blow-up probe,
and the static supersolution test.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import brentq

from .criteria import Verdict, _laplacian_fn, outgoing_check, radial_positivity
from .errors import (
    AdmissibilityError,
    ConfigError,
    ExtentError,
    GridError,
    SolitonError,
)
from .freewave import CauchyData, FreePropagator
from .radial import RadialField, RadialGrid, differentiate, line_integral

__all__ = [
    "IterationState",
    "Soliton",
    "blowup_window_probe",
    "crossing_radii",
    "duhamel_apply",
    "energy_focusing",
    "kenig_merle_quantities",
    "monotone_iterate",
    "sine_kernel_radial",
    "soliton",
    "supersolution_check",
]

DEFAULT_CAP = 1.0e6


# ---------------------------------------------------------------------------
# stationary profiles


@dataclass(frozen=True)
class Soliton:
    """Static positive solution: -ΔS = S^{N+1}.

    kind "ground" is the bounded quartic profile with S(0) = 1; kind
    "singular" is the power-law profile amplitude·r^{-2/N}.  laplacian is
    closed-form via the defining equation.
    """

    kind: str
    N: float
    amplitude: float

    def __call__(self, r) -> NDArray:
        r = np.asarray(r, dtype=float)
        if self.kind == "ground":
            return (1.0 + r * r / 3.0) ** -0.5
        return self.amplitude * r ** (-2.0 / self.N)

    def derivative(self, r) -> NDArray:
        r = np.asarray(r, dtype=float)
        if self.kind == "ground":
            return -(r / 3.0) * (1.0 + r * r / 3.0) ** -1.5
        return (-2.0 / self.N) * self.amplitude * r ** (-2.0 / self.N - 1.0)

    def laplacian(self, r) -> NDArray:
        return -self(r) ** (self.N + 1.0)

    def outgoing_moment(self, r) -> NDArray:
        """r (S_r + S/r) = (r S)', finite at the origin for the ground kind."""
        r = np.asarray(r, dtype=float)
        if self.kind == "ground":
            return (1.0 + r * r / 3.0) ** -1.5
        return (1.0 - 2.0 / self.N) * self.amplitude * r ** (-2.0 / self.N)


def soliton(kind: str, N: float) -> Soliton:
    """Stationary profile of the requested family and power."""
    if kind == "ground":
        if N != 4:
            raise SolitonError("the bounded profile solves the quartic case only", N=N)
        return Soliton("ground", 4.0, 1.0)
    if kind == "singular":
        if N <= 2:
            raise SolitonError(
                "no positive power-law profile at or below power 2", N=N
            )
        amplitude = (2.0 * (N - 2.0) / N**2) ** (1.0 / N)
        return Soliton("singular", float(N), amplitude)
    raise ConfigError(f"unknown soliton kind {kind!r}")


def crossing_radii(N: int = 4) -> Tuple[float, float]:
    """Radii where the singular profile crosses the ground profile."""
    if N != 4:
        raise ConfigError("crossing radii compare the quartic profiles", N=N)
    ground, singular = soliton("ground", 4), soliton("singular", 4)

    def gap(r: float) -> float:
        return float(singular(r) - ground(r))

    lo = brentq(gap, 1e-3, 2.0, xtol=1e-14)
    hi = brentq(gap, 3.0, 30.0, xtol=1e-14)
    return float(lo), float(hi)


# ---------------------------------------------------------------------------
# sine kernel


def _pl_tables(nodes: NDArray, moment: NDArray) -> Tuple[NDArray, NDArray]:
    # cumulative integral of the piecewise-linear moment, exact per segment
    M = np.concatenate(
        ([0.0], np.cumsum(0.5 * (moment[1:] + moment[:-1]) * np.diff(nodes)))
    )
    return moment, M


def sine_kernel_radial(f: RadialField, t: float) -> RadialField:
    """Average of the source over the backward sphere of radius t.

    g(r) = (1/2r) ∫_{|r-t|}^{r+t} ρ f(ρ) dρ, with the origin limit t f(t);
    this is exactly the free-wave map (0, f) ↦ u(t).  Arguments beyond the
    grid use the frozen boundary value of f, which is exact for sources
    that are constant or vanishing there; a source still varying at the
    boundary is rejected.
    """
    if t < 0:
        raise ConfigError("the kernel is taken at nonnegative times", t=t)
    nodes = f.grid.nodes
    r_top = f.grid.r_max
    if nodes.size >= 3 and t > 0:
        outer = f.values[nodes >= 0.98 * r_top]
        if np.ptp(outer) > 1e-9 * (1.0 + f.sup_norm()):
            raise ExtentError(
                "source not resolved on [0, r + t]: it still varies at the grid boundary",
                needed=r_top + t,
                available=r_top,
            )
    g, M = _pl_tables(nodes, f.moment())
    f_end = f.values[-1]

    def integral_to(x: NDArray) -> NDArray:
        inside = np.minimum(x, r_top)
        idx = np.clip(np.searchsorted(nodes, inside, side="right") - 1, 0, nodes.size - 2)
        dx = inside - nodes[idx]
        slope = (g[idx + 1] - g[idx]) / (nodes[idx + 1] - nodes[idx])
        base = M[idx] + dx * (g[idx] + 0.5 * slope * dx)
        beyond = x > r_top
        if np.any(beyond):
            base = base + np.where(
                beyond, 0.5 * f_end * (x * x - r_top * r_top), 0.0
            )
        return base

    vals = np.empty_like(nodes)
    pos = nodes > 0
    vals[pos] = (integral_to(nodes[pos] + t) - integral_to(np.abs(nodes[pos] - t))) / (
        2.0 * nodes[pos]
    )
    vals[0] = float(np.interp(t, nodes, g)) if t <= r_top else f_end * t
    return RadialField(f.grid, vals, parity="even")


# ---------------------------------------------------------------------------
# lattice Duhamel map

# Positive quadrature weights for j uniform intervals: trapezoid (j=1),
# composite Simpson (even j), Simpson plus a 3/8 block (odd j >= 3).
# Positivity of every weight is what transfers kernel positivity to the
# iteration.


@lru_cache(maxsize=None)
def _time_weights(j: int) -> NDArray:
    if j < 1:
        raise ValueError("weights need at least one interval")
    if j == 1:
        return np.array([0.5, 0.5])
    w = np.zeros(j + 1)
    end = j if j % 2 == 0 else j - 3
    if end >= 2:
        w[0] += 1.0 / 3.0
        w[end] += 1.0 / 3.0
        w[1:end:2] += 4.0 / 3.0
        w[2:end:2] += 2.0 / 3.0
    if j % 2 == 1:
        w[j - 3] += 3.0 / 8.0
        w[j - 2] += 9.0 / 8.0
        w[j - 1] += 9.0 / 8.0
        w[j] += 3.0 / 8.0
    w.setflags(write=False)
    return w


def _uniform_spacing(grid: RadialGrid) -> float:
    gaps = np.diff(grid.nodes)
    h = float(gaps[0])
    if np.max(np.abs(gaps - h)) > 1e-9 * h:
        raise GridError("the spacetime lattice needs a uniform radial grid")
    return h


def _lattice_times(grid: RadialGrid, horizon: float) -> NDArray:
    if horizon <= 0:
        raise ConfigError("horizon must be positive", horizon=horizon)
    if horizon > grid.r_max:
        raise ExtentError(
            "lattice horizon exceeds the resolved radius",
            horizon=horizon,
            r_max=grid.r_max,
        )
    h = _uniform_spacing(grid)
    n_t = int(np.ceil(horizon / h - 1e-9)) + 1
    return h * np.arange(n_t)


def _free_lattice(data: CauchyData, times: NDArray) -> NDArray:
    prop = FreePropagator(data)
    return np.stack([prop.field(float(t)).values for t in times], axis=1)


def _power_source(values: NDArray, exponent: float, cap: float) -> NDArray:
    u = np.clip(values, -cap, cap)
    return np.sign(u) * np.abs(u) ** (exponent + 1.0)


def _duhamel_lattice(
    free: NDArray, source: NDArray, nodes: NDArray, exponent: float, cap: float
) -> NDArray:
    """free + ∫₀^t kernel[|source|^N source](s) ds on the uniform lattice.

    With the time step equal to the node spacing, both kernel limits land
    exactly on lattice nodes, so the inner integrals are pure lookups into
    each slice's cumulative moment table.
    """
    n_r, n_t = source.shape
    dt = nodes[1] - nodes[0]
    f = _power_source(source, exponent, cap)
    g = nodes[:, None] * f
    M = np.vstack(
        [
            np.zeros((1, n_t)),
            np.cumsum(0.5 * (g[1:] + g[:-1]) * dt, axis=0),
        ]
    )
    idx = np.arange(n_r)
    out = free.copy()
    inv2r = np.zeros(n_r)
    inv2r[1:] = 0.5 / nodes[1:]
    for j in range(1, n_t):
        w = _time_weights(j)
        acc = np.zeros(n_r)
        for m in range(j):  # source slice m, kernel radius (j - m) dt; the
            # j-th slice has radius zero and contributes nothing.
            shift = j - m
            hi = np.minimum(idx + shift, n_r - 1)
            lo = np.abs(idx - shift)
            col = (M[hi, m] - M[lo, m]) * inv2r
            col[0] = g[shift, m] if shift < n_r else g[-1, m]
            acc += w[m] * col
        out[:, j] = free[:, j] + dt * acc
    return out


def _infected_mask(mask: NDArray) -> NDArray:
    # forward light cone of every masked node, one node per time step
    out = mask.copy()
    front = mask[:, 0].copy()
    for j in range(1, mask.shape[1]):
        spread = front.copy()
        spread[1:] |= front[:-1]
        spread[:-1] |= front[1:]
        front = spread | mask[:, j]
        out[:, j] |= front
    return out


def duhamel_apply(
    data: CauchyData, source: NDArray, exponent: float, cap: float = np.inf
) -> NDArray:
    """One application of the lattice Duhamel map to a source lattice.

    The source columns are read at times j·spacing; the result has the same
    shape.  Substituting a static solution for the source must return that
    solution up to quadrature error, which is the fixed-point diagnostic.
    """
    if data.symmetry != "radial":
        raise ConfigError("the lattice map is radial only")
    nodes = data.grid.nodes
    source = np.asarray(source, dtype=float)
    if source.ndim != 2 or source.shape[0] != nodes.size:
        raise ConfigError(
            "source lattice must be nodes x times", shape=source.shape
        )
    _uniform_spacing(data.grid)
    times = data.grid.spacing * np.arange(source.shape[1])
    free = _free_lattice(data, times)
    return _duhamel_lattice(free, source, nodes, exponent, cap)


# ---------------------------------------------------------------------------
# monotone iteration


@dataclass
class IterationState:
    """Lattice iterate with its predecessor, divergence mask, and trace."""

    n: int
    radii: NDArray
    times: NDArray
    u_n: NDArray
    monotone_floor: NDArray
    divergence_mask: NDArray
    trusted: NDArray
    converged: bool
    case: str
    validity: str
    cap: float
    trace: List[dict] = field(default_factory=list)
    history: Optional[List[NDArray]] = None

    @property
    def live(self) -> NDArray:
        """Trusted, finite, unmasked lattice nodes."""
        return self.trusted & ~self.divergence_mask & np.isfinite(self.u_n)

    def sup_profile(self) -> NDArray:
        """Per-time sup of |u_n| over live nodes (nan where none)."""
        masked = np.where(self.live, np.abs(self.u_n), np.nan)
        out = np.full(self.times.size, np.nan)
        for j in range(self.times.size):
            col = masked[:, j]
            if np.any(np.isfinite(col)):
                out[j] = np.nanmax(col)
        return out

    @property
    def diverged_fraction(self) -> float:
        trusted_count = int(np.sum(self.trusted))
        if trusted_count == 0:
            return 0.0
        return float(np.sum(self.divergence_mask & self.trusted) / trusted_count)


def _admissibility_case(data: CauchyData) -> Tuple[str, str]:
    """First satisfied positivity case, as (tag, validity window).

    ii: outgoing derivative of u0 dominates |u1| (all t).  iv: -Δu0
    dominates |∇u1| (all t).  i: expanding outgoing with u0 >= 0 (t >= 0).
    iii: u0 >= 0 and u1 >= |∇u0| (t >= 0).
    """
    u0, u1 = data.u0, data.u1
    nodes = data.grid.nodes
    tol = 1e-12 * (1.0 + u0.sup_norm() + u1.sup_norm())

    if radial_positivity(data, strict=False).holds:
        return "ii", "all t"
    if u1.origin_moment == 0.0:
        lap = _laplacian_fn(u0)(nodes)
        d1 = differentiate(u1).values
        if np.min(-lap - np.abs(d1)) >= -tol:
            return "iv", "all t"
    if float(np.min(u0.values)) >= -tol:
        out = outgoing_check(data)
        if out.bounds.get("orientation") == "expanding":
            return "i", "t >= 0"
        d0 = differentiate(u0).values
        if np.min(u1.moment() - nodes * np.abs(d0)) >= -tol:
            return "iii", "t >= 0"
    raise AdmissibilityError(
        "monotonicity not guaranteed: data satisfy none of the positivity cases"
    )


def monotone_iterate(
    data: CauchyData,
    N: float,
    horizon: float,
    cap: float = DEFAULT_CAP,
    tol: float = 1e-8,
    n_max: int = 200,
    keep_history: bool = False,
) -> IterationState:
    """Iterate the Duhamel map from the free wave until the lattice settles.

    Monotone growth of the iterates is guaranteed for even N >= 0 and data
    passing one of the positivity cases; other N are accepted for
    experimentation (source sign(u)|u|^{N+1}) without that guarantee.
    Nodes whose value crosses the cap are masked presumed-infinite and
    absorb their forward light cone.
    """
    if data.symmetry != "radial":
        raise ConfigError("the lattice map is radial only")
    if N < 0:
        raise ConfigError("the source power must be nonnegative", N=N)
    if cap <= 0:
        raise ConfigError("cap must be positive", cap=cap)
    case, validity = _admissibility_case(data)
    nodes = data.grid.nodes
    times = _lattice_times(data.grid, horizon)
    trusted = nodes[:, None] + times[None, :] <= data.grid.r_max + 1e-9

    free = _free_lattice(data, times)
    u = free.copy()
    mask = _infected_mask(np.abs(u) > cap)
    u[mask] = np.inf
    floor = u.copy()
    trace: List[dict] = []
    history = [u.copy()] if keep_history else None

    converged = False
    n = 0
    for n in range(1, n_max + 1):
        new_u = _duhamel_lattice(free, u, nodes, N, cap)
        new_mask = _infected_mask(mask | (np.abs(new_u) > cap))
        new_u[new_mask] = np.inf
        live = trusted & ~new_mask & ~mask
        sup_change = (
            float(np.max(np.abs(new_u[live] - u[live]))) if np.any(live) else 0.0
        )
        floor, u, mask = u, new_u, new_mask
        trace.append(
            {
                "n": n,
                "sup_change": sup_change,
                "diverged_fraction": float(
                    np.sum(mask & trusted) / max(int(np.sum(trusted)), 1)
                ),
            }
        )
        if history is not None:
            history.append(u.copy())
        if sup_change < tol:
            converged = True
            break

    return IterationState(
        n=n,
        radii=nodes,
        times=times,
        u_n=u,
        monotone_floor=floor,
        divergence_mask=mask,
        trusted=trusted,
        converged=converged,
        case=case,
        validity=validity,
        cap=cap,
        trace=trace,
        history=history,
    )


# ---------------------------------------------------------------------------
# energy and comparison integrals


def energy_focusing(u: RadialField, u_t: RadialField, full_output: bool = False):
    """Quartic-case energy: ∫ (u_t² + |∇u|²)/2 − u⁶/6.

    The velocity enters through its moment, so a 1/r pole is integrated
    exactly; the position must be smooth.  Tails are corrected by the
    fitted power law of the last decade.
    """
    if not np.array_equal(u.grid.nodes, u_t.grid.nodes):
        raise GridError("energy needs both fields on one grid")
    nodes = u.grid.nodes
    mom = u_t.moment()
    flux = nodes * differentiate(u).values
    integrand = 0.5 * (mom * mom + flux * flux) - nodes * nodes * u.values**6 / 6.0
    value, info = line_integral(u.grid, integrand, tail="power", full_output=True)
    return (float(value), info) if full_output else float(value)


def kenig_merle_quantities(N: int = 4, grid: Optional[RadialGrid] = None) -> dict:
    """Comparison integrals around the ground state, with ε-expansion.

    All integrands are closed-form in the ground profile; the variations of
    E[(1+ε)·ground] come from central differences of the closed-form energy
    polynomial K((1+ε)²/2 − (1+ε)⁶/6) with K the squared gradient norm.
    """
    if N != 4:
        raise ConfigError("comparison integrals are specific to the quartic case", N=N)
    if grid is None:
        grid = RadialGrid.graded(1.0e4, 6001, power=3.0)
    r = grid.nodes
    q = (1.0 + r * r / 3.0) ** -0.5
    qr = np.zeros_like(r)
    qr[1:] = -(r[1:] / 3.0) * (1.0 + r[1:] * r[1:] / 3.0) ** -1.5
    m = (1.0 + r * r / 3.0) ** -1.5  # (r q)'

    grad_sq = float(line_integral(grid, (r * qr) ** 2, tail="power"))
    velocity_sq = float(line_integral(grid, m * m, tail="power"))
    virial = float(line_integral(grid, 2.0 * qr * q * r + q * q, tail="power"))
    sixth = float(line_integral(grid, q**6 * r * r, tail="power"))

    energy_ground = 0.5 * grad_sq - sixth / 6.0
    energy_pole_velocity = 0.5 * velocity_sq

    def closed(eps: float) -> float:
        s = 1.0 + eps
        return grad_sq * (s * s / 2.0 - s**6 / 6.0)

    de = 1e-4
    first = (closed(de) - closed(-de)) / (2.0 * de)
    second = (closed(de) - 2.0 * closed(0.0) + closed(-de)) / (de * de)

    return {
        "grad_norm_sq": grad_sq,
        "half_grad_norm_sq": 0.5 * grad_sq,
        "velocity_norm_sq": velocity_sq,
        "virial_integral": virial,
        "sixth_power": sixth,
        "energy_ground": energy_ground,
        "energy_pole_velocity": energy_pole_velocity,
        "energy_ratio": energy_pole_velocity / energy_ground,
        "first_variation": first,
        "second_variation": second,
    }


# ---------------------------------------------------------------------------
# dispersion/blow-up window probe


def _zero_field(grid: RadialGrid) -> RadialField:
    return RadialField(grid, np.zeros(grid.n))


def _scaled_velocity_data(grid: RadialGrid, scale: float) -> CauchyData:
    # (0, scale*(S_r + S/r)) for the ground profile: pole velocity with
    # moment scale*(rS)'
    ground = soliton("ground", 4)
    nodes = grid.nodes
    moment = scale * ground.outgoing_moment(nodes)
    vals = np.empty_like(nodes)
    vals[1:] = moment[1:] / nodes[1:]
    vals[0] = vals[1]
    u1 = RadialField(grid, vals, parity="even", origin_moment=float(moment[0]))
    return CauchyData(_zero_field(grid), u1)


def _scaled_profile_data(grid: RadialGrid, scale: float) -> CauchyData:
    ground = soliton("ground", 4)
    u0 = RadialField(grid, scale * ground(grid.nodes))
    return CauchyData(u0, _zero_field(grid))


def blowup_window_probe(
    epsilon: float,
    direction: str,
    horizon: float = 10.0,
    grid: Optional[RadialGrid] = None,
    cap: float = DEFAULT_CAP,
) -> dict:
    """Two-sided sharpness probe around the ground-state threshold.

    minus: data (0, (1-ε)(S_r + S/r)) sit strictly inside the dispersive
    condition; the report carries the lattice sup series, the pointwise
    domination margin under the ground profile, and the reference-solver
    sup trend.  plus: the growth condition needs the derivative combination
    of the position slot to exceed (1+ε)(S_r + S/r), so the probe data are
    ((1+ε)S, 0), which satisfy it with equality; the report carries the
    reference-solver threshold-crossing time and the iteration's divergence
    trace.
    """
    if not 0.0 < epsilon <= 0.5:
        raise ConfigError("epsilon must lie in (0, 0.5]", epsilon=epsilon)
    if direction not in ("plus", "minus"):
        raise ConfigError(f"unknown direction {direction!r}")
    from .oracle import fd_solve

    if grid is None:
        n = int(round((horizon + 4.0) / 0.05)) + 1
        grid = RadialGrid.uniform(horizon + 4.0, n)
    ground = soliton("ground", 4)
    report = {
        "direction": direction,
        "epsilon": float(epsilon),
        "horizon": float(horizon),
        "cap": float(cap),
    }

    if direction == "minus":
        data = _scaled_velocity_data(grid, 1.0 - epsilon)
        state = monotone_iterate(data, 4, horizon, cap=cap, tol=1e-6, n_max=80)
        live = state.live
        sup_lattice = float(np.max(np.abs(state.u_n[live])))
        envelope = ground(state.radii)[:, None]
        domination = float(np.min((envelope - np.abs(state.u_n))[live]))
        sups = state.sup_profile()
        run = fd_solve(
            data,
            ("power", 4, 1),
            horizon,
            h=grid.spacing / 2.0,
            threshold=cap,
            snapshot_times=np.linspace(0.0, horizon, 21),
        )
        fd_sups = np.array([float(np.max(np.abs(s))) for s in run.snapshots])
        report.update(
            {
                "data": "(0, (1-eps) * outgoing derivative of the ground profile)",
                "iteration": {
                    "n": state.n,
                    "converged": state.converged,
                    "case": state.case,
                    "diverged_fraction": state.diverged_fraction,
                },
                "sup_lattice": sup_lattice,
                "domination_margin": domination,
                "sup_series": {
                    "times": state.times.tolist(),
                    "values": np.nan_to_num(sups, nan=0.0).tolist(),
                },
                "fd_status": run.status,
                "fd_sup_series": {
                    "times": run.snapshot_times.tolist(),
                    "values": fd_sups.tolist(),
                },
                "bounded": bool(run.status == "completed" and sup_lattice < np.inf),
                "decay_trend": bool(fd_sups[-1] < 0.5 * np.max(fd_sups)),
            }
        )
        return report

    data = _scaled_profile_data(grid, 1.0 + epsilon)
    run = fd_solve(
        data,
        ("power", 4, 1),
        horizon,
        h=min(grid.spacing / 2.0, 0.025),
        threshold=1000.0,
    )
    state = monotone_iterate(data, 4, horizon, cap=cap, tol=1e-6, n_max=25)
    first_diverged = next(
        (t["n"] for t in state.trace if t["diverged_fraction"] > 0), None
    )
    report.update(
        {
            "data": "((1+eps) * ground profile, 0)",
            "fd_status": run.status,
            "cap_crossing_time": run.t_detect,
            "iteration": {
                "n": state.n,
                "case": state.case,
                "diverged_fraction": state.diverged_fraction,
                "first_diverged_iterate": first_diverged,
            },
        }
    )
    return report


# ---------------------------------------------------------------------------
# static supersolution test


def supersolution_check(
    u0: RadialField, N: float, laplacian: Optional[RadialField] = None
) -> Verdict:
    """-Δu₀ ≥ u₀^{N+1} and u₀ ≥ 0 at every node.

    Pass the Laplacian when it is known in closed form; otherwise it is
    spline-differentiated from u₀, which carries discretization noise on
    exact-equality profiles.  A profile singular at the origin enters
    capped there (duplicate the first positive node in both fields): the
    origin check then repeats that node's inequality.
    """
    nodes = u0.grid.nodes
    vals = u0.values
    if laplacian is not None:
        if not np.array_equal(laplacian.grid.nodes, nodes):
            raise GridError("laplacian must live on the data grid")
        lap = laplacian.values
        source = "supplied"
    else:
        lap = _laplacian_fn(u0)(nodes)
        source = "spline"
    power = np.sign(vals) * np.abs(vals) ** (N + 1.0)
    gaps = np.minimum(-lap - power, vals)
    i = int(np.argmin(gaps))
    margin = float(gaps[i])
    return Verdict(
        criterion="supersolution_check",
        holds=bool(margin >= 0.0),
        margin=margin,
        witness=(float(nodes[i]), margin),
        strict=False,
        bounds={
            "domination": "|u(t)| <= u0 for data (u0, 0)",
            "laplacian_source": source,
        },
    )
