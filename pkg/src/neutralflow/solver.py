"""Method-of-lines solver for the reduced radial flow on [0, theta0].

The purely twisting rotationally symmetric flow reduces to

    psi_t = (sqrt(psi)/psi') psi'' - k sqrt(psi) cot(2 theta),

with the drift coefficient k = 2 by default (the stationary family
a + b cos 2 theta and the two-dimensional oracle both fix it; k = 1 is
runnable for comparison).  Boundary data at theta0 is a Dirichlet value C0
and a Neumann slope; the default Neumann convention is

    psi'(theta0) = 2 C0 cot(theta0) - C1,

which makes C1 = 0 equivalent to vanishing shear at the boundary and
reproduces the closed-form limit coefficients.  The alternative convention
psi'(theta0) = 2 C0 cot(2 theta0) + C1 sits behind the neumann_variant toggle.

A second-order parabolic problem takes one condition per endpoint, so the
default mode pins the Dirichlet value and monitors the Neumann slope (the
closed-form limit satisfies both, and the monitored slope converging to the
Neumann value is itself an acceptance check); a neumann-enforced mode is
provided for comparison.  At the axis no condition is imposed: smooth
graphs force psi(0) = 0 when C1 = 0 (pinned), and for C1 != 0 node 0 is
evolved by the regularized right-hand side, under which the axis value is
invariant for k = 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve_banded

from .geometry import (
    PsiProfile,
    StationaryCoeffs,
    centered_first,
    centered_second,
    limit_coefficients,
    stationary_profile,
)

NEUMANN_VARIANTS = ("consistent-cot-theta", "paper-literal-cot-two-theta")
BOUNDARY_MODES = ("dirichlet-pinned", "neumann-enforced")
SCHEMES = ("explicit-rk2", "semi-implicit")
INITIAL_KINDS = ("limit", "perturbed", "custom")

AXIS_ZERO_TOL = 1e-12


class DefinitenessError(RuntimeError):
    """Raised when psi' <= 0 appears at an interior node (or the state went NaN).

    Carries the offending state for diagnosis.
    """

    def __init__(self, message, state=None, node=None):
        super().__init__(message)
        self.state = state
        self.node = node


@dataclass
class SolverConfig:
    theta0: float = 0.3
    c0: float = 2.0 * math.sin(0.3) ** 2
    c1: float = 0.0
    k: float = 2.0
    neumann_variant: str = "consistent-cot-theta"
    boundary_mode: str = "dirichlet-pinned"
    grid_n: int = 400
    scheme: str = "semi-implicit"
    dt_safety: float = 0.5
    semi_dt_factor: float = 10.0
    t_end: float = 5.0
    tol_steady: float = 1e-10
    initial_kind: str = "limit"
    initial_amplitude: float = 0.0
    initial_custom: np.ndarray | None = None
    monitor_every: int = 50
    snapshot_count: int = 11

    def validate(self):
        if not 0.0 < self.theta0 < math.pi / 2.0:
            raise ValueError(f"theta0 must lie in (0, pi/2), got {self.theta0}")
        if self.c0 <= 0.0:
            raise ValueError(f"c0 must be positive, got {self.c0}")
        if self.neumann_variant not in NEUMANN_VARIANTS:
            raise ValueError(f"unknown neumann_variant {self.neumann_variant!r}")
        if self.boundary_mode not in BOUNDARY_MODES:
            raise ValueError(f"unknown boundary_mode {self.boundary_mode!r}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.initial_kind not in INITIAL_KINDS:
            raise ValueError(f"unknown initial kind {self.initial_kind!r}")
        if not 0.0 < self.dt_safety <= 1.0:
            raise ValueError(f"dt_safety must lie in (0, 1], got {self.dt_safety}")
        if self.grid_n < 8:
            raise ValueError("grid_n must be at least 8")
        if self.t_end < 0.0 or self.k <= 0.0 or self.semi_dt_factor <= 0.0:
            raise ValueError("t_end, k and semi_dt_factor must be positive")
        if self.monitor_every < 1 or self.snapshot_count < 2:
            raise ValueError("monitor_every >= 1 and snapshot_count >= 2 required")
        return self

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.theta0, self.grid_n + 1)

    @property
    def h(self) -> float:
        return self.theta0 / self.grid_n

    def neumann_slope(self) -> float:
        """Target boundary slope psi'(theta0) under the configured variant."""
        if self.neumann_variant == "consistent-cot-theta":
            return 2.0 * self.c0 / math.tan(self.theta0) - self.c1
        return 2.0 * self.c0 / math.tan(2.0 * self.theta0) + self.c1

    def axis_value(self) -> float:
        """Axis value of the closed-form limit, (c1/2) tan(theta0)."""
        return 0.5 * self.c1 * math.tan(self.theta0)


@dataclass
class FlowState:
    t: float
    profile: PsiProfile
    dt_last: float = 0.0


@dataclass(frozen=True)
class MonitorRecord:
    t: float
    u_min: float
    u_max: float
    sup_sigma: float
    B_min: float
    B_max: float
    steady_residual: float
    boundary_slope: float
    axis_value: float


@dataclass
class SteadyReport:
    converged: bool
    t_converged: float
    final_profile: PsiProfile
    limit: StationaryCoeffs
    linf_error_to_limit: float
    monitor_extrema: dict
    decay_slope: float
    axis_compatible: bool


@dataclass
class RunResult:
    report: SteadyReport
    monitors: list
    snapshots: list  # (t, PsiProfile)
    config: SolverConfig


def make_initial(config: SolverConfig) -> PsiProfile:
    """Initial profile: the closed-form limit, a perturbation of it, or custom.

    The perturbation A sin^2(pi theta / theta0) vanishes to second order at
    both ends, so Dirichlet data, boundary slope and axis value are kept.
    Definiteness of the result is required; the u = psi'/sin(2 theta) range
    is checked and the offending node reported otherwise.
    """
    config.validate()
    grid = config.grid
    coeffs = limit_coefficients(config.theta0, config.c0, config.c1)
    base = stationary_profile(coeffs, grid)
    if config.initial_kind == "limit":
        values = base.values.copy()
    elif config.initial_kind == "perturbed":
        bump = config.initial_amplitude * np.sin(math.pi * grid / config.theta0) ** 2
        values = base.values + bump
    else:
        if config.initial_custom is None:
            raise ValueError("initial_kind='custom' needs initial_custom values")
        values = np.asarray(config.initial_custom, dtype=float)
        if values.shape != grid.shape:
            raise ValueError("custom initial data has the wrong length")
    diffs = np.diff(values)
    if np.any(diffs <= 0.0):
        node = int(np.argmin(diffs))
        raise DefinitenessError(
            f"initial data is not definite: psi not increasing at node {node}",
            node=node,
        )
    pinned = config.c1 == 0.0
    profile = PsiProfile(grid, values, axis_pinned=pinned)
    return profile


def initial_u_bounds(profile: PsiProfile) -> tuple[float, float]:
    """Admissibility constants (c2, c3): range of psi'/sin(2 theta) inside."""
    h = profile.h
    theta = profile.theta_grid[1:-1]
    dpsi = (profile.values[2:] - profile.values[:-2]) / (2.0 * h)
    u = dpsi / np.sin(2.0 * theta)
    return float(np.min(u)), float(np.max(u))


def _axis_quadratic_coeff(values: np.ndarray, h: float) -> float:
    """Coefficient c of psi ~ c theta^2 from the first two interior nodes."""
    return max((16.0 * values[1] - values[2]) / (12.0 * h * h), 0.0)


def reduced_rhs(profile: PsiProfile, k: float, state: FlowState | None = None) -> np.ndarray:
    """Nodal right-hand side of the reduced flow.

    Interior nodes use centered differences.  The axis node is regularized by
    the series expansion: for a quadratic zero psi ~ c theta^2 the right-hand
    side tends to sqrt(c)(2-k)/2, and for a smooth even positive minimum it
    vanishes when k = 2 (for k != 2 it diverges; a one-sided extrapolation is
    reported there).  The boundary node is owned by apply_boundary.
    """
    v = profile.values
    theta = profile.theta_grid
    h = profile.h
    if not np.all(np.isfinite(v)):
        raise DefinitenessError("state contains non-finite values", state=state)
    rhs = np.zeros_like(v)
    dpsi = (v[2:] - v[:-2]) / (2.0 * h)
    if np.any(dpsi <= 0.0):
        node = int(np.argmin(dpsi)) + 1
        raise DefinitenessError(
            f"definiteness lost: psi' <= 0 at interior node {node}", state=state, node=node
        )
    d2psi = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (h * h)
    root = np.sqrt(np.maximum(v[1:-1], 0.0))
    rhs[1:-1] = root / dpsi * d2psi - k * root / np.tan(2.0 * theta[1:-1])
    if v[0] <= AXIS_ZERO_TOL:
        c = _axis_quadratic_coeff(v, h)
        rhs[0] = math.sqrt(c) * (2.0 - k) / 2.0
    elif abs(k - 2.0) < 1e-14:
        rhs[0] = 0.0
    else:
        rhs[0] = 2.0 * rhs[1] - rhs[2]
    return rhs


def apply_boundary(values: np.ndarray, config: SolverConfig) -> np.ndarray:
    """Enforce the boundary policy at theta0 (and keep the pinned axis exact)."""
    if config.boundary_mode == "dirichlet-pinned":
        values[-1] = config.c0
    else:
        g = config.neumann_slope()
        values[-1] = (2.0 * config.h * g + 4.0 * values[-2] - values[-3]) / 3.0
    if config.c1 == 0.0:
        values[0] = 0.0
    return values


def _explicit_dt_bound(profile: PsiProfile) -> float:
    h = profile.h
    v = profile.values
    dpsi = (v[2:] - v[:-2]) / (2.0 * h)
    root = np.sqrt(np.maximum(v[1:-1], 1e-300))
    ratio = dpsi / root
    return h * h * float(np.min(ratio)) / 2.0


def _drift_dt_bound(profile: PsiProfile, k: float) -> float:
    """Stability bound of the explicit drift term: dt |d drift/d psi| <= 1.

    For profiles with a positive axis minimum the diffusion coefficient
    diverges at the axis and the diffusion bound collapses like h^3; the
    implicitly treated diffusion does not care, so the semi-implicit step is
    limited by the drift alone.
    """
    theta = profile.theta_grid[1:-1]
    root = np.sqrt(np.maximum(profile.values[1:-1], 1e-300))
    jac = k * np.abs(1.0 / np.tan(2.0 * theta)) / (2.0 * root)
    return float(1.0 / np.max(jac))


def step(state: FlowState, config: SolverConfig) -> FlowState:
    """One time step; pinned boundary values are preserved exactly.

    explicit-rk2 is a two-stage Heun step with dt from the diffusion bound;
    semi-implicit freezes the diffusion coefficient sqrt(psi)/psi', solves the
    implicit second difference by tridiagonal elimination, and keeps the
    drift explicit (its dt may exceed the explicit bound by semi_dt_factor).
    """
    profile = state.profile
    bound = _explicit_dt_bound(profile)
    if config.scheme == "explicit-rk2":
        dt = config.dt_safety * bound
        k1 = reduced_rhs(profile, config.k, state)
        mid = profile.values + dt * k1
        apply_boundary(mid, config)
        k2 = reduced_rhs(PsiProfile(profile.theta_grid, mid, profile.axis_pinned), config.k, state)
        new = profile.values + 0.5 * dt * (k1 + k2)
    else:
        dt = config.dt_safety * max(
            config.semi_dt_factor * bound,
            0.5 * _drift_dt_bound(profile, config.k),
        )
        new = _semi_implicit_step(profile, config, dt, state)
    apply_boundary(new, config)
    if not np.all(np.isfinite(new)):
        raise DefinitenessError("step produced non-finite values", state=state)
    return FlowState(
        t=state.t + dt,
        profile=PsiProfile(profile.theta_grid, new, profile.axis_pinned),
        dt_last=dt,
    )


def _semi_implicit_step(profile: PsiProfile, config: SolverConfig, dt: float, state) -> np.ndarray:
    v = profile.values
    theta = profile.theta_grid
    h = profile.h
    n = v.size
    dpsi = (v[2:] - v[:-2]) / (2.0 * h)
    if np.any(dpsi <= 0.0):
        node = int(np.argmin(dpsi)) + 1
        raise DefinitenessError(
            f"definiteness lost: psi' <= 0 at interior node {node}", state=state, node=node
        )
    root = np.sqrt(np.maximum(v[1:-1], 0.0))
    diff_coeff = root / dpsi
    drift = -config.k * root / np.tan(2.0 * theta[1:-1])

    ab = np.zeros((3, n))
    rhs = np.empty(n)
    r = dt * diff_coeff / (h * h)
    ab[0, 2:] = -r[:]          # superdiagonal for rows 1..n-2
    ab[1, 1:-1] = 1.0 + 2.0 * r
    ab[2, :-2] = -r[:]         # subdiagonal
    rhs[1:-1] = v[1:-1] + dt * drift
    # endpoint rows: identity; axis advanced explicitly by the regularized rhs
    ab[1, 0] = 1.0
    ab[1, -1] = 1.0
    full = reduced_rhs(profile, config.k, state)
    rhs[0] = v[0] + dt * full[0]
    rhs[-1] = v[-1]
    return solve_banded((1, 1), ab, rhs)


def monitors(state: FlowState, config: SolverConfig) -> MonitorRecord:
    """A-priori-estimate monitors, centered differences over interior nodes."""
    profile = state.profile
    v = profile.values
    theta = profile.theta_grid
    h = profile.h
    dpsi = (v[2:] - v[:-2]) / (2.0 * h)
    d2psi = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (h * h)
    sin2 = np.sin(2.0 * theta[1:-1])
    u = dpsi / sin2
    with np.errstate(divide="ignore", invalid="ignore"):
        sig = np.abs(dpsi - 2.0 * v[1:-1] / np.tan(theta[1:-1])) / (2.0 * np.sqrt(v[1:-1]))
        B = d2psi / (sin2 * np.power(np.maximum(dpsi, 1e-300), 2.0 / 3.0))
    rhs = reduced_rhs(profile, config.k, state)
    residual = float(np.max(np.abs(rhs[:-1])))
    bslope = float((3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h))
    return MonitorRecord(
        t=state.t,
        u_min=float(np.min(u)),
        u_max=float(np.max(u)),
        sup_sigma=float(np.max(sig[np.isfinite(sig)])),
        B_min=float(np.min(B)),
        B_max=float(np.max(B)),
        steady_residual=residual,
        boundary_slope=bslope,
        axis_value=float(v[0]),
    )


def _decay_slope(monitor_list, floor):
    """log-log slope of sup|sigma| vs t over the final decade above the floor."""
    ts = np.array([m.t for m in monitor_list])
    sig = np.array([m.sup_sigma for m in monitor_list])
    keep = (ts > 0.0) & (sig > floor)
    ts, sig = ts[keep], sig[keep]
    if ts.size < 3:
        return float("nan")
    t_hi = ts[-1]
    window = ts >= t_hi / 10.0
    if np.count_nonzero(window) < 3:
        window = slice(max(0, ts.size - 5), None)
    x, y = np.log(ts[window]), np.log(sig[window])
    return float(np.polyfit(x, y, 1)[0])


def run(config: SolverConfig) -> RunResult:
    """Evolve to steady state (residual <= tol_steady) or to t_end.

    Convergence is declared on the residual, never on the distance to the
    closed-form limit, so the limit comparison stays an independent check.
    Non-convergence is reported, never silently truncated.
    """
    config.validate()
    profile = make_initial(config)
    state = FlowState(t=0.0, profile=profile)
    axis_target = config.axis_value()
    axis_compatible = abs(profile.values[0] - axis_target) <= 1e-10 * max(1.0, abs(axis_target))

    records = [monitors(state, config)]
    snapshots = [(0.0, state.profile.copy())]
    # snapshots fire when the residual first drops below each successive
    # decade, so they trace the transient whatever its time scale is
    next_decade = records[0].steady_residual / 10.0

    converged = records[0].steady_residual <= config.tol_steady
    steps = 0
    while not converged and state.t < config.t_end:
        state = step(state, config)
        steps += 1
        if steps % config.monitor_every == 0:
            rec = monitors(state, config)
            records.append(rec)
            if rec.steady_residual <= next_decade and len(snapshots) < config.snapshot_count:
                snapshots.append((state.t, state.profile.copy()))
                while next_decade >= rec.steady_residual:
                    next_decade /= 10.0
            if rec.steady_residual <= config.tol_steady:
                converged = True
    if records[-1].t != state.t:
        rec = monitors(state, config)
        records.append(rec)
        converged = converged or rec.steady_residual <= config.tol_steady
    if not snapshots or snapshots[-1][0] != state.t:
        snapshots.append((state.t, state.profile.copy()))

    coeffs = limit_coefficients(config.theta0, config.c0, config.c1)
    exact = coeffs.psi(profile.theta_grid)
    linf = float(np.max(np.abs(state.profile.values - exact)))
    floor = 10.0 * config.h**2
    extrema = {
        "u_min": min(r.u_min for r in records),
        "u_max": max(r.u_max for r in records),
        "psi_min": float(min(np.min(s.values) for _, s in snapshots)),
        "psi_max": float(max(np.max(s.values) for _, s in snapshots)),
        "sup_sigma_max": max(r.sup_sigma for r in records),
        "abs_B_max": max(max(abs(r.B_min), abs(r.B_max)) for r in records),
    }
    report = SteadyReport(
        converged=converged,
        t_converged=state.t,
        final_profile=state.profile,
        limit=coeffs,
        linf_error_to_limit=linf,
        monitor_extrema=extrema,
        decay_slope=_decay_slope(records, floor),
        axis_compatible=axis_compatible,
    )
    return RunResult(report=report, monitors=records, snapshots=snapshots, config=config)


def boundary_implied_u(config: SolverConfig) -> float:
    """Boundary value of psi'/sin(2 theta) implied by the Neumann datum."""
    return config.neumann_slope() / math.sin(2.0 * config.theta0)


def boundary_implied_B(config: SolverConfig) -> float:
    """Boundary value of B implied by differentiating the Dirichlet pin in time:
    psi''(theta0) = cot(2 theta0) psi'(theta0)."""
    g = config.neumann_slope()
    s2 = math.sin(2.0 * config.theta0)
    return (g / math.tan(2.0 * config.theta0)) / (s2 * g ** (2.0 / 3.0))
