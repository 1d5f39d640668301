"""Multi-leaf runs: a one-parameter family of discs with boundary on a fixed
rotationally symmetric congruence, flowing to the filling of its central
complex point.

Each leaf is a full reduced-flow problem on [0, vartheta] with Dirichlet
value psi_tilde(vartheta) taken from the ambient congruence; with the
shear-free boundary condition (C1 = 0) the steady leaves are the family

    psi_vartheta(theta) = psi_tilde(vartheta) (1 - cos 2 theta)/(1 - cos 2 vartheta),

one holomorphic disc through each contact circle.  Leaves evolve
independently; disjointness is checked on recorded time samples only, so the
report does not depend on scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import PsiProfile, limit_coefficients, stationary_profile
from .profiles import SymbolicProfile, TabulatedProfile, named_profile
from .solver import (
    DefinitenessError,
    FlowState,
    SolverConfig,
    apply_boundary,
    make_initial,
    monitors,
    reduced_rhs,
    step,
)


@dataclass
class AmbientCongruence:
    """Fixed purely twisting congruence psi_tilde on (0, vartheta0].

    Validation: psi_tilde' > 0 (definite) and the shear |sigma_tilde| positive
    away from the axis, tending monotonically to zero at it, so the central
    complex point is isolated.
    """

    profile: object
    vartheta0: float

    def __post_init__(self):
        if not 0.0 < self.vartheta0 < math.pi / 2.0:
            raise ValueError(f"vartheta0 must lie in (0, pi/2), got {self.vartheta0}")
        th = np.linspace(self.vartheta0 / 64.0, self.vartheta0, 129)
        psi = np.asarray(self.profile.psi(th), dtype=float)
        dpsi = np.asarray(self.profile.dpsi(th), dtype=float)
        if np.any(psi <= 0.0) or np.any(dpsi <= 0.0):
            raise ValueError("ambient congruence must be definite: psi, psi' > 0 off the axis")
        sig = np.abs(dpsi - 2.0 * psi / np.tan(th)) / (2.0 * np.sqrt(psi))
        if np.any(sig <= 1e-12):
            raise ValueError(
                "ambient congruence is shear-free somewhere: the complex point is not isolated"
            )
        head = sig[: len(sig) // 4]
        if not np.all(np.diff(head) > 0.0) or head[0] > sig[-1] * 10.0:
            raise ValueError("|sigma| must decrease monotonically into the axis")

    def psi(self, vartheta):
        return float(self.profile.psi(vartheta))


def ambient_congruence(kind="tan2", vartheta0=0.3, table=None) -> AmbientCongruence:
    """Build and validate an ambient congruence from the registry or a table."""
    if table is not None:
        prof = TabulatedProfile(table[0], table[1], name=str(kind))
    else:
        prof = named_profile(kind)
    return AmbientCongruence(profile=prof, vartheta0=vartheta0)


def bishop_limit_leaf(amb: AmbientCongruence, vartheta: float, grid) -> PsiProfile:
    """Holomorphic leaf through (vartheta, psi_tilde(vartheta))."""
    if not 0.0 < vartheta <= amb.vartheta0:
        raise ValueError(f"leaf angle {vartheta} outside (0, {amb.vartheta0}]")
    grid = np.asarray(grid, dtype=float)
    scale = amb.psi(vartheta) / (1.0 - math.cos(2.0 * vartheta))
    return PsiProfile(grid, scale * (1.0 - np.cos(2.0 * grid)), axis_pinned=True)


@dataclass
class LeafResult:
    vartheta: float
    converged: bool
    t_converged: float
    linf_error_to_limit: float
    a: float
    b: float
    final_profile: PsiProfile
    axis_slope: float


@dataclass
class FamilyReport:
    leaves: list
    sample_times: np.ndarray
    linf_series: np.ndarray       # (n_samples, n_leaves): error to own limit
    separation_series: np.ndarray  # (n_samples, n_leaves-1): adjacent gaps
    min_separation: float
    filling: bool
    failure: str | None = None


def disjointness_check(leaves) -> float:
    """Minimum adjacent-pair gap over the shared part of the domains.

    The outer leaf is sampled on the inner leaf's grid by linear
    interpolation (exact when the grids share their spacing and origin).
    """
    gaps = []
    for lo, hi in zip(leaves[:-1], leaves[1:]):
        hi_on_lo = np.interp(lo.theta_grid, hi.theta_grid, hi.values)
        inner = slice(1, None)  # both leaves vanish at the shared axis point
        gaps.append(float(np.min(hi_on_lo[inner] - lo.values[inner])))
    return min(gaps)


def _adjacent_gaps(leaf_profiles) -> np.ndarray:
    out = []
    for lo, hi in zip(leaf_profiles[:-1], leaf_profiles[1:]):
        hi_on_lo = np.interp(lo.theta_grid, hi.theta_grid, hi.values)
        out.append(float(np.min(hi_on_lo[1:] - lo.values[1:])))
    return np.array(out)


def _axis_slope(profile: PsiProfile) -> float:
    h = profile.h
    return (16.0 * profile.values[1] - profile.values[2]) / (12.0 * h * h)


def evolve_family(
    amb: AmbientCongruence,
    leaf_angles,
    template: SolverConfig,
    amplitude_frac: float = 0.0,
    n_samples: int = 60,
) -> FamilyReport:
    """Run each leaf's boundary-value problem to steady state.

    Leaf i gets theta0 = vartheta_i, C0 = psi_tilde(vartheta_i) and the
    template's remaining settings with a grid of shared spacing h (so all
    grids are aligned and the disjointness interpolation is exact).  Initial
    leaves are perturbed holomorphic leaves; the perturbation amplitude is
    capped at a quarter of the local gap so the initial family is ordered.
    Separations and per-leaf errors are recorded on a fixed schedule of time
    samples; any leaf failure or nonpositive separation flags the family.
    """
    leaf_angles = np.asarray(leaf_angles, dtype=float)
    if np.any(np.diff(leaf_angles) <= 0.0) or leaf_angles[0] <= 0.0 or leaf_angles[-1] > amb.vartheta0:
        raise ValueError("leaf angles must be strictly increasing in (0, vartheta0]")
    h = amb.vartheta0 / template.grid_n
    counts = leaf_angles / h
    if np.any(np.abs(counts - np.round(counts)) > 1e-9):
        raise ValueError("leaf angles must be multiples of the shared grid spacing")

    configs, states, limits = [], [], []
    for ang in leaf_angles:
        n_i = int(round(ang / h))
        cfg = replace(
            template,
            theta0=float(ang),
            c0=amb.psi(float(ang)),
            grid_n=n_i,
            initial_kind="limit",
        )
        cfg.validate()
        limits.append(bishop_limit_leaf(amb, float(ang), cfg.grid))
        configs.append(cfg)

    # initial family: perturbed limit leaves with ordering-safe amplitudes.
    # The bump and the adjacent gaps both vanish quadratically at the axis,
    # so the cap compares them pointwise: amp <= min_theta gap/(4 bump).
    def bump_shape(cfg):
        return np.sin(math.pi * cfg.grid / cfg.theta0) ** 2

    def gap_over_bump(i_lo, cfg_bump):
        lo, hi = limits[i_lo], limits[i_lo + 1]
        gap = np.interp(lo.theta_grid, hi.theta_grid, hi.values) - lo.values
        shape = np.interp(lo.theta_grid, cfg_bump.grid, bump_shape(cfg_bump))
        mask = shape > 1e-12
        return float(np.min(gap[mask] / shape[mask])) if np.any(mask) else np.inf

    for i, cfg in enumerate(configs):
        amp = amplitude_frac * cfg.c0
        cap = np.inf
        if i > 0:
            cap = min(cap, gap_over_bump(i - 1, cfg) / 4.0)
        if i < len(configs) - 1:
            cap = min(cap, gap_over_bump(i, cfg) / 4.0)
        amp = float(min(amp, cap))
        values = limits[i].values + amp * bump_shape(cfg)
        if np.any(np.diff(values) <= 0.0):
            raise DefinitenessError(f"initial leaf {i} is not definite")
        states.append(FlowState(t=0.0, profile=PsiProfile(cfg.grid, values, axis_pinned=cfg.c1 == 0.0)))

    if len(states) > 1:
        gaps0 = _adjacent_gaps([s.profile for s in states])
        if gaps0.min() <= 0.0:
            bad = int(np.argmin(gaps0))
            raise ValueError(f"initial leaves cross between leaf {bad} and {bad + 1}")

    sample_times = np.linspace(0.0, template.t_end, n_samples + 1)
    linf_series = np.zeros((n_samples + 1, len(configs)))
    sep_series = np.zeros((n_samples + 1, max(len(configs) - 1, 1)))
    leaf_done = [False] * len(configs)
    failure = None

    def record(row):
        profs = [s.profile for s in states]
        if len(profs) > 1:
            sep_series[row] = _adjacent_gaps(profs)
        for i, s in enumerate(states):
            linf_series[row, i] = float(np.max(np.abs(s.profile.values - limits[i].values)))

    record(0)
    check_every = template.monitor_every
    for row, t_target in enumerate(sample_times[1:], start=1):
        for i, (cfg, s) in enumerate(zip(configs, states)):
            if leaf_done[i]:
                continue
            try:
                n = 0
                while s.t < t_target:
                    s = step(s, cfg)
                    n += 1
                    if n % check_every == 0:
                        res = float(np.max(np.abs(reduced_rhs(s.profile, cfg.k, s)[:-1])))
                        if res <= cfg.tol_steady:
                            leaf_done[i] = True
                            break
            except DefinitenessError as err:
                failure = f"leaf {i}: {err}"
                leaf_done[i] = True
            states[i] = s
        record(row)
        if all(leaf_done):
            sep_series[row + 1:] = sep_series[row]
            linf_series[row + 1:] = linf_series[row]
            break

    leaves = []
    for i, (cfg, s) in enumerate(zip(configs, states)):
        res = float(np.max(np.abs(reduced_rhs(s.profile, cfg.k, s)[:-1])))
        coeffs = limit_coefficients(cfg.theta0, cfg.c0, cfg.c1)
        leaves.append(
            LeafResult(
                vartheta=cfg.theta0,
                converged=res <= cfg.tol_steady,
                t_converged=s.t,
                linf_error_to_limit=float(np.max(np.abs(s.profile.values - limits[i].values))),
                a=coeffs.a,
                b=coeffs.b,
                final_profile=s.profile,
                axis_slope=_axis_slope(s.profile),
            )
        )
    min_sep = float(np.min(sep_series)) if len(configs) > 1 else math.inf
    filling = failure is None and all(l.converged for l in leaves) and min_sep > 0.0
    return FamilyReport(
        leaves=leaves,
        sample_times=sample_times,
        linf_series=linf_series,
        separation_series=sep_series,
        min_separation=min_sep,
        filling=filling,
        failure=failure,
    )
