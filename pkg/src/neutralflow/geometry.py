"""Closed-form geometry of graphical line congruences.

An oriented line in Euclidean 3-space is described by a pair of complex
coordinates (xi, eta): xi is the stereographic direction, eta the fibre
coordinate.  A graphical congruence is a section eta = F(xi, conj(xi)); its
pointwise twist lambda and shear sigma are the weighted complex slopes of F
and determine the induced metric.  Everything here is evaluated in the north
chart (|xi| finite, polar angle theta < pi/2 for the rotationally symmetric
reductions).

Angles are radians, complex numbers are pairs of 64-bit floats, and all
functions are pure.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "OrientedLine",
    "PolarPoint",
    "PsiProfile",
    "TwistShear",
    "MetricSample",
    "StationaryCoeffs",
    "eta_from_psi",
    "line_to_euclidean",
    "distance_sq_to_origin",
    "rotate_line",
    "twist_shear_rotsym",
    "twist_shear_graph",
    "induced_metric",
    "stationary_profile",
    "limit_coefficients",
    "stationary_residual",
    "centered_first",
    "centered_second",
]


@dataclass(frozen=True)
class OrientedLine:
    """Oriented line with direction coordinate xi and fibre coordinate eta."""

    xi: complex
    eta: complex

    def __post_init__(self):
        if not (cmath.isfinite(self.xi) and cmath.isfinite(self.eta)):
            raise ValueError("oriented line coordinates must be finite")


@dataclass(frozen=True)
class PolarPoint:
    """Direction in polar form; xi = tan(theta/2) e^{i phi}."""

    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta < math.pi:
            raise ValueError(f"theta must lie in [0, pi), got {self.theta}")
        if not 0.0 <= self.phi < 2.0 * math.pi:
            raise ValueError(f"phi must lie in [0, 2 pi), got {self.phi}")

    @property
    def xi(self) -> complex:
        return math.tan(self.theta / 2.0) * cmath.exp(1j * self.phi)

    @classmethod
    def from_xi(cls, xi: complex) -> "PolarPoint":
        theta = 2.0 * math.atan(abs(xi))
        phi = cmath.phase(xi) % (2.0 * math.pi) if xi != 0 else 0.0
        return cls(theta, phi)


@dataclass(frozen=True)
class TwistShear:
    """Pointwise twist/shear data of a congruence.

    delta = lambda^2 - |sigma|^2 decides definiteness; rho = eps + i*lambda
    is the weighted slope whose imaginary part is the twist.
    """

    lam: float
    sigma: complex
    rho: complex
    delta: float


@dataclass(frozen=True)
class StationaryCoeffs:
    """Coefficients of the stationary family psi = a + b*cos(2 theta)."""

    a: float
    b: float

    @property
    def holomorphic(self) -> bool:
        scale = max(abs(self.a), abs(self.b), 1.0)
        return abs(self.a + self.b) <= 1e-12 * scale

    def psi(self, theta):
        return self.a + self.b * np.cos(2.0 * np.asarray(theta, dtype=float))

    def dpsi(self, theta):
        return -2.0 * self.b * np.sin(2.0 * np.asarray(theta, dtype=float))


@dataclass(frozen=True)
class MetricSample:
    """Induced metric at a point, in (xi, conj xi) coordinates."""

    components: np.ndarray
    delta: float
    classification: str


@dataclass
class PsiProfile:
    """Sampled radial profile psi(theta) on a grid in [0, theta0]."""

    theta_grid: np.ndarray
    values: np.ndarray
    axis_pinned: bool = False

    def __post_init__(self):
        self.theta_grid = np.asarray(self.theta_grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.theta_grid.shape != self.values.shape or self.theta_grid.ndim != 1:
            raise ValueError("theta grid and values must be 1-d arrays of equal length")
        if np.any(np.diff(self.theta_grid) <= 0.0):
            raise ValueError("theta grid must be strictly increasing")
        if np.any(self.values < -1e-14):
            i = int(np.argmin(self.values))
            raise ValueError(f"psi must be nonnegative; node {i} has psi={self.values[i]}")
        if self.axis_pinned and abs(self.values[0]) > 1e-14:
            raise ValueError("axis-pinned profile must have psi(0) = 0")

    @property
    def h(self) -> float:
        return float(self.theta_grid[1] - self.theta_grid[0])

    @property
    def definite(self) -> bool:
        """Definiteness of the congruence: psi strictly increasing."""
        return bool(np.all(np.diff(self.values) > 0.0))

    def copy(self) -> "PsiProfile":
        return PsiProfile(self.theta_grid.copy(), self.values.copy(), self.axis_pinned)


def centered_first(values, h):
    """Second-order first derivative on a uniform grid, one-sided at the ends."""
    v = np.asarray(values, dtype=float)
    d = np.empty_like(v)
    d[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    d[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    return d


def centered_second(values, h):
    """Second-order second derivative on a uniform grid, one-sided at the ends."""
    v = np.asarray(values, dtype=float)
    d = np.empty_like(v)
    d[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (h * h)
    d[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (h * h)
    d[-1] = (2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]) / (h * h)
    return d


def eta_from_psi(theta: float, phi: float, psi: float) -> complex:
    """Fibre coordinate of the purely twisting line at (theta, phi) with radial value psi.

    eta = i sqrt(psi) sec^2(theta/2) e^{i phi}; the congruence it generates
    keeps the squared distance to the origin equal to 4 psi.
    """
    if not 0.0 <= theta < math.pi:
        raise ValueError(f"theta must lie in [0, pi), got {theta}")
    if psi < 0.0:
        raise ValueError(f"psi must be nonnegative, got {psi}")
    sec2 = 1.0 / math.cos(theta / 2.0) ** 2
    return 1j * math.sqrt(psi) * sec2 * cmath.exp(1j * phi)


def line_to_euclidean(line: OrientedLine, r: float) -> np.ndarray:
    """Point at parameter r along the line; r = 0 is the point closest to the origin."""
    xi, eta = line.xi, line.eta
    s = 1.0 + (xi * xi.conjugate()).real
    w = (2.0 * (eta - eta.conjugate() * xi * xi) + 2.0 * xi * s * r) / (s * s)
    x3 = (-2.0 * (eta * xi.conjugate() + eta.conjugate() * xi) + (1.0 - (xi * xi.conjugate()).real ** 2) * r) / (s * s)
    return np.array([w.real, w.imag, x3.real])


def distance_sq_to_origin(line: OrientedLine) -> float:
    """Squared perpendicular distance of the line to the origin: 4 eta conj(eta) / (1+xi conj(xi))^2."""
    s = 1.0 + (line.xi * line.xi.conjugate()).real
    return 4.0 * (line.eta * line.eta.conjugate()).real / (s * s)


def rotate_line(line: OrientedLine, alpha: float) -> OrientedLine:
    """Rotation about the x3-axis: both coordinates pick up e^{i alpha}."""
    w = cmath.exp(1j * alpha)
    return OrientedLine(line.xi * w, line.eta * w)


def twist_shear_rotsym(theta, psi, dpsi, phi=0.0, quadratic_coeff=None) -> TwistShear:
    """Twist and shear of a purely twisting rotationally symmetric congruence.

    lambda = (psi' + 2 cot(theta) psi) / (2 sqrt(psi)),
    sigma  = i (psi' - 2 cot(theta) psi) e^{-2 i phi} / (2 sqrt(psi)),
    so delta = lambda^2 - |sigma|^2 = 2 cot(theta) psi'.

    At the axis psi = 0 the formulas degenerate; when the caller certifies a
    quadratic zero psi ~ c theta^2 via quadratic_coeff=c, the series limits
    lambda = 2 sqrt(c), sigma = 0, delta = 4c are returned instead.
    """
    if psi <= 0.0 or theta <= 0.0:
        if quadratic_coeff is not None and quadratic_coeff > 0.0:
            c = float(quadratic_coeff)
            lam = 2.0 * math.sqrt(c)
            return TwistShear(lam=lam, sigma=0.0 + 0.0j, rho=1j * lam, delta=4.0 * c)
        raise ValueError(
            "twist/shear undefined at psi <= 0 unless a quadratic axis zero is certified"
        )
    if not theta < math.pi / 2.0:
        raise ValueError(f"theta must lie in (0, pi/2), got {theta}")
    cot = math.cos(theta) / math.sin(theta)
    root = 2.0 * math.sqrt(psi)
    lam = (dpsi + 2.0 * cot * psi) / root
    sigma = 1j * (dpsi - 2.0 * cot * psi) / root * cmath.exp(-2j * phi)
    delta = 2.0 * cot * dpsi
    return TwistShear(lam=lam, sigma=sigma, rho=1j * lam, delta=delta)


def twist_shear_graph(jet) -> TwistShear:
    """Twist and shear from a pointwise jet of a graphical section.

    sigma = -partial conj(F); rho = (1+xi conj xi)^2 partial [F (1+xi conj xi)^{-2}];
    lambda = Im(rho).  The jet only needs fields xi, F, dF, dbF.
    """
    xi = jet.xi
    s = 1.0 + (xi * xi.conjugate()).real
    sigma = -jet.dbF.conjugate()
    rho = jet.dF - 2.0 * xi.conjugate() * jet.F / s
    lam = rho.imag
    delta = lam * lam - abs(sigma) ** 2
    return TwistShear(lam=lam, sigma=sigma, rho=rho, delta=delta)


def induced_metric(ts: TwistShear, xi: complex) -> MetricSample:
    """Induced metric matrix in (xi, conj xi) coordinates and its type.

    The matrix is (2/(1+xi conj xi)^2) [[i sigma, -lambda], [-lambda, -i conj sigma]];
    the classification uses only the signs of delta and lambda (the
    determinant is taken from the matrix itself, never hard-coded).
    """
    s = 1.0 + (xi * xi.conjugate()).real
    pref = 2.0 / (s * s)
    g = pref * np.array(
        [[1j * ts.sigma, -ts.lam], [-ts.lam, -1j * ts.sigma.conjugate()]],
        dtype=complex,
    )
    if ts.delta > 0.0:
        kind = "definite-negative" if ts.lam > 0.0 else "definite-positive"
    elif ts.delta < 0.0:
        kind = "lorentz"
    else:
        kind = "degenerate"
    return MetricSample(components=g, delta=ts.delta, classification=kind)


def stationary_profile(coeffs: StationaryCoeffs, grid) -> PsiProfile:
    """Sample psi = a + b cos(2 theta) on the grid; negative values are rejected."""
    grid = np.asarray(grid, dtype=float)
    values = coeffs.psi(grid)
    if np.any(values < -1e-14):
        raise ValueError("a + b cos(2 theta) is negative on the grid")
    values = np.maximum(values, 0.0)
    pinned = bool(abs(values[0]) <= 1e-14 and grid[0] == 0.0)
    return PsiProfile(grid, values, axis_pinned=pinned)


def limit_coefficients(theta0: float, c0: float, c1: float) -> StationaryCoeffs:
    """Stationary coefficients matching the boundary data at theta0.

    Solves a + b cos(2 theta0) = c0 and psi'(theta0) = 2 c0 cot(theta0) - c1
    in closed form:

        a = (-c1 cos(2 theta0) + 2 cot(theta0) c0) / (2 cot(theta0) (1 - cos(2 theta0)))
        b = ( c1 - 2 cot(theta0) c0)               / (same denominator)

    c1 = 0 gives a = -b, the shear-free member; the axis value is always
    a + b = (c1/2) tan(theta0).
    """
    if not 0.0 < theta0 < math.pi / 2.0:
        raise ValueError(f"theta0 must lie in (0, pi/2), got {theta0}")
    if c0 <= 0.0:
        raise ValueError(f"c0 must be positive, got {c0}")
    cot = math.cos(theta0) / math.sin(theta0)
    cos2 = math.cos(2.0 * theta0)
    den = 2.0 * cot * (1.0 - cos2)
    a = (-c1 * cos2 + 2.0 * cot * c0) / den
    b = (c1 - 2.0 * cot * c0) / den
    return StationaryCoeffs(a=a, b=b)


def stationary_residual(profile: PsiProfile, k: float) -> float:
    """Sup-norm of the steady-state equation over interior nodes.

    residual_i = (sqrt(psi)/psi') psi'' - k sqrt(psi) cot(2 theta), with
    centered differences.  Requires psi' > 0 strictly inside the domain.
    """
    theta = profile.theta_grid[1:-1]
    psi = profile.values[1:-1]
    h = profile.h
    dpsi = (profile.values[2:] - profile.values[:-2]) / (2.0 * h)
    d2psi = (profile.values[2:] - 2.0 * profile.values[1:-1] + profile.values[:-2]) / (h * h)
    if np.any(dpsi <= 0.0):
        i = int(np.argmin(dpsi)) + 1
        raise ZeroDivisionError(f"psi' vanishes at interior node {i}; residual undefined")
    root = np.sqrt(psi)
    res = root / dpsi * d2psi - k * root / np.tan(2.0 * theta)
    return float(np.max(np.abs(res)))
