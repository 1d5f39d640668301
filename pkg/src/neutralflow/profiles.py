"""Radial profile functions psi(theta) for rotationally symmetric congruences.

A purely twisting rotationally symmetric line congruence is described by a
single nonnegative radial function psi on the polar angle theta (one quarter
of the squared distance of each line to the origin).  Closed-form profiles
are kept as sympy expressions so that exact derivatives of any order are
available to the geometric oracle; tabulated profiles carry a spline and are
good enough for boundary data.
"""

from __future__ import annotations

import numpy as np
import sympy as sp
from scipy.interpolate import CubicSpline

_THETA = sp.Symbol("theta", positive=True)


class SymbolicProfile:
    """psi(theta) given in closed form; derivatives are exact."""

    def __init__(self, expr, name=None):
        expr = sp.sympify(expr)
        free = expr.free_symbols - {_THETA}
        if free:
            raise ValueError(f"profile expression has unbound symbols: {free}")
        self.expr = expr
        self.name = name or str(expr)
        self._f = {}

    def derivative_lambda(self, order):
        """Cached numpy-callable for the order-th theta derivative."""
        if order not in self._f:
            self._f[order] = sp.lambdify(_THETA, sp.diff(self.expr, _THETA, order), "numpy")
        return self._f[order]

    def psi(self, theta):
        return self.derivative_lambda(0)(theta)

    def dpsi(self, theta):
        return self.derivative_lambda(1)(theta)

    def d2psi(self, theta):
        return self.derivative_lambda(2)(theta)

    def __call__(self, theta):
        return self.psi(theta)

    def __repr__(self):
        return f"SymbolicProfile({self.name})"


class TabulatedProfile:
    """psi(theta) sampled on a grid; cubic-spline evaluation."""

    def __init__(self, theta, values, name="table"):
        theta = np.asarray(theta, dtype=float)
        values = np.asarray(values, dtype=float)
        if theta.ndim != 1 or theta.size < 4:
            raise ValueError("tabulated profile needs at least 4 samples")
        if np.any(np.diff(theta) <= 0):
            raise ValueError("tabulated profile grid must be strictly increasing")
        if np.any(values < 0):
            raise ValueError("tabulated profile values must be nonnegative")
        self.name = name
        self._spline = CubicSpline(theta, values)

    def psi(self, theta):
        return self._spline(theta)

    def dpsi(self, theta):
        return self._spline(theta, 1)

    def d2psi(self, theta):
        return self._spline(theta, 2)

    def __call__(self, theta):
        return self.psi(theta)

    def __repr__(self):
        return f"TabulatedProfile({self.name})"


def cosine_profile(a, b):
    """psi = a + b*cos(2 theta); the stationary family of the reduced flow."""
    return SymbolicProfile(a + b * sp.cos(2 * _THETA), name=f"cosine(a={a},b={b})")


def holomorphic_profile(a):
    """psi = a*(1 - cos 2 theta) = 2a sin^2(theta); shear-free for a > 0."""
    return SymbolicProfile(a * (1 - sp.cos(2 * _THETA)), name=f"holomorphic(a={a})")


# Fixture profiles used by the reduction oracle and the CLI defaults.
_REGISTRY = {
    "tan2": lambda: SymbolicProfile(sp.tan(_THETA) ** 2, name="tan2"),
    "sin2-bump": lambda: SymbolicProfile(
        2 * sp.sin(_THETA) ** 2 + sp.Rational(1, 10) * sp.sin(2 * _THETA) ** 2,
        name="sin2-bump",
    ),
    "cos-shift": lambda: SymbolicProfile(
        1 - sp.Rational(1, 2) * sp.cos(2 * _THETA), name="cos-shift"
    ),
}

ORACLE_PROFILE_NAMES = ("tan2", "sin2-bump", "cos-shift")


def named_profile(name):
    """Look up a registered closed-form profile by name."""
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; known: {sorted(_REGISTRY)}") from None
