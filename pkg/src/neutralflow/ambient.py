"""The neutral metric on the space of oriented lines, off the graph.

Tangent vectors at a point (xi, eta) are stored as a pair of complex
components (v_xi, v_eta); the conjugate components are implied, so the pair
encodes a real vector of the 4-manifold.  The metric is evaluated so that the
adapted orthonormal frames of a definite graph have Gram entries +-1 (this
fixes the overall normalization; the induced 2x2 matrix returned by
geometry.induced_metric keeps its conventional prefactor, which differs by a
factor 2 and affects nothing downstream).

Christoffel symbols are generated symbolically once and cached; they feed the
finite-difference covariant-derivative oracle for the second fundamental form.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import sympy as sp

IDX = ("xi", "eta", "xib", "etab")


def vec4(v_xi: complex, v_eta: complex) -> np.ndarray:
    """Real tangent vector as (v_xi, v_eta, conj v_xi, conj v_eta)."""
    return np.array([v_xi, v_eta, np.conjugate(v_xi), np.conjugate(v_eta)], dtype=complex)


def metric_matrix(xi: complex, eta: complex) -> np.ndarray:
    """Metric components G_jk over the complexified basis (xi, eta, xib, etab)."""
    s = 1.0 + (xi * np.conjugate(xi)).real
    kappa = 4.0 / (s * s)
    m = (np.conjugate(xi) * eta).imag / s
    g = np.zeros((4, 4), dtype=complex)
    g[0, 3] = g[3, 0] = -0.5j * kappa
    g[2, 1] = g[1, 2] = 0.5j * kappa
    g[0, 2] = g[2, 0] = 2.0 * kappa * m
    return g


def metric_eval(xi, eta, x, y) -> float:
    """G(X, Y) for real vectors given by 4-component complexified arrays."""
    g = metric_matrix(xi, eta)
    val = x @ g @ y
    return float(val.real)


@lru_cache(maxsize=1)
def _christoffel_lambdas():
    """Lambdified Christoffel symbols Gamma^i_jk of the neutral metric."""
    xi, eta, xib, etab = sp.symbols("xi eta xib etab")
    coords = (xi, eta, xib, etab)
    s = 1 + xi * xib
    kappa = 4 / s**2
    m = (xib * eta - xi * etab) / (2 * sp.I * s)
    g = sp.zeros(4, 4)
    g[0, 3] = g[3, 0] = -sp.I * kappa / 2
    g[2, 1] = g[1, 2] = sp.I * kappa / 2
    g[0, 2] = g[2, 0] = 2 * kappa * m
    ginv = g.inv()
    gam = [[[sp.S.Zero] * 4 for _ in range(4)] for _ in range(4)]
    for i in range(4):
        for j in range(4):
            for k in range(j, 4):
                expr = sp.S.Zero
                for l in range(4):
                    expr += ginv[i, l] * (
                        sp.diff(g[l, k], coords[j])
                        + sp.diff(g[l, j], coords[k])
                        - sp.diff(g[j, k], coords[l])
                    ) / 2
                expr = sp.simplify(expr)
                gam[i][j][k] = expr
                gam[i][k][j] = expr
    flat = [gam[i][j][k] for i in range(4) for j in range(4) for k in range(4)]
    return sp.lambdify((xi, eta, xib, etab), flat, "numpy")


def christoffel(xi: complex, eta: complex) -> np.ndarray:
    """Gamma^i_jk at the point (xi, eta), shape (4, 4, 4)."""
    flat = _christoffel_lambdas()(xi, eta, np.conjugate(xi), np.conjugate(eta))
    return np.array(flat, dtype=complex).reshape(4, 4, 4)


def covariant_derivative(xi, eta, velocity, field_value, field_derivative) -> np.ndarray:
    """nabla_X Y = dY/ds + Gamma(X, Y) along a curve with tangent X = velocity.

    field_derivative must already be the coordinate derivative of Y along the
    curve; only the Christoffel correction is added here.
    """
    gam = christoffel(xi, eta)
    return field_derivative + np.einsum("ijk,j,k->i", gam, velocity, field_value)
