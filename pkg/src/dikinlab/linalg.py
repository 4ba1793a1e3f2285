"""Small dense linear algebra and polynomial utilities.

Vectors and matrices are plain float64 numpy arrays.  The factorization and
the root finder are written out here on purpose: the Cholesky solve must fail
loudly on tiny pivots, and the root finder serves as an oracle that is
independent of numpy's eigenvalue routines.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import tolerances as tol
from .errors import IllConditioned, NoConvergence, PreconditionViolated

_OPS = ("mul", "div", "pow", "sqrt", "add", "sub")


def as_vec(u) -> np.ndarray:
    v = np.asarray(u, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise PreconditionViolated("expected a non-empty 1-d vector")
    return v


def elementwise(op: str, u, v=None) -> np.ndarray:
    """Coordinatewise product, quotient, power or square root.

    ``op`` is one of ``mul``, ``div``, ``pow``, ``sqrt``, ``add``, ``sub``.
    For ``pow`` the second argument may be a scalar exponent.  ``sqrt``
    ignores ``v``.
    """
    if op not in _OPS:
        raise PreconditionViolated(f"unknown elementwise op {op!r}")
    a = as_vec(u)
    if op == "sqrt":
        if np.any(a < 0):
            raise PreconditionViolated("negative operand under square root")
        return np.sqrt(a)
    if op == "pow" and np.isscalar(v):
        out = a ** float(v)
    else:
        b = as_vec(v)
        if b.shape != a.shape:
            raise PreconditionViolated(f"length mismatch {a.size} != {b.size}")
        if op == "mul":
            out = a * b
        elif op == "div":
            if np.any(b == 0):
                raise PreconditionViolated("zero divisor")
            out = a / b
        elif op == "add":
            out = a + b
        elif op == "sub":
            out = a - b
        else:
            out = a ** b
    if not np.all(np.isfinite(out)):
        raise PreconditionViolated("non-finite result")
    return out


def cholesky(M) -> np.ndarray:
    """Lower-triangular L with L @ L.T == M.

    Raises IllConditioned when a pivot drops below PIVOT_TOL times the
    largest diagonal entry of M (this also catches indefinite input).
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise PreconditionViolated("matrix must be square")
    n = M.shape[0]
    scale = float(np.max(np.abs(np.diag(M)))) if n else 0.0
    if not np.isfinite(scale) or scale <= 0.0:
        raise IllConditioned("zero or non-finite diagonal")
    L = np.zeros_like(M)
    for j in range(n):
        pivot = M[j, j] - L[j, :j] @ L[j, :j]
        if not pivot > tol.PIVOT_TOL * scale:
            raise IllConditioned(f"pivot {pivot:.3e} at column {j} (scale {scale:.3e})")
        L[j, j] = math.sqrt(pivot)
        for i in range(j + 1, n):
            L[i, j] = (M[i, j] - L[i, :j] @ L[j, :j]) / L[j, j]
    return L


def _cho_solve(L: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    n = L.shape[0]
    z = np.zeros(n)
    for i in range(n):
        z[i] = (rhs[i] - L[i, :i] @ z[:i]) / L[i, i]
    x = np.zeros(n)
    for i in reversed(range(n)):
        x[i] = (z[i] - L[i + 1:, i] @ x[i + 1:]) / L[i, i]
    return x


def solve_spd(M, rhs) -> np.ndarray:
    """Solve M z = rhs for symmetric positive definite M.

    One pass of residual correction follows the triangular solves.
    """
    M = np.asarray(M, dtype=float)
    rhs = as_vec(rhs)
    if M.shape != (rhs.size, rhs.size):
        raise PreconditionViolated(f"shape mismatch {M.shape} vs {rhs.size}")
    if np.max(np.abs(M - M.T)) > 1e-12 * np.max(np.abs(M)):
        raise IllConditioned("matrix is not symmetric")
    L = cholesky(M)
    z = _cho_solve(L, rhs)
    z += _cho_solve(L, rhs - M @ z)
    return z


@dataclass(frozen=True)
class Poly:
    """Real polynomial sum(a_k * lam**k); ``coeffs`` runs a_0 .. a_m."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        c = tuple(float(a) for a in self.coeffs)
        if len(c) < 1:
            raise PreconditionViolated("empty coefficient list")
        if c[-1] == 0.0:
            raise PreconditionViolated("leading coefficient must be nonzero")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        acc = 0.0 * z
        for a in reversed(self.coeffs):
            acc = acc * z + a
        return acc


def enestrom_kakeya_bounds(p: Poly | Sequence[float]) -> tuple[float, float]:
    """Annulus (alpha, beta) containing every root of a positive-coefficient polynomial."""
    a = p.coeffs if isinstance(p, Poly) else tuple(float(x) for x in p)
    if len(a) < 2:
        raise PreconditionViolated("degree must be at least 1")
    if any(not ak > 0 for ak in a):
        raise PreconditionViolated("all coefficients must be strictly positive")
    ratios = [a[k] / a[k + 1] for k in range(len(a) - 1)]
    return min(ratios), max(ratios)


_ANGLE_OFFSET = math.sqrt(2.0) - 1.0


def poly_roots(p: Poly | Sequence[float], max_iter: int = tol.ROOT_MAX_ITER) -> list[complex]:
    """All complex roots by Durand-Kerner simultaneous iteration.

    Starting points sit on a circle; for positive coefficients its radius is
    the midpoint of the Enestrom-Kakeya annulus, otherwise a Cauchy-type bound
    is used.  Deterministic: no random numbers are involved.
    """
    if not isinstance(p, Poly):
        p = Poly(tuple(p))
    m = p.degree
    if m < 1:
        raise PreconditionViolated("degree must be at least 1")
    a = np.array(p.coeffs) / p.coeffs[-1]
    if m == 1:
        return [complex(-a[0])]
    if np.all(a > 0):
        lo, hi = enestrom_kakeya_bounds(tuple(a))
        radius = 0.5 * (lo + hi)
    else:
        radius = 0.5 * (1.0 + float(np.max(np.abs(a[:-1]))))

    z = np.array([radius * cmath.exp(1j * (2 * math.pi * k / m + _ANGLE_OFFSET)) for k in range(m)])

    def peval(x):
        acc = np.zeros_like(x)
        for c in reversed(a):
            acc = acc * x + c
        return acc

    for _ in range(max_iter):
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        denom = np.prod(diff, axis=1)
        if np.any(denom == 0):
            # coincident iterates: nudge them apart deterministically
            z = z * (1.0 + 1e-8 * np.exp(1j * np.arange(m)))
            continue
        step = peval(z) / denom
        z = z - step
        if np.max(np.abs(step)) <= 1e-15 * max(1.0, float(np.max(np.abs(z)))):
            break

    # Newton polish against the original coefficients
    deriv = np.array([k * a[k] for k in range(1, m + 1)])
    for _ in range(3):
        dp = np.zeros_like(z)
        for c in reversed(deriv):
            dp = dp * z + c
        ok = dp != 0
        z[ok] = z[ok] - peval(z[ok]) / dp[ok]

    # |p(root)| <= tol * max|a_k|, measured against max(1, |root|)**m so that
    # roots outside the unit disc are judged on the scale rounding allows
    scale = max(abs(c) for c in p.coeffs) * np.maximum(1.0, np.abs(z)) ** m
    resid = np.abs(np.array([p(complex(r)) for r in z]))
    if not np.all(resid <= tol.ROOT_RESIDUAL * scale):
        raise NoConvergence(f"root residual {resid.max():.3e} exceeds tolerance")
    return [complex(r) for r in z]


def charpoly_companion(sub_diagonal: Sequence[float], last_column: Sequence[float]) -> Poly:
    """det(lam*I - A) for A with sub-diagonal d and last column -c.

    Built by expansion along the first row:
    p_k(lam) = lam * p_{k-1}(lam) + c_1 * d_1 * ... * d_{k-1},
    where p_{k-1} belongs to the trailing minor (entries d_2.., c_2..).
    """
    d = list(sub_diagonal)
    c = list(last_column)
    if len(c) != len(d) + 1:
        raise PreconditionViolated("need len(last_column) == len(sub_diagonal) + 1")
    # innermost 1x1 minor [-c_m]: lam + c_m
    coeffs = [c[-1], 1.0]
    for i in range(len(c) - 2, -1, -1):
        const = c[i] * math.prod(d[i:])
        coeffs = [const] + coeffs
    return Poly(tuple(coeffs))
