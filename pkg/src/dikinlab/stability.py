"""Closed-form fixed points, bifurcation thresholds and periodic-orbit certificates.

Covers the period-two regime (the minimum coordinate map h and its fixed point
r), the transversal eigenvalue of the second iterate on three coordinates, the
logistic-map embedding of superstable cycles and the cyclic period-n orbit
that exists for theta close to 1.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import tolerances as tol
from .dikin import dikin_step, f_map, g_map, h_map, normalize
from .errors import (
    BracketError,
    ClaimViolated,
    DegenerateInput,
    NotApplicable,
    PreconditionViolated,
)
from .linalg import Poly, charpoly_companion, enestrom_kakeya_bounds

log = logging.getLogger(__name__)

GOLDEN_THETA = (1.0 + math.sqrt(5.0)) / 4.0


def bisect(fn, lo: float, hi: float, xtol: float = tol.BISECT_TOL) -> float:
    """Root of fn on [lo, hi] given a sign change; returns the midpoint of the final bracket."""
    flo, fhi = fn(lo), fn(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(f"no sign change on [{lo}, {hi}]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol or mid in (lo, hi):
            break
        fm = fn(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _sign_changes(fn, lo: float, hi: float, points: int = tol.SCAN_POINTS) -> list[tuple[float, float]]:
    xs = np.linspace(lo, hi, points + 1)
    vals = np.array([fn(x) for x in xs])
    out = []
    for i in range(points):
        if np.isfinite(vals[i]) and np.isfinite(vals[i + 1]) and (vals[i] > 0) != (vals[i + 1] > 0):
            out.append((float(xs[i]), float(xs[i + 1])))
    return out


# --- period two ---------------------------------------------------------------

def fixed_point_r(theta: float) -> float:
    """Positive root of theta r^2 + (theta-1) r + (theta-1) = 0, the fixed point of h."""
    if not theta > 0:
        raise PreconditionViolated("theta must be positive")
    a = 1.0 - theta
    return (a + math.sqrt(a * a + 4.0 * theta * a)) / (2.0 * theta)


@dataclass(frozen=True)
class PeriodTwoData:
    theta: float
    r: float
    s: float
    g_prime_at_s: float


def g_prime(theta: float, pivot: float, x: float) -> float:
    den = f_map(theta, pivot)
    if not den > 0:
        raise DegenerateInput("f(pivot) must be positive")
    return (1.0 - 2.0 * theta * x) / den


def period_two_data(theta: float) -> PeriodTwoData:
    if not 2.0 / 3.0 < theta < 1.0:
        raise NotApplicable("period-two analysis needs 2/3 < theta < 1")
    r = fixed_point_r(theta)
    s = (r + theta - 1.0) / (r * theta)
    gps = (2.0 - r - 2.0 * theta) / (1.0 - theta)
    return PeriodTwoData(theta=theta, r=r, s=s, g_prime_at_s=gps)


# --- second iterate on three coordinates ----------------------------------------

def second_iterate_F(theta: float, x: float, y: float) -> tuple[float, float]:
    """Two Dikin steps on (x, y, 1), read back as the first two coordinates.

    Valid while f(x) is the largest value in the first step and the image of
    the last coordinate carries the largest value in the second.
    """
    fx = f_map(theta, x)
    if fx == 0:
        raise DegenerateInput("f(x) vanishes")
    den = 1.0 - theta * (1.0 - theta) / fx
    if den == 0:
        raise DegenerateInput("second-step scaling vanishes")
    fy = f_map(theta, y)
    F1 = fx / den
    F2 = fy / (1.0 - theta) * (1.0 - theta * fy / fx) / den
    return F1, F2


def dF1_dx(theta: float, x: float) -> float:
    t = theta
    num = (x - 3 * t * x**2 - 2 * t + 2 * t**2 + 2 * t**2 * x**3 + 4 * t**2 * x - 4 * t**3 * x) * x * (1 - t * x)
    return num / (-x + t * x**2 + t - t**2) ** 2


def dF2_dy_displayed(theta: float, x: float, y: float) -> float:
    """The transversal derivative in its commonly printed form; exact only for x == y."""
    t = theta
    num = x - t * x**2 - 2 * y * t + 6 * y**2 * t**2 - 2 * x**2 * t + 2 * y * t**2 * x**2 - 4 * y**3 * t**3
    return num / ((-x + t * x**2 + t - t**2) * (-1 + t))


def dF2_dy(theta: float, x: float, y: float) -> float:
    """Exact partial derivative of the second component of F with respect to y."""
    t = theta
    num = (2 * t * y - 1) * (-2 * t**2 * y**2 + t * x**2 + 2 * t * y - x)
    return num / ((t - 1) * (-t**2 + t * x**2 + t - x))


def transversal_eigenvalue(theta: float) -> float:
    """dF2/dy at the diagonal fixed point (r, r)."""
    if not 2.0 / 3.0 < theta < 1.0:
        raise NotApplicable("needs 2/3 < theta < 1")
    r = fixed_point_r(theta)
    return dF2_dy_displayed(theta, r, r)


def find_period4_threshold(bracket: tuple[float, float] = tol.PERIOD4_BRACKET) -> float:
    """theta at which the transversal eigenvalue crosses -1."""
    return bisect(lambda t: transversal_eigenvalue(t) + 1.0, *bracket)


# --- logistic embedding -------------------------------------------------------

def logistic(theta: float, x: float) -> float:
    return 4.0 * theta * x * (1.0 - x)


def _critical_return(theta: float, m: int) -> float:
    x = 0.5
    for _ in range(m):
        x = logistic(theta, x)
    return x - 0.5


def logistic_superstable_theta(m: int) -> float:
    """Smallest theta in (3/4, 1) whose critical point 1/2 has minimal period m."""
    if m == 1:
        return 0.5
    if not 2 <= m <= 12:
        raise PreconditionViolated("period must lie in 2..12")
    for lo, hi in _sign_changes(lambda t: _critical_return(t, m), 0.75, 1.0):
        t = bisect(lambda t: _critical_return(t, m), lo, hi, xtol=1e-15)
        if abs(_critical_return(t, m)) > 1e-9:
            continue  # pole-like sign flip, not a root
        if all(abs(_critical_return(t, k)) > 1e-6 for k in range(1, m)):
            return t
    raise NotApplicable(f"no superstable parameter of period {m} in (3/4, 1)")


@dataclass(frozen=True)
class EmbeddedOrbit:
    theta: float
    m: int
    points: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        if len(self.points) != self.m:
            raise PreconditionViolated("need exactly m points")


def verify_cycle(theta: float, points, atol: float = 1e-10) -> None:
    m = len(points)
    for i, p in enumerate(points):
        nxt = dikin_step(theta, p)
        if np.max(np.abs(nxt - points[(i + 1) % m])) > atol:
            raise ClaimViolated(f"point {i} does not map onto its successor")
    for q in range(1, m):
        if m % q == 0 and np.max(np.abs(points[q] - points[0])) <= atol:
            raise ClaimViolated(f"cycle has smaller period {q}")


def _cycle_from(theta: float, w0: np.ndarray, m: int) -> tuple[np.ndarray, ...]:
    pts = [w0]
    for _ in range(m - 1):
        pts.append(dikin_step(theta, pts[-1]))
    return tuple(pts)


def embed_logistic_orbit(m: int, n: int) -> EmbeddedOrbit:
    """Superstable m-cycle of the Dikin process in dimension n.

    The first m coordinates are Q^i(1/2)/theta; the remaining n - m
    coordinates repeat the cycle so the whole vector stays m-periodic.
    """
    if n < m:
        raise PreconditionViolated(f"dimension {n} smaller than period {m}")
    if m < 2:
        raise PreconditionViolated("period must be at least 2")
    theta = logistic_superstable_theta(m)
    q, coords = 0.5, []
    for _ in range(m):
        q = logistic(theta, q)
        coords.append(q / theta)
    coords[-1] = 1.0 / (2.0 * theta)  # Q^m(c) == c up to rounding
    w = np.array([coords[i % m] for i in range(n)])
    pts = _cycle_from(theta, normalize(w), m)
    verify_cycle(theta, pts)
    return EmbeddedOrbit(theta=theta, m=m, points=pts)


def cyclic_jacobian(theta: float, ys) -> np.ndarray:
    """DF of the cyclic map (y_1..y_{m-1}, 1) -> (f(1), f(y_1), .., f(y_{m-2}))/f(y_{m-1}).

    ``ys`` is y_1..y_{m-1}; the result is (m-1) x (m-1).
    """
    ys = np.asarray(ys, dtype=float)
    k = ys.size
    p = ys[-1]
    fp = f_map(theta, p)
    dfp = 1.0 - 2.0 * theta * p
    prev = np.concatenate(([1.0], ys[:-1]))
    DF = np.zeros((k, k))
    DF[:, -1] = -dfp * f_map(theta, prev) / fp**2
    for j in range(1, k):
        DF[j, j - 1] += (1.0 - 2.0 * theta * ys[j - 1]) / fp
    return DF


def _orbit_ys(orbit: EmbeddedOrbit) -> np.ndarray:
    # points[0] starts (1, y_1, ..., y_{m-1}) in its first m slots
    return np.asarray(orbit.points[0][1:orbit.m])


def embedded_orbit_jacobian(theta: float, orbit: EmbeddedOrbit) -> np.ndarray:
    if orbit.m == 1:
        return np.zeros((0, 0))
    ys = _orbit_ys(orbit)
    DF = cyclic_jacobian(theta, ys)
    if abs(ys[-1] - 1.0 / (2.0 * theta)) < 1e-12:
        DF[:, -1] = 0.0  # f'(1/(2 theta)) vanishes exactly
    return DF


# --- near theta = 1 ------------------------------------------------------------

@dataclass(frozen=True)
class CompanionJacobian:
    """Matrix with positive sub-diagonal d and last column -c.

    ``m`` is the matrix order; for a period-n orbit it equals n - 1.
    """

    m: int
    sub_diagonal: tuple[float, ...]
    last_column: tuple[float, ...]

    def matrix(self) -> np.ndarray:
        A = np.zeros((self.m, self.m))
        A[:, -1] = -np.asarray(self.last_column)
        for i, d in enumerate(self.sub_diagonal):
            A[i + 1, i] = d
        return A

    def invariants_hold(self) -> bool:
        d, c = self.sub_diagonal, self.last_column
        return (
            all(d[i] > d[i + 1] for i in range(len(d) - 1))
            and all(x > 0 for x in d)
            and c[0] > 0
            and all(c[i] < c[i + 1] for i in range(len(c) - 1))
            and c[-1] < 1
        )

    def ratio_condition(self) -> bool:
        d, c = self.sub_diagonal, self.last_column
        return all(c[i] * d[i] < c[i + 1] for i in range(len(d)))


def companion_from_cycle(theta: float, ys) -> CompanionJacobian:
    DF = cyclic_jacobian(theta, ys)
    k = DF.shape[0]
    return CompanionJacobian(
        m=k,
        sub_diagonal=tuple(float(DF[i + 1, i]) for i in range(k - 1)),
        last_column=tuple(float(-v) for v in DF[:, -1]),
    )


def percondit_chain(theta: float, m: int, pivot: float | None = None) -> list[float]:
    """g(1/theta - 1), g^2(1/theta - 1), ..., g^{m-1}(1/theta - 1) for the given pivot."""
    if pivot is None:
        pivot = 1.0 / (2.0 * theta)
    x, out = 1.0 / theta - 1.0, []
    for _ in range(m - 1):
        x = g_map(theta, pivot, x)
        out.append(x)
    return out


def _cyclic_form_ok(theta: float, p: float, ys: list[float]) -> bool:
    if not 0 < ys[0] or not p < 1.0:
        return False
    if any(b <= a for a, b in zip(ys, ys[1:])):
        return False
    if abs(ys[-1] - p) > 1e-9:
        return False
    fp = f_map(theta, p)
    return all(f_map(theta, y) <= fp * (1 + 1e-12) for y in ys) and f_map(theta, 1.0) <= fp


def near_one_periodic_orbit(theta: float, n: int, strict: bool = False) -> tuple[EmbeddedOrbit, CompanionJacobian]:
    """Period-n cyclic orbit (y_1 < ... < y_{n-1} < 1) for theta near 1.

    The pivot y_{n-1} solves g^{n-1}(1/theta - 1) = y_{n-1}.  Roots with
    y_{n-1} <= 1/(2 theta) are preferred (the sufficient condition holds);
    otherwise, unless ``strict``, the lower root of the pair born slightly
    before the condition is used.
    """
    if n < 2:
        raise PreconditionViolated("dimension must be at least 2")
    if not 0.5 < theta < 1.0:
        raise NotApplicable("needs 1/2 < theta < 1")
    m = n
    half = 1.0 / (2.0 * theta)
    sufficient = percondit_chain(theta, m)[-1] <= half
    if strict and not sufficient:
        raise NotApplicable("sufficient condition fails; theta too small for this dimension")

    def phi(p):
        return percondit_chain(theta, m, p)[-1] - p

    valid = []
    for lo, hi in _sign_changes(phi, 1e-3, 1.0 - 1e-9):
        p = bisect(phi, lo, hi, xtol=1e-16)
        ys = percondit_chain(theta, m, p)
        if _cyclic_form_ok(theta, p, ys):
            valid.append((p, ys))
    below = [v for v in valid if v[0] <= half + 1e-15]
    above = [v for v in valid if v[0] > half + 1e-15]
    if below:
        p, ys = max(below, key=lambda v: v[0])
    elif above and not strict:
        p, ys = min(above, key=lambda v: v[0])
    else:
        raise NotApplicable(f"no cyclic period-{n} orbit at theta={theta}")
    ys[-1] = p
    w0 = np.array(ys + [1.0])
    pts = _cycle_from(theta, w0, m)
    verify_cycle(theta, pts)
    cj = companion_from_cycle(theta, ys)
    return EmbeddedOrbit(theta=theta, m=m, points=pts), cj


def certify_contraction(cj: CompanionJacobian) -> tuple[Poly, float]:
    """Characteristic polynomial with strictly decreasing coefficients and its annulus bound.

    Returns (poly, beta) with beta < 1 the outer Enestrom-Kakeya radius.
    """
    if not cj.invariants_hold() or not cj.ratio_condition():
        raise PreconditionViolated(
            "companion Jacobian does not satisfy the certification hypotheses (monotone d and c, ratio condition)"
        )
    p = charpoly_companion(cj.sub_diagonal, cj.last_column)
    a = p.coeffs
    if not (a[-1] == 1.0 and all(a[k] < a[k + 1] for k in range(len(a) - 1)) and a[0] > 0):
        raise ClaimViolated(f"coefficients not strictly decreasing: {a}")
    _, beta = enestrom_kakeya_bounds(p)
    if not beta < 1.0:
        raise ClaimViolated(f"annulus radius {beta} not below 1")
    return p, beta
