"""The Dikin process and its scalar building blocks.

A state is a positive vector whose largest coordinate is exactly 1.  One step
applies f(x) = x(1 - theta x) coordinatewise and rescales by the maximum.
"""
from __future__ import annotations

import numpy as np

from .errors import DegenerateInput, DegenerateStep, NotApplicable, PreconditionViolated


def check_theta(theta: float) -> float:
    theta = float(theta)
    if not 0.0 <= theta <= 1.0:
        raise PreconditionViolated(f"theta must lie in [0, 1], got {theta}")
    return theta


def f_map(theta, x):
    """x(1 - theta x); works on scalars and arrays."""
    return x * (1.0 - theta * x)


def normalize(w) -> np.ndarray:
    """Scale a positive vector so its maximum is exactly 1."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size < 1:
        raise PreconditionViolated("state must be a non-empty vector")
    if not np.all(w > 0) or not np.all(np.isfinite(w)):
        raise PreconditionViolated("state coordinates must be finite and strictly positive")
    i = int(np.argmax(w))
    out = w / w[i]
    out[i] = 1.0
    return out


def dikin_step(theta: float, w) -> np.ndarray:
    """One multiplication-and-scaling step of the Dikin process.

    f is applied to ``w`` as given (no rescaling of the input); the output
    has its maximum coordinate set to exactly 1. The projective form of the
    process is w -> w (1 - theta w / max w), which agrees with this on states.
    """
    theta = check_theta(theta)
    w = np.asarray(w, dtype=float)
    if not np.all(w > 0):
        raise PreconditionViolated("state coordinates must be strictly positive")
    u = w * (1.0 - theta * w)
    if not np.all(u > 0):
        raise DegenerateStep(f"coordinate annihilated at theta={theta}")
    i = int(np.argmax(u))
    out = u / u[i]
    out[i] = 1.0
    return out


def dikin_step_batch(theta, W: np.ndarray) -> np.ndarray:
    """Vectorised step over the rows of W; ``theta`` may be per-row.

    Rows must already be normalized states (max exactly 1); on those the
    result is bit-identical to calling :func:`dikin_step` row by row.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.ndim == 1:
        theta = theta[:, None]
    U = W * (1.0 - theta * W)
    if not np.all(U > 0):
        raise DegenerateStep("coordinate annihilated")
    idx = np.argmax(U, axis=1)
    rows = np.arange(U.shape[0])
    out = U / U[rows, idx][:, None]
    out[rows, idx] = 1.0
    return out


def iterate(theta: float, w, steps: int) -> np.ndarray:
    w = normalize(w)
    for _ in range(steps):
        w = dikin_step(theta, w)
    return w


def random_state(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniform (0,1) coordinates, normalized."""
    if n < 2:
        raise PreconditionViolated("dimension must be at least 2")
    w = rng.uniform(0.0, 1.0, n)
    while np.any(w == 0.0):
        w = rng.uniform(0.0, 1.0, n)
    return normalize(w)


def h_map(theta: float, x: float) -> float:
    """Minimum coordinate after one step when the state is (x, ..., 1): f(1)/f(x)."""
    den = f_map(theta, x)
    if den == 0:
        raise DegenerateInput("x(1 - theta x) vanishes")
    return (1.0 - theta) / den


def g_map(theta: float, pivot: float, x):
    """f(x)/f(pivot): the motion of one coordinate when the pivot holds the max of f."""
    den = f_map(theta, pivot)
    if not den > 0:
        raise DegenerateInput("f(pivot) must be positive")
    return f_map(theta, x) / den


def g_iterate(theta: float, pivot: float, x, k: int):
    for _ in range(k):
        x = g_map(theta, pivot, x)
    return x


def reflect(theta: float, x):
    """Mirror image about 1/(2 theta); f(reflect(x)) == f(x)."""
    if not theta > 0.5:
        raise PreconditionViolated("reflection needs theta > 1/2")
    return 1.0 / theta - x


def trap_interval(theta: float) -> tuple[float, float]:
    """Absorbing coordinate interval (1/theta - 1, 1) for 1/2 < theta <= 1."""
    theta = check_theta(theta)
    if theta <= 0.5:
        raise NotApplicable("for theta <= 1/2 orbits increase monotonically to e")
    return 1.0 / theta - 1.0, 1.0


def cubic_h(theta: float, x):
    """theta x^3 - x^2 + 1 - theta; nonnegative on [0,1] iff h(x) >= x there."""
    return theta * x**3 - x**2 + 1.0 - theta
