"""Omega-limit estimation, period detection and Feigenbaum sweeps.

Orbits are run in batches (one row per (theta, seed) pair) so a whole sweep
advances with a handful of numpy operations per step.  A row's period is the
smallest p with max_k |w[k+p] - w[k]| <= match_tol over the kept tail.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dikin import check_theta, dikin_step, normalize, random_state
from .errors import DegenerateStep, NotFound, PreconditionViolated

CONVERGED = "converged-point"
PERIODIC = "periodic"
APERIODIC = "aperiodic"
UNRESOLVED = "unresolved"
ERROR = "error"


@dataclass(frozen=True)
class OrbitConfig:
    burn_in: int = 100_000
    keep: int = 512
    period_max: int = 64
    match_tol: float = 1e-7
    seed: int = 0
    # unresolved rows get their burn-in doubled until this many steps
    max_burn_in: int = 10_000_000

    def __post_init__(self):
        if self.keep < 2 * self.period_max:
            raise PreconditionViolated("keep must be at least 2 * period_max")
        if self.period_max < 1 or self.burn_in < 0:
            raise PreconditionViolated("period_max >= 1 and burn_in >= 0 required")
        if not self.match_tol > 0:
            raise PreconditionViolated("match_tol must be positive")


@dataclass(frozen=True)
class Projection:
    kind: str  # "fixed-index", "sorted-middle" or "sorted-index"
    index: int | None = None

    def __post_init__(self):
        if self.kind not in ("fixed-index", "sorted-middle", "sorted-index"):
            raise PreconditionViolated(f"unknown projection {self.kind!r}")
        if self.kind != "sorted-middle" and self.index is None:
            raise PreconditionViolated(f"{self.kind} needs an index")

    @classmethod
    def parse(cls, text: str) -> "Projection":
        """'sorted-middle', 'fixed-index:2' or 'sorted-index:0' (indices 0-based)."""
        kind, _, idx = text.partition(":")
        return cls(kind, int(idx) if idx else None)

    def check(self, dim: int) -> None:
        if self.index is not None and not 0 <= self.index < dim:
            raise PreconditionViolated(f"projection index {self.index} outside dimension {dim}")

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Project rows of ``points`` (shape (..., n)) to scalars."""
        self.check(points.shape[-1])
        if self.kind == "fixed-index":
            return points[..., self.index]
        srt = np.sort(points, axis=-1)
        if self.kind == "sorted-middle":
            return srt[..., points.shape[-1] // 2]
        return srt[..., self.index]

    def label(self) -> str:
        return self.kind if self.index is None else f"{self.kind}:{self.index}"


@dataclass
class OrbitSummary:
    classification: str
    period: int | None
    points: np.ndarray  # one cycle for periodic orbits, the kept tail otherwise
    values: dict[str, np.ndarray] = field(default_factory=dict)
    burn_in: int = 0
    error: str | None = None

    @property
    def is_periodic(self) -> bool:
        return self.classification in (CONVERGED, PERIODIC)


@dataclass(frozen=True)
class DikinMap:
    """dikin_step with theta fixed; lets classify_orbit use the batch engine."""

    theta: float

    def __call__(self, w):
        return dikin_step(self.theta, w)


@dataclass(frozen=True)
class TraceReplay:
    """A finite recorded orbit, e.g. the scaled w of an AFS solve."""

    points: np.ndarray


def _batch_step(theta: np.ndarray, W: np.ndarray, alive: np.ndarray) -> np.ndarray:
    # same arithmetic as dikin_step; rows that degenerate are frozen and flagged
    U = W * (1.0 - theta[:, None] * W)
    bad = ~np.all(U > 0, axis=1)
    if bad.any():
        alive &= ~bad
        U[bad] = W[bad]
    idx = np.argmax(U, axis=1)
    rows = np.arange(U.shape[0])
    out = U / U[rows, idx][:, None]
    out[rows, idx] = 1.0
    return out


def _run(theta, W, alive, steps):
    for _ in range(steps):
        W = _batch_step(theta, W, alive)
    return W


def _record(theta, W, alive, keep):
    tail = np.empty((W.shape[0], keep, W.shape[1]))
    for k in range(keep):
        W = _batch_step(theta, W, alive)
        tail[:, k] = W
    return W, tail


# a tail within this distance of a p-cycle is treated as still converging to it
LOOSE_TOL = 1e-3


def _cycle_errors(tail: np.ndarray, period_max: int) -> np.ndarray:
    """err[row, p-1] = max_k |tail[k+p] - tail[k]| for p = 1..period_max."""
    keep = tail.shape[1]
    pmax = min(period_max, keep // 2)
    err = np.empty((tail.shape[0], pmax))
    for p in range(1, pmax + 1):
        err[:, p - 1] = np.max(np.abs(tail[:, p:] - tail[:, :-p]), axis=(1, 2))
    return err


def _first_period(err: np.ndarray, tol: float) -> np.ndarray:
    hit = err <= tol
    return np.where(hit.any(axis=1), hit.argmax(axis=1) + 1, 0)


def tail_periods(tail: np.ndarray, period_max: int, tol: float) -> np.ndarray:
    """Smallest p <= period_max with a cyclic match in every row, 0 if none.

    ``tail`` has shape (rows, keep, n).
    """
    return _first_period(_cycle_errors(tail, period_max), tol)


def _summaries(tail, periods, wide, alive, burn, projections):
    out = []
    for i in range(tail.shape[0]):
        if not alive[i]:
            out.append(OrbitSummary(ERROR, None, tail[i, -1:], burn_in=int(burn[i]),
                                    error="DegenerateStep: coordinate annihilated"))
            continue
        p = int(periods[i])
        if p:
            cls = CONVERGED if p == 1 else PERIODIC
        elif wide[i]:
            cls, p = UNRESOLVED, int(wide[i])
        else:
            cls = APERIODIC
        pts = tail[i, -p:] if p else tail[i]
        s = OrbitSummary(cls, p or None, pts.copy(), burn_in=int(burn[i]))
        for proj in projections:
            s.values[proj.label()] = np.sort(proj.apply(pts))
        out.append(s)
    return out


def classify_batch(theta, W0: np.ndarray, cfg: OrbitConfig,
                   projections: Sequence[Projection] = ()) -> list[OrbitSummary]:
    """Classify one Dikin orbit per row of W0; ``theta`` is scalar or per-row.

    Rows whose tail stays near a p-cycle without matching it at match_tol
    (critical slowing down) have their burn-in doubled, up to
    cfg.max_burn_in, for as long as the cycle error keeps shrinking.  Rows
    still short of match_tol after that are reported as unresolved.
    """
    W = np.array(W0, dtype=float)
    if W.ndim != 2 or W.shape[1] < 1:
        raise PreconditionViolated("W0 must be a 2-d array of states")
    theta = np.broadcast_to(np.asarray(theta, dtype=float), W.shape[:1]).copy()
    for t in np.unique(theta):
        check_theta(t)
    W = np.array([normalize(w) for w in W])
    alive = np.ones(W.shape[0], dtype=bool)
    burn = np.full(W.shape[0], cfg.burn_in, dtype=np.int64)
    W = _run(theta, W, alive, cfg.burn_in)
    W, tail = _record(theta, W, alive, cfg.keep)
    err = _cycle_errors(tail, cfg.period_max)
    improving = np.ones(W.shape[0], dtype=bool)
    while True:
        periods = _first_period(err, cfg.match_tol)
        loose = _first_period(err, LOOSE_TOL)
        redo = alive & (periods == 0) & (loose > 0) & improving & (burn * 2 <= cfg.max_burn_in)
        if not redo.any():
            break
        idx = np.flatnonzero(redo)
        extra = int(burn[idx].max())
        a = alive[idx].copy()
        Wi = _run(theta[idx], W[idx], a, extra)
        Wi, ti = _record(theta[idx], Wi, a, cfg.keep)
        new_err = _cycle_errors(ti, cfg.period_max)
        cand = loose[idx] - 1
        rows = np.arange(idx.size)
        improving[idx] = new_err[rows, cand] <= 0.9 * err[idx, cand]
        W[idx], tail[idx], alive[idx], err[idx] = Wi, ti, a, new_err
        burn[idx] += extra
    periods = _first_period(err, cfg.match_tol)
    wide = _first_period(err, 10 * cfg.match_tol)
    # still contracting toward a cycle when the burn-in cap was hit
    loose = _first_period(err, LOOSE_TOL)
    capped = (periods == 0) & (wide == 0) & (loose > 0) & improving & (burn > cfg.burn_in)
    wide = np.where(capped, loose, wide)
    return _summaries(tail, periods, wide, alive, burn, projections)


def classify_orbit(step: Callable | DikinMap | TraceReplay, w0, cfg: OrbitConfig,
                   projections: Sequence[Projection] = ()) -> OrbitSummary:
    """Classify the omega-limit of one orbit.

    ``step`` is a :class:`DikinMap`, a :class:`TraceReplay` (w0 is then
    ignored and the last ``keep`` points are used as the tail) or any
    callable state -> state.
    """
    if isinstance(step, DikinMap):
        return classify_batch(step.theta, np.asarray(w0, dtype=float)[None, :], cfg, projections)[0]
    if isinstance(step, TraceReplay):
        tail = np.asarray(step.points, dtype=float)
        if tail.ndim != 2 or tail.shape[0] < 2:
            raise PreconditionViolated("trace replay needs at least two points")
        tail = tail[-cfg.keep:][None]
        burn = np.array([len(step.points) - tail.shape[1]])
    else:
        w = np.asarray(w0, dtype=float)
        for _ in range(cfg.burn_in):
            w = step(w)
        rows = []
        for _ in range(cfg.keep):
            w = step(w)
            rows.append(w)
        tail = np.array(rows)[None]
        burn = np.array([cfg.burn_in])
    periods = tail_periods(tail, cfg.period_max, cfg.match_tol)
    wide = tail_periods(tail, cfg.period_max, 10 * cfg.match_tol)
    s = _summaries(tail, periods, wide, np.ones(1, bool), burn, projections)[0]
    if s.classification == APERIODIC and tail.shape[1] < 2 * cfg.period_max:
        # too few points to rule out every period up to period_max
        s.classification = UNRESOLVED
        s.error = f"tail of {tail.shape[1]} points is shorter than 2 * period_max"
    return s


@dataclass
class SweepRow:
    theta: float
    seed: int
    summary: OrbitSummary

    def values(self, projection: Projection) -> np.ndarray:
        return self.summary.values.get(projection.label(), np.zeros(0))


def sweep_starts(dimension: int, theta_grid: Sequence[float], seeds_per_theta: int, seed: int) -> np.ndarray:
    """Initial states for every (theta index, seed index) pair, independent of batching."""
    out = np.empty((len(theta_grid) * seeds_per_theta, dimension))
    for i in range(len(theta_grid)):
        for j in range(seeds_per_theta):
            out[i * seeds_per_theta + j] = random_state(np.random.default_rng([seed, i, j]), dimension)
    return out


def feigenbaum_sweep(dimension: int, theta_grid: Sequence[float], projection: Projection,
                     cfg: OrbitConfig, seeds_per_theta: int = 1) -> list[SweepRow]:
    """Classify a seeded orbit family for every theta; rows come out in grid order.

    A failure at one point is stored in that row's summary, never raised.
    """
    if seeds_per_theta < 1:
        raise PreconditionViolated("seeds_per_theta must be >= 1")
    grid = np.asarray(theta_grid, dtype=float)
    if grid.size and (grid.min() < 0 or grid.max() >= 1):
        raise PreconditionViolated("theta grid must lie in [0, 1)")
    projection.check(dimension)
    W0 = sweep_starts(dimension, grid, seeds_per_theta, cfg.seed)
    thetas = np.repeat(grid, seeds_per_theta)
    summaries = classify_batch(thetas, W0, cfg, [projection]) if grid.size else []
    return [SweepRow(float(t), j % seeds_per_theta, s)
            for j, (t, s) in enumerate(zip(thetas, summaries))]


def theta_grid(lo: float, hi: float, steps: int) -> np.ndarray:
    """steps points covering [lo, hi), endpoint excluded."""
    if steps < 1 or not hi > lo:
        raise PreconditionViolated("need steps >= 1 and hi > lo")
    return lo + (hi - lo) * np.arange(steps) / steps


def onset_scan(dimension: int, predicate: Callable[[OrbitSummary], bool], bracket: tuple[float, float],
               cfg: OrbitConfig | None = None, step: float = 1e-3, seeds_per_theta: int = 4) -> float:
    """First grid theta in ``bracket`` where some seed's summary satisfies ``predicate``."""
    if step > 1e-3:
        raise PreconditionViolated("onset grid step must be <= 1e-3")
    cfg = cfg or OrbitConfig()
    lo, hi = bracket
    steps = int(np.ceil((hi - lo) / step - 1e-9))
    grid = theta_grid(lo, lo + steps * step, steps)
    grid = grid[grid < 1.0]
    rows = feigenbaum_sweep(dimension, grid, Projection("sorted-middle"), cfg, seeds_per_theta)
    for i, t in enumerate(grid):
        chunk = rows[i * seeds_per_theta:(i + 1) * seeds_per_theta]
        if any(predicate(r.summary) for r in chunk):
            return float(t)
    raise NotFound(f"predicate never holds on [{lo}, {hi})")


def is_period(p: int) -> Callable[[OrbitSummary], bool]:
    def pred(s: OrbitSummary) -> bool:
        return s.classification in (CONVERGED, PERIODIC) and s.period == p
    return pred


def is_aperiodic(s: OrbitSummary) -> bool:
    return s.classification == APERIODIC


def sweep_table(rows: Sequence[SweepRow], projection: Projection) -> tuple[list[str], list[list[str]]]:
    """Header and string cells for the sweep CSV; short rows are padded with ''."""
    vals = [r.values(projection) for r in rows]
    k = max((v.size for v in vals), default=0)
    header = ["theta", "seed", "classification", "period"] + [f"value_{i+1}" for i in range(k)]
    body = []
    for r, v in zip(rows, vals):
        cells = [format(r.theta, ".17g"), str(r.seed), r.summary.classification,
                 "" if r.summary.period is None else str(r.summary.period)]
        cells += [format(x, ".17g") for x in v] + [""] * (k - v.size)
        body.append(cells)
    return header, body


def afs_trace_summary(wscaled: np.ndarray, cfg: OrbitConfig,
                      projections: Sequence[Projection] = ()) -> OrbitSummary:
    """Classify the recorded (gap <= threshold) scaled-w tail of an AFS run."""
    if len(wscaled) < 2:
        return OrbitSummary(ERROR, None, np.asarray(wscaled), error="fewer than two recorded points")
    return classify_orbit(TraceReplay(np.asarray(wscaled)), None, cfg, projections)
