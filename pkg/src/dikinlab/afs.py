"""Primal-dual affine scaling with step size theta * alpha_max.

Directions come from projecting p_v = -v^3/||v^2|| onto the null space and
row space of A diag(d), with v = sqrt(xs) and d = sqrt(x/s).  The step is
alpha = theta * ||xs|| / max(xs).
"""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from pathlib import Path

import numpy as np

from . import tolerances as tol
from .errors import (
    IllConditioned,
    MaxIters,
    NoInteriorFound,
    NonInterior,
    NumericError,
    PreconditionViolated,
)
from .linalg import cholesky, solve_spd

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinearProgram:
    """min c^T x subject to Ax = b, x >= 0 (dual: max b^T y, A^T y + s = c, s >= 0)."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    name: str = "lp"
    x0: np.ndarray | None = None
    y0: np.ndarray | None = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        c = np.asarray(self.c, dtype=float).reshape(-1)
        m, n = A.shape
        if b.size != m or c.size != n:
            raise PreconditionViolated(f"inconsistent shapes A{A.shape}, b({b.size}), c({c.size})")
        if not m < n:
            raise PreconditionViolated("need fewer constraints than variables")
        try:
            cholesky(A @ A.T)
        except IllConditioned as exc:
            raise PreconditionViolated("A must have full row rank") from exc
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        for key in ("x0", "y0"):
            v = getattr(self, key)
            if v is not None:
                object.__setattr__(self, key, np.asarray(v, dtype=float).reshape(-1))

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]


def castillo_barnes() -> LinearProgram:
    A = [[1, 2, -3, -2, -1],
         [-1, 2, -1, -1, -1]]
    return LinearProgram(A=A, b=[0, 0], c=[10, 10, 5, 1, -1], name="castillo-barnes")


def load_lp(path) -> LinearProgram:
    """Read an LP from JSON with keys name, A, b, c and optional x0, y0."""
    with open(path) as fh:
        data = json.load(fh, parse_float=Decimal, parse_int=Decimal)
    missing = [k for k in ("A", "b", "c") if k not in data]
    if missing:
        raise PreconditionViolated(f"LP file lacks {', '.join(missing)}")

    def arr(v):
        return np.array(v, dtype=float)

    return LinearProgram(
        A=arr(data["A"]), b=arr(data["b"]), c=arr(data["c"]),
        name=str(data.get("name", Path(path).stem)),
        x0=arr(data["x0"]) if "x0" in data else None,
        y0=arr(data["y0"]) if "y0" in data else None,
    )


def resolve_lp(source: str) -> LinearProgram:
    if source == "castillo-barnes":
        return castillo_barnes()
    return load_lp(source)


@dataclass(frozen=True)
class PdIterate:
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray

    @property
    def gap(self) -> float:
        return float(self.x @ self.s)

    @property
    def w(self) -> np.ndarray:
        return self.x * self.s

    def primal_residual(self, lp: LinearProgram) -> float:
        return float(np.linalg.norm(lp.A @ self.x - lp.b)) / (1.0 + float(np.linalg.norm(lp.b)))

    def dual_residual(self, lp: LinearProgram) -> float:
        return float(np.linalg.norm(lp.A.T @ self.y + self.s - lp.c)) / (1.0 + float(np.linalg.norm(lp.c)))

    def check(self, lp: LinearProgram, feas_tol: float = tol.FEAS_TOL) -> None:
        if self.x.size != lp.n or self.s.size != lp.n or self.y.size != lp.m:
            raise PreconditionViolated("iterate does not match LP dimensions")
        if not (np.all(self.x > 0) and np.all(self.s > 0)):
            raise NonInterior("x and s must be strictly positive")
        if self.primal_residual(lp) > feas_tol:
            raise PreconditionViolated(f"primal infeasible ({self.primal_residual(lp):.2e})")
        if self.dual_residual(lp) > feas_tol:
            raise PreconditionViolated(f"dual infeasible ({self.dual_residual(lp):.2e})")


@dataclass(frozen=True)
class StepControl:
    theta: float
    alpha_max: float
    alpha: float

    @classmethod
    def for_iterate(cls, it: PdIterate, theta: float) -> "StepControl":
        w = it.w
        amax = _norm(w) / float(np.max(w))
        return cls(theta=theta, alpha_max=amax, alpha=theta * amax)


@dataclass
class SolverConfig:
    epsilon: float = tol.GAP_EPSILON
    record_gap_threshold: float = tol.RECORD_GAP
    max_iters: int = 10_000
    feas_tol: float = tol.FEAS_TOL
    # overrides epsilon with 10**log10_epsilon, which may lie below the float range
    log10_epsilon: float | None = None
    # fixed absolute step instead of theta * alpha_max (the unmodified method)
    constant_alpha: float | None = None
    # For b == 0 the iteration commutes with x -> lam * x.  x shrinks
    # geometrically while rounding in A x does not, so the relative primal
    # residual would double every step; re-project x onto null(A) and
    # renormalize it after each step instead.
    homogeneous_refresh: bool = True
    # optional lead-in with a safe step fraction until the gap drops to warmup_gap
    warmup_theta: float | None = None
    warmup_gap: float = 1.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise PreconditionViolated("epsilon must be positive")
        if self.record_gap_threshold < self.epsilon:
            raise PreconditionViolated("record_gap_threshold must be >= epsilon")
        if self.warmup_theta is not None:
            if not 0 < self.warmup_theta < 1:
                raise PreconditionViolated("warmup_theta must lie in (0, 1)")
            if self.warmup_gap < self.record_gap_threshold:
                raise PreconditionViolated("warmup must end before recording starts")

    @property
    def stop_log10(self) -> float:
        return self.log10_epsilon if self.log10_epsilon is not None else math.log10(self.epsilon)


def directions(lp: LinearProgram, it: PdIterate) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Affine-scaling search directions (dx, dy, ds)."""
    x, s = it.x, it.s
    v = np.sqrt(x * s)
    d = np.sqrt(x / s)
    pv = -v**3 / _norm(x * s)
    AD = lp.A * d
    M = AD @ AD.T
    dy = -solve_spd(0.5 * (M + M.T), AD @ pv)
    ds = -lp.A.T @ dy
    dx = d * (pv + d * (lp.A.T @ dy))
    return dx, dy, ds


def afs_step(lp: LinearProgram, it: PdIterate, theta: float, alpha: float | None = None) -> PdIterate:
    """One step of the modified method; ``alpha`` overrides theta * alpha_max."""
    if alpha is None:
        if not 0.0 < theta < 1.0:
            raise PreconditionViolated("theta must lie in (0, 1)")
        alpha = StepControl.for_iterate(it, theta).alpha
    dx, dy, ds = directions(lp, it)
    nxt = PdIterate(it.x + alpha * dx, it.y + alpha * dy, it.s + alpha * ds)
    if not (np.all(nxt.x > 0) and np.all(nxt.s > 0)):
        raise NonInterior(f"step of length {alpha:.6g} left the positive orthant")
    return nxt


_LOG10_2 = math.log10(2.0)


@dataclass(frozen=True)
class TraceRecord:
    """One iterate.  x is stored as x_hat * mant * 2**exp so tiny scales survive."""

    iter: int
    log10_gap: float
    alpha_max: float
    alpha: float
    wscaled: np.ndarray
    y: np.ndarray
    s: np.ndarray
    x_hat: np.ndarray
    mant: float
    exp: int
    recorded: bool
    warmup: bool = False

    @property
    def x(self) -> np.ndarray:
        return np.ldexp(self.x_hat * self.mant, self.exp)

    @property
    def w(self) -> np.ndarray:
        return np.ldexp(self.x_hat * self.s * self.mant, self.exp)

    @property
    def gap(self) -> float:
        return math.ldexp(float(self.x_hat @ self.s) * self.mant, self.exp)

    def w_str(self) -> list[str]:
        return [_fmt_scaled(v * self.mant, self.exp) for v in self.x_hat * self.s]

    def gap_str(self) -> str:
        return _fmt_scaled(float(self.x_hat @ self.s) * self.mant, self.exp)


@dataclass
class SolveTrace:
    lp_name: str
    theta: float
    records: list[TraceRecord] = field(default_factory=list)
    stop_reason: str = ""
    error: NumericError | None = None
    final: PdIterate | None = None

    @property
    def converged(self) -> bool:
        return self.stop_reason == "converged"

    def recorded(self) -> list[TraceRecord]:
        return [r for r in self.records if r.recorded]

    def _stack(self, attr: str, only_recorded: bool) -> np.ndarray:
        recs = self.recorded() if only_recorded else self.records
        width = getattr(self.records[0], attr).size if self.records else 0
        return np.array([getattr(r, attr) for r in recs], dtype=float).reshape(len(recs), width)

    def y_points(self, only_recorded: bool = True) -> np.ndarray:
        return self._stack("y", only_recorded)

    def wscaled(self, only_recorded: bool = True) -> np.ndarray:
        return self._stack("wscaled", only_recorded)

    def write_csv(self, path) -> None:
        write_trace_csv(path, self.records)


def trace_header(n: int, m: int) -> list[str]:
    return (["iter", "gap", "alpha_max", "alpha"]
            + [f"w_{i+1}" for i in range(n)]
            + [f"wscaled_{i+1}" for i in range(n)]
            + [f"y_{i+1}" for i in range(m)])


def write_trace_csv(path, records: list[TraceRecord], n: int | None = None, m: int | None = None) -> None:
    if records:
        n, m = records[0].s.size, records[0].y.size
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(trace_header(n or 0, m or 0))
        for r in records:
            wr.writerow([r.iter, r.gap_str(), _fmt(r.alpha_max), _fmt(r.alpha)]
                        + r.w_str() + [_fmt(v) for v in (*r.wscaled, *r.y)])


def _norm(v: np.ndarray) -> float:
    # scaled l2 norm; squaring tiny products would underflow
    big = float(np.max(np.abs(v)))
    if big == 0.0:
        return 0.0
    return big * float(np.linalg.norm(v / big))


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _fmt_scaled(v: float, exp: int) -> str:
    """v * 2**exp to 17 significant digits, also beyond the float range."""
    if exp == 0 or v == 0.0:
        return _fmt(v)
    with localcontext() as ctx:
        ctx.prec = 40
        d = Decimal(v) * (Decimal(2) ** exp)
        return format(d, ".16e").replace("e+", "e")


def _run(lp, it, theta, cfg, trace, k, mant, exp, stop_log10, record, warmup, AAt, homogeneous, max_iters):
    """Shared loop; returns (iterate, k, mant, exp, stopped)."""
    while True:
        gap_hat = it.gap
        log10_gap = math.log10(gap_hat * mant) + exp * _LOG10_2
        sc = StepControl.for_iterate(it, theta)
        alpha = sc.alpha
        if cfg.constant_alpha is not None and not warmup:
            alpha = cfg.constant_alpha
        rec = record and log10_gap <= math.log10(cfg.record_gap_threshold)
        trace.records.append(TraceRecord(
            iter=k, log10_gap=log10_gap, alpha_max=sc.alpha_max, alpha=alpha,
            wscaled=it.w / np.max(it.w), y=it.y.copy(), s=it.s.copy(),
            x_hat=it.x.copy(), mant=mant, exp=exp, recorded=rec, warmup=warmup,
        ))
        if log10_gap <= stop_log10:
            return it, k, mant, exp, "converged" if not warmup else ""
        if k >= max_iters:
            trace.error = MaxIters(f"log10 gap {log10_gap:.2f} after {k} iterations")
            return it, k, mant, exp, "max_iters"
        try:
            if cfg.constant_alpha is not None and not warmup and (mant, exp) != (1.0, 0):
                # a constant step is an absolute length: undo the rescaling first
                it = PdIterate(np.ldexp(it.x * mant, exp), it.y, it.s)
                mant, exp = 1.0, 0
            it = afs_step(lp, it, theta, alpha=alpha)
            if not (math.isfinite(it.gap) and it.gap > 0):
                raise NonInterior("duality gap is no longer positive")
            if homogeneous and (cfg.constant_alpha is None or warmup):
                x = it.x - lp.A.T @ solve_spd(AAt, lp.A @ it.x)
                if not np.all(x > 0):
                    raise NonInterior("null-space refresh left the positive orthant")
                lam = float(np.max(x))
                m2, e2 = math.frexp(mant * lam)
                it, mant, exp = PdIterate(x / lam, it.y, it.s), m2, exp + e2
        except NumericError as exc:
            trace.error = exc
            log.info("solve stopped at iteration %d: %s", k, exc)
            return it, k, mant, exp, type(exc).__name__
        k += 1


def solve(lp: LinearProgram, start: PdIterate, theta: float, cfg: SolverConfig | None = None) -> SolveTrace:
    """Run the modified method until x^T s <= epsilon.

    Numeric failures end the run early; the trace keeps every iterate reached
    and records the error in ``trace.error``.  With ``cfg.warmup_theta`` set,
    the run first uses that step fraction until the gap reaches
    ``cfg.warmup_gap``; those iterates are flagged and never recorded.
    """
    cfg = cfg or SolverConfig()
    if not 0.0 < theta < 1.0 and cfg.constant_alpha is None:
        raise PreconditionViolated("theta must lie in (0, 1)")
    start.check(lp, cfg.feas_tol)
    trace = SolveTrace(lp_name=lp.name, theta=theta)
    homogeneous = cfg.homogeneous_refresh and not np.any(lp.b)
    AAt = lp.A @ lp.A.T
    it, k, mant, exp = start, 0, 1.0, 0
    if cfg.warmup_theta is not None:
        it, k, mant, exp, stop = _run(lp, it, cfg.warmup_theta, cfg, trace, k, mant, exp,
                                      math.log10(cfg.warmup_gap), False, True, AAt, homogeneous, cfg.max_iters)
        if stop:
            trace.stop_reason = stop
            trace.final = PdIterate(np.ldexp(it.x * mant, exp), it.y, it.s)
            return trace
        trace.records.pop()  # handed over to the main phase
    it, k, mant, exp, stop = _run(lp, it, theta, cfg, trace, k, mant, exp,
                                  cfg.stop_log10, True, False, AAt, homogeneous, cfg.max_iters)
    trace.stop_reason = stop
    trace.final = PdIterate(np.ldexp(it.x * mant, exp), it.y, it.s)
    return trace


def perturbed_starts(lp: LinearProgram, base: PdIterate, count: int, seed: int, spread: float = 0.3) -> list[PdIterate]:
    """Deterministic family of interior starts around ``base``.

    x moves inside {Ax = b} along a random null-space direction, y by a random
    offset; draws that leave the interior are rejected.
    """
    rng = np.random.default_rng(seed)
    _, _, vt = np.linalg.svd(lp.A)
    N = vt[lp.m:].T
    out = [base]
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > 1000 * count:
            raise NoInteriorFound("could not draw interior perturbations")
        x = base.x + N @ rng.normal(0.0, spread, N.shape[1]) * float(np.mean(base.x))
        y = base.y + rng.normal(0.0, spread, lp.m)
        s = lp.c - lp.A.T @ y
        if np.all(x > 0) and np.all(s > 0):
            out.append(PdIterate(x, y, s))
    return out[:count]


def capture_attractor(lp: LinearProgram, theta: float, starts: int = 128, seed: int = 0,
                      cfg: SolverConfig | None = None) -> tuple[list[SolveTrace], np.ndarray]:
    """Dual points with gap <= record threshold, pooled over a family of starts.

    Each run follows the modified method from its own start (after an
    optional warm-up) and stops at epsilon or at its first numeric failure.
    """
    if cfg is None:
        cfg = SolverConfig(warmup_theta=0.5)
    traces = [solve(lp, st, theta, cfg) for st in perturbed_starts(lp, default_start(lp), starts, seed)]
    pts = [t.y_points() for t in traces]
    return traces, np.vstack(pts) if pts else np.zeros((0, lp.m))


def dual_feasibility_check(lp: LinearProgram, y, feas_tol: float = tol.FEAS_TOL) -> bool:
    y = np.asarray(y, dtype=float)
    if y.size != lp.m:
        raise PreconditionViolated("dual vector has the wrong length")
    return bool(np.all(lp.A.T @ y <= lp.c + feas_tol))


def _max_min_slack(A_eq, b_eq, G, h, nvar):
    """max t s.t. A_eq z = b_eq, G z + t e <= h, t <= 1; returns (z, t)."""
    from scipy.optimize import linprog

    cost = np.zeros(nvar + 1)
    cost[-1] = -1.0
    A_ub = np.hstack([G, np.ones((G.shape[0], 1))])
    A_eq2 = None if A_eq is None else np.hstack([A_eq, np.zeros((A_eq.shape[0], 1))])
    bounds = [(None, None)] * nvar + [(None, 1.0)]
    res = linprog(cost, A_ub=A_ub, b_ub=h, A_eq=A_eq2, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status != 0:
        raise NoInteriorFound(f"interior search failed: {res.message}")
    return res.x[:-1], float(res.x[-1])


def _blend(start, target, slack_start, slack_target):
    """Smallest step from ``start`` toward ``target`` keeping all slacks >= half of target's minimum."""
    tau = 0.5 * float(np.min(slack_target))
    lam = 0.0
    for a, b in zip(slack_start, slack_target):
        if a < tau:
            lam = max(lam, (tau - a) / (b - a))
    return start + lam * (target - start)


def default_start(lp: LinearProgram) -> PdIterate:
    """Deterministic strictly feasible (x, y, s).

    Uses the LP file's x0/y0 when present.  Otherwise x is the projection of
    e onto {Ax = b} and y the least-squares fit of c - A^T y to e; if either
    is not strictly positive it is moved toward a max-min-slack point.
    """
    A, b, c = lp.A, lp.b, lp.c
    AAt = A @ A.T
    e = np.ones(lp.n)

    if lp.x0 is not None:
        x = lp.x0
    else:
        x = e - A.T @ solve_spd(AAt, A @ e - b)
        if not np.all(x > 0):
            xc, t = _max_min_slack(A, b, -np.eye(lp.n), np.zeros(lp.n), lp.n)
            if not t > 1e-9:
                raise NoInteriorFound("primal feasible set has empty interior")
            x = _blend(x, xc, x, xc)

    if lp.y0 is not None:
        y = lp.y0
    else:
        y = solve_spd(AAt, A @ (c - e))
        s = c - A.T @ y
        if not np.all(s > 0):
            yc, t = _max_min_slack(None, None, A.T, c, lp.m)
            if not t > 1e-9:
                raise NoInteriorFound("dual feasible set has empty interior")
            y = _blend(y, yc, s, c - A.T @ yc)
    s = c - A.T @ y
    if not (np.all(x > 0) and np.all(s > 0)):
        raise NoInteriorFound("could not reach a strictly positive start")
    it = PdIterate(np.asarray(x, float), np.asarray(y, float), s)
    try:
        it.check(lp)
    except (PreconditionViolated, NonInterior) as exc:
        raise NoInteriorFound(str(exc)) from exc
    return it
