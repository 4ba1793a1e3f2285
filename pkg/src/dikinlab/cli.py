"""Command-line entry point: ``dikinlab <command> [flags]``.

Exit status is 0 on success, 1 when a typed numeric error stops the work and
2 for usage errors (bad flags, missing CSV columns, unreadable files).
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import io
import math
import sys

import numpy as np

from . import afs, orbits, stability
from .dikin import random_state
from .errors import NumericError, PreconditionViolated
from .svg import SvgScatter, UsageError, render_scatter


def _theta(text: str) -> float:
    v = float(text)
    if not 0.0 <= v < 1.0:
        raise argparse.ArgumentTypeError("theta must lie in [0, 1)")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _vector(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        wr.writerows(rows)


def _orbit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--burn-in", type=int, default=100_000)
    p.add_argument("--keep", type=_positive_int, default=512)
    p.add_argument("--period-max", type=_positive_int, default=64)
    p.add_argument("--match-tol", type=float, default=1e-7)
    p.add_argument("--max-burn-in", type=int, default=10_000_000)


@contextlib.contextmanager
def _flags_checked():
    # precondition failures while building configs come from the flags
    try:
        yield
    except PreconditionViolated as exc:
        raise UsageError(str(exc)) from exc


def _orbit_cfg(args, seed: int) -> orbits.OrbitConfig:
    with _flags_checked():
        return orbits.OrbitConfig(burn_in=args.burn_in, keep=args.keep, period_max=args.period_max,
                                  match_tol=args.match_tol, seed=seed, max_burn_in=args.max_burn_in)


def _projection(text: str, dim: int, seed: int) -> orbits.Projection:
    # a bare fixed-index (or "random") picks its coordinate once from the seed
    if text in ("fixed-index", "random"):
        return orbits.Projection("fixed-index", int(np.random.default_rng(seed).integers(dim)))
    with _flags_checked():
        proj = orbits.Projection.parse(text)
        proj.check(dim)
    return proj


def _solver_flags(p: argparse.ArgumentParser, warmup: float | None, log10_eps: float | None = None,
                  max_iters: int = 10_000) -> None:
    p.add_argument("--lp", default="castillo-barnes", help="castillo-barnes or a JSON file with A, b, c")
    p.add_argument("--epsilon", type=float, default=1e-10)
    p.add_argument("--log10-epsilon", type=float, default=log10_eps,
                   help="stop at gap <= 10**value (may lie below the float range)")
    p.add_argument("--record-gap", type=float, default=1e-3)
    p.add_argument("--max-iters", type=_positive_int, default=max_iters)
    p.add_argument("--warmup-theta", type=_theta, default=warmup)
    p.add_argument("--warmup-gap", type=float, default=1.0)


def _solver_cfg(args) -> afs.SolverConfig:
    with _flags_checked():
        return afs.SolverConfig(epsilon=args.epsilon, record_gap_threshold=args.record_gap,
                                max_iters=args.max_iters, log10_epsilon=args.log10_epsilon,
                                warmup_theta=args.warmup_theta, warmup_gap=args.warmup_gap)


def _grid(args) -> np.ndarray:
    if not args.theta_min < args.theta_max <= 1.0:
        raise UsageError("need theta-min < theta-max <= 1")
    return orbits.theta_grid(args.theta_min, args.theta_max, args.steps)


def _load_lp(source: str) -> afs.LinearProgram:
    try:
        return afs.resolve_lp(source)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read LP {source!r}: {exc}") from exc


def cmd_dikin_orbit(args) -> int:
    if args.w0 is None and args.seed is None:
        raise UsageError("--seed is required unless --w0 is given")
    w0 = args.w0 if args.w0 is not None else random_state(np.random.default_rng(args.seed), args.dim)
    if not np.all(np.isfinite(w0) & (w0 > 0)):
        raise UsageError("--w0 must be finite and positive")
    cfg = _orbit_cfg(args, args.seed or 0)
    proj = _projection(args.projection, w0.size, cfg.seed)
    s = orbits.classify_orbit(orbits.DikinMap(args.theta), w0, cfg, [proj])
    n = s.points.shape[1]
    _write_rows(args.out, ["index"] + [f"w_{i+1}" for i in range(n)],
                [[k] + [format(v, ".17g") for v in row] for k, row in enumerate(s.points)])
    print(f"theta={args.theta} classification={s.classification} period={s.period or ''} burn_in={s.burn_in}")
    if args.svg:
        render_scatter(args.out, "index", "w_*", args.svg, title=f"theta = {args.theta}")
    return 0


def cmd_dikin_sweep(args) -> int:
    cfg = _orbit_cfg(args, args.seed)
    proj = _projection(args.projection, args.dim, args.seed)
    grid = _grid(args)
    rows = orbits.feigenbaum_sweep(args.dim, grid, proj, cfg, args.seeds_per_theta)
    header, body = orbits.sweep_table(rows, proj)
    _write_rows(args.out, header, body)
    bad = sum(r.summary.classification == orbits.ERROR for r in rows)
    print(f"{len(rows)} rows, projection {proj.label()}, {bad} errors")
    if args.svg and len(header) > 4:
        render_scatter(args.out, "theta", "value_*", args.svg, title=f"n = {args.dim}, {proj.label()}")
    elif args.svg:
        SvgScatter([], title=f"n = {args.dim}, {proj.label()}", x_label="theta").write(args.svg)
    return 0


def cmd_afs_solve(args) -> int:
    lp = _load_lp(args.lp)
    trace = afs.solve(lp, afs.default_start(lp), args.theta, _solver_cfg(args))
    trace.write_csv(args.out)
    last = trace.records[-1] if trace.records else None
    print(f"{lp.name} theta={args.theta} stop={trace.stop_reason} iterations={len(trace.records) - 1} "
          f"recorded={len(trace.recorded())} log10_gap={last.log10_gap:.3f}" if last else "no iterates")
    if args.svg:
        _y_svg(trace.y_points(), args.svg, f"{lp.name}, theta = {args.theta}")
    if trace.error is not None:
        print(f"error: {type(trace.error).__name__}: {trace.error}", file=sys.stderr)
        return 1
    return 0


def _y_svg(Y: np.ndarray, path, title: str) -> None:
    pts = [(float(a), float(b)) for a, b in Y[:, :2]] if Y.shape[1] >= 2 else []
    SvgScatter(pts, title=title, x_label="y_1", y_label="y_2").write(path)


def cmd_afs_sweep(args) -> int:
    lp = _load_lp(args.lp)
    cfg = _solver_cfg(args)
    ocfg = _orbit_cfg(args, 0)
    proj = _projection(args.projection, lp.n, 0)
    start = afs.default_start(lp)
    rows = []
    for t in _grid(args):
        if t <= 0.0:
            s = orbits.OrbitSummary(orbits.ERROR, None, np.zeros((0, lp.n)), error="theta must be positive")
        else:
            trace = afs.solve(lp, start, float(t), cfg)
            s = orbits.afs_trace_summary(trace.wscaled(), ocfg, [proj])
            if s.classification == orbits.ERROR and trace.error is not None:
                s.error = f"{type(trace.error).__name__}: {trace.error}"
        rows.append(orbits.SweepRow(float(t), 0, s))
    header, body = orbits.sweep_table(rows, proj)
    _write_rows(args.out, header, body)
    print(f"{len(rows)} rows, projection {proj.label()}")
    if args.svg and len(header) > 4:
        render_scatter(args.out, "theta", "value_*", args.svg, title=f"{lp.name}, scaled w")
    return 0


def cmd_attractor(args) -> int:
    lp = _load_lp(args.lp)
    traces, _ = afs.capture_attractor(lp, args.theta, args.starts, args.seed, _solver_cfg(args))
    rows = []
    for k, tr in enumerate(traces):
        for r in tr.recorded():
            rows.append([k, r.iter, r.gap_str()] + [format(v, ".17g") for v in r.y])
    _write_rows(args.out, ["start", "iter", "gap"] + [f"y_{i+1}" for i in range(lp.m)], rows)
    failed = sum(t.error is not None for t in traces)
    print(f"{lp.name} theta={args.theta}: {len(rows)} points from {len(traces)} starts "
          f"({failed} stopped early by a numeric error)")
    if args.svg:
        render_scatter(args.out, "y_1", "y_2", args.svg, title=f"{lp.name}, theta = {args.theta}")
    return 0 if rows else 1


def _report_rows(args) -> list[tuple[str, str]]:
    if args.report == "thresholds":
        return [
            ("period_two_onset", format(2.0 / 3.0, ".10f")),
            ("superstable_period_two", format((1.0 + math.sqrt(5.0)) / 4.0, ".10f")),
            ("period_four_onset", format(stability.find_period4_threshold(), ".10f")),
        ]
    if args.report == "logistic":
        return [(f"superstable_m{m}", format(stability.logistic_superstable_theta(m), ".10f"))
                for m in (1, 2, 3, 4, 5)]
    if args.report == "period-two":
        d = stability.period_two_data(args.theta)
        return [("theta", repr(args.theta)), ("r", repr(d.r)), ("s", repr(d.s)), ("g_prime_s", repr(d.g_prime_at_s))]
    if args.report == "near-one":
        orbit, cj = stability.near_one_periodic_orbit(args.theta, args.dim)
        poly, beta = stability.certify_contraction(cj)
        out = [("theta", repr(args.theta)), ("n", str(args.dim))]
        out += [(f"cycle_y{i+1}", repr(float(v))) for i, v in enumerate(orbit.points[0][:-1])]
        out += [(f"coef_a{i}", repr(float(a))) for i, a in enumerate(poly.coeffs)]
        out.append(("ek_beta", repr(beta)))
        return out
    raise UsageError(f"unknown report {args.report!r}")


def cmd_analytic(args) -> int:
    if args.report in ("period-two", "near-one") and args.theta is None:
        raise UsageError(f"--theta is required for --report {args.report}")
    rows = _report_rows(args)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["quantity", "value"])
    wr.writerows(rows)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    sys.stdout.write(buf.getvalue())
    return 0


def cmd_render(args) -> int:
    n = render_scatter(args.csv, args.x, args.y, args.svg, title=args.title)
    print(f"{n} points -> {args.svg}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dikinlab", description="Dikin process and primal-dual affine scaling lab")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dikin-orbit", help="classify a single orbit")
    p.add_argument("--dim", type=_positive_int, default=3)
    p.add_argument("--theta", type=_theta, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--w0", type=_vector, help="comma-separated positive start vector")
    p.add_argument("--projection", default="sorted-middle")
    _orbit_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--svg")
    p.set_defaults(func=cmd_dikin_orbit)

    p = sub.add_parser("dikin-sweep", help="Feigenbaum sweep of the Dikin process")
    p.add_argument("--dim", type=_positive_int, default=3)
    p.add_argument("--theta-min", type=_theta, required=True)
    p.add_argument("--theta-max", type=float, required=True)
    p.add_argument("--steps", type=_positive_int, required=True)
    p.add_argument("--projection", default="sorted-middle",
                   help="sorted-middle, sorted-index:i, fixed-index:i, or fixed-index (index drawn from the seed)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--seeds-per-theta", type=_positive_int, default=1)
    _orbit_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--svg")
    p.set_defaults(func=cmd_dikin_sweep)

    p = sub.add_parser("afs-solve", help="run the modified primal-dual method")
    p.add_argument("--theta", type=_theta, required=True)
    _solver_flags(p, None)
    p.add_argument("--out", required=True)
    p.add_argument("--svg")
    p.set_defaults(func=cmd_afs_solve)

    p = sub.add_parser("afs-sweep", help="classify scaled-w tails over a theta grid")
    p.add_argument("--theta-min", type=_theta, required=True)
    p.add_argument("--theta-max", type=float, required=True)
    p.add_argument("--steps", type=_positive_int, required=True)
    p.add_argument("--projection", default="sorted-middle")
    _solver_flags(p, 0.5, log10_eps=-1000.0, max_iters=100_000)
    _orbit_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--svg")
    p.set_defaults(func=cmd_afs_sweep)

    p = sub.add_parser("attractor", help="pool dual iterates with small gap over seeded starts")
    p.add_argument("--theta", type=_theta, required=True)
    p.add_argument("--starts", type=_positive_int, default=128)
    p.add_argument("--seed", type=int, default=0)
    _solver_flags(p, 0.5)
    p.add_argument("--out", required=True)
    p.add_argument("--svg")
    p.set_defaults(func=cmd_attractor)

    p = sub.add_parser("analytic", help="closed-form and bisection results")
    p.add_argument("--report", choices=["thresholds", "logistic", "period-two", "near-one"], required=True)
    p.add_argument("--theta", type=_theta)
    p.add_argument("--dim", type=_positive_int, default=3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("render", help="SVG scatter from a CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True, help="column name or glob such as 'value_*'")
    p.add_argument("--svg", required=True)
    p.add_argument("--title", default="")
    p.set_defaults(func=cmd_render)
    return ap


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
