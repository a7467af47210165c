"""Command-line driver for acquisition runs, scans and single evaluations.

Every failure maps to a machine-readable category on stderr
(``error category=<name> key=value ...``) and a stable exit code, so
long-running orchestration can react to, say, gap-table exhaustion
(including the stranded position) without parsing prose.

Run output directories are single-writer (lock file), store one points /
state / gaps file per order plus the originating configuration, and a
``--resume`` of an interrupted run appends to the same tables
byte-identically to an uninterrupted run.

Heavy numeric modules are imported inside the handlers so that trivial
invocations stay fast.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .errors import (
    ConfluenceError,
    DomainError,
    EvaluationCeilingError,
    GapTableExhausted,
    LockError,
    PoleProximityError,
    PrecisionError,
    TableFormatError,
)

__all__ = ["command_dispatch", "main"]

_CONFIG_MAGIC = "confluence-config v1"

#: exit code per machine-readable error category
_EXIT_CODES = {
    "usage": 2,
    "gap-table-exhausted": 3,
    "precision": 4,
    "domain": 5,
    "ceiling": 6,
    "table-format": 7,
    "lock": 8,
    "pole": 9,
    "unexpected": 1,
}


def _fail(category: str, message: str, **details) -> int:
    parts = [f"error category={category}"]
    parts += [f"{key}={value}" for key, value in details.items()]
    parts.append(f'message="{message}"')
    print(" ".join(parts), file=sys.stderr)
    return _EXIT_CODES[category]


def _default_digits(fallback: int) -> int:
    """Default output precision; CONFLUENCE_DIGITS raises the floor."""
    raw = os.environ.get("CONFLUENCE_DIGITS", "").strip()
    if raw:
        try:
            return max(int(raw), fallback)
        except ValueError:
            pass
    return fallback


def _parse_pair(text: str) -> tuple[int, int]:
    try:
        p1, p2 = (int(x) for x in text.split(","))
    except ValueError:
        raise DomainError(f"--pair expects two comma-separated primes, got {text!r}")
    return (p1, p2)


def _fmt_value(value, digits: int) -> str:
    sign = "+" if float(value.im) >= 0 else "-"
    return (
        f"{value.re.digits_str(digits)} {sign} "
        f"{abs(value.im).digits_str(digits)}i"
    )


# ---------------------------------------------------------------------------
# Run configuration files
# ---------------------------------------------------------------------------


def _config_text(config) -> str:
    """Canonical flat key-value rendering of a run configuration."""
    lines = [
        _CONFIG_MAGIC,
        f"pair: {config.base_pair[0]},{config.base_pair[1]}",
        f"max_order: {config.max_order}",
        f"base_mode: {config.base_mode}",
        f"base_n_max: {'-' if config.base_n_max is None else config.base_n_max}",
        f"base_points_target: {config.base_points_target}",
        f"gap_acquisition: {config.gap_acquisition}",
        f"stop_q: {'-' if config.stop_q is None else config.stop_q}",
        f"policy: {config.policy.kind}",
        f"policy_step: {config.policy.step!r}",
        f"policy_retries: {config.policy.retries}",
        f"policy_factor: {config.policy.factor!r}",
    ]
    for order in sorted(config.delta_schedule):
        lines.append(f"delta.{order}: {config.delta_schedule[order]!r}")
    for order in sorted(config.budgets):
        lines.append(f"budget.{order}: {config.budgets[order]}")
    return "\n".join(lines) + "\n"


def _parse_config_file(path: Path, max_order: Optional[int], budget: Optional[int]):
    from .confsearch import ExhaustionPolicy, RunConfig

    try:
        lines = path.read_text(encoding="utf-8").split("\n")
    except OSError as exc:
        raise TableFormatError(f"cannot read config {path}: {exc}") from exc
    if not lines or lines[0] != _CONFIG_MAGIC:
        raise TableFormatError(
            f"{path}: expected header {_CONFIG_MAGIC!r}; unsupported config version"
        )
    fields = {}
    for line in lines[1:]:
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        key, sep, value = line.partition(": ")
        if not sep:
            raise TableFormatError(f"{path}: malformed config line {line!r}")
        fields[key.strip()] = value.strip()

    def opt_int(key):
        value = fields.get(key, "-")
        return None if value == "-" else int(value)

    try:
        deltas = {
            int(key.split(".", 1)[1]): float(value)
            for key, value in fields.items() if key.startswith("delta.")
        }
        budgets = {
            int(key.split(".", 1)[1]): int(value)
            for key, value in fields.items() if key.startswith("budget.")
        }
        if max_order is None:
            max_order = int(fields.get("max_order", max(deltas, default=2)))
        if budget is not None:
            for order in range(3, max_order + 1):
                budgets.setdefault(order, budget)
        policy = ExhaustionPolicy(
            kind=fields.get("policy", "relax"),
            step=float(fields.get("policy_step", "0.01")),
            retries=int(fields.get("policy_retries", "1")),
            factor=float(fields.get("policy_factor", "2.0")),
        )
        return RunConfig(
            base_pair=_parse_pair(fields.get("pair", "2,3")),
            delta_schedule=deltas,
            budgets=budgets,
            max_order=max_order,
            gap_acquisition=int(fields.get("gap_acquisition", "1500")),
            policy=policy,
            base_mode=fields.get("base_mode", "run"),
            base_n_max=opt_int("base_n_max"),
            base_points_target=int(fields.get("base_points_target", "2000")),
            stop_q=opt_int("stop_q"),
        )
    except (ValueError, KeyError) as exc:
        raise TableFormatError(f"{path}: malformed config value: {exc}") from exc


# ---------------------------------------------------------------------------
# Run directory persistence
# ---------------------------------------------------------------------------


def _order_paths(directory: Path, order: int) -> tuple[Path, Path, Path]:
    stem = directory / f"order-{order:02d}"
    return (
        stem.with_suffix(".points"),
        stem.with_suffix(".state"),
        stem.with_suffix(".gaps"),
    )


def _persist_order(directory: Path, result) -> None:
    from .confsearch import build_gap_table
    from .tables import PointTableFile, save_gap_table, save_state, save_table

    points_path, state_path, gaps_path = _order_paths(directory, result.order)
    if result.points:
        save_table(PointTableFile.from_points(list(result.points)), points_path)
    save_state(
        result.order, result.last_visited, result.steps_done,
        result.delta_used, result.member_windows, state_path,
    )
    if len(result.points) >= 2:
        save_gap_table(build_gap_table(list(result.points)), gaps_path)


def _load_run_dir(directory: Path, base_pair: tuple[int, int], max_order: int):
    """Rebuild a RunResult from a run directory's points and state files."""
    from .confsearch import OrderResult, RunResult

    prior = RunResult()
    for order in range(2, max_order + 1):
        points_path, state_path, _ = _order_paths(directory, order)
        if not state_path.exists():
            break
        from .tables import load_state, load_table

        _, last_visited, steps_done, delta_used, windows = load_state(
            state_path, base_pair
        )
        points = ()
        if points_path.exists():
            table = load_table(points_path)
            if table.order != order or table.base_pair != base_pair:
                raise TableFormatError(
                    f"{points_path}: table is order {table.order}, pair "
                    f"{table.base_pair}; expected order {order}, pair {base_pair}"
                )
            points = table.points
        prior.per_order[order] = OrderResult(
            order, points, delta_used, windows, last_visited, steps_done
        )
    if not prior.per_order:
        raise TableFormatError(f"{directory}: no persisted orders found to resume")
    return prior


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------


def _cmd_bounds(args) -> int:
    from .titchmarsh import can_be_negative, disk_bound, negativity_threshold

    digits = _default_digits(args.digits)
    bound = disk_bound(args.sigma, digits)
    print(f"sigma: {args.sigma}")
    print(f"center: {bound.center.digits_str(digits)}")
    print(f"halfwidth: {bound.halfwidth.digits_str(digits)}")
    print(f"radius: {bound.radius.digits_str(digits)}")
    print(f"can_be_negative: {can_be_negative(args.sigma)}")
    if args.threshold:
        print(f"negativity_threshold: {negativity_threshold(digits).digits_str(digits)}")
    return 0


def _cmd_base(args) -> int:
    from .modspace import BaseSetParams, base_set, n_max_for_q
    from .tables import PointTableFile, save_table

    pair = _parse_pair(args.pair)
    n_max = args.nmax
    if n_max is None:
        if args.qmax is None:
            raise DomainError("one of --qmax or --nmax is required")
        n_max = n_max_for_q(args.qmax) if pair == (2, 3) else 1
    points = base_set(BaseSetParams(
        base_pair=pair, delta=args.delta, n_max=n_max,
        mode=args.mode, q_max=args.qmax,
    ))
    print(f"count: {len(points)}")
    if points:
        print(f"first: {points[0].q}")
        print(f"last: {points[-1].q}")
    for point in points[:50]:
        print(f"q: {point.q}")
    if len(points) > 50:
        print(f"... {len(points) - 50} more")
    if args.out and points:
        save_table(PointTableFile.from_points(points), args.out)
        print(f"saved: {args.out}")
    return 0


def _check_resume_compat(stored, config, persisted_orders) -> None:
    """A resumed run must re-derive exactly what the original would have.

    Budgets may grow (that is what resuming is for) and orders beyond the
    persisted ones may be added; everything that shaped the persisted
    tables — base parameters, policy, and the δ of every persisted
    order — must be unchanged.
    """
    fixed = (
        ("pair", stored.base_pair, config.base_pair),
        ("base_mode", stored.base_mode, config.base_mode),
        ("base_n_max", stored.base_n_max, config.base_n_max),
        ("base_points_target", stored.base_points_target, config.base_points_target),
        ("gap_acquisition", stored.gap_acquisition, config.gap_acquisition),
        ("stop_q", stored.stop_q, config.stop_q),
        ("policy", stored.policy, config.policy),
    )
    for name, old, new in fixed:
        if old != new:
            raise TableFormatError(
                f"resume config changes {name} ({old!r} -> {new!r}); the "
                f"persisted tables would no longer be reproducible"
            )
    for order in persisted_orders:
        old = stored.delta_schedule.get(order)
        new = config.delta_schedule.get(order)
        if old != new:
            raise TableFormatError(
                f"resume config changes delta for persisted order {order} "
                f"({old!r} -> {new!r})"
            )


def _cmd_search(args) -> int:
    from .confsearch import run
    from .tables import DirectoryLock

    config = _parse_config_file(Path(args.schedule), args.max_order, args.budget)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    config_path = out_dir / "run.cfg"
    prior = None
    if args.resume is not None:
        resume_dir = Path(args.resume)
        stored_path = resume_dir / "run.cfg"
        if not stored_path.exists():
            raise TableFormatError(f"{resume_dir}: no run.cfg; nothing to resume")
        stored = _parse_config_file(stored_path, None, None)
        prior = _load_run_dir(resume_dir, config.base_pair, config.max_order)
        _check_resume_compat(stored, config, sorted(prior.per_order))

    with DirectoryLock(out_dir):
        config_path.write_text(_config_text(config), encoding="utf-8")
        result = run(config, prior, on_order=lambda r: _persist_order(out_dir, r))
    for order in sorted(result.per_order):
        stage = result.per_order[order]
        line = f"order {order}: {len(stage.points)} points"
        if stage.points:
            line += (
                f", first {stage.points[0].q}, last {stage.points[-1].q}"
                f", mean gap {stage.mean_gap:.1f}"
            )
        line += f", delta {stage.delta_used}"
        print(line)
    for event in result.log:
        print(f"log: {event}")
    return 0


def _cmd_scan(args) -> int:
    from .precision import to_real
    from .scanner import scan_tables
    from .zetaeval import DEFAULT_CEILING

    run_dir = Path(args.run)
    pair = _parse_pair(args.pair)
    prior = _load_run_dir(run_dir, pair, args.max_order)
    ceiling = args.ceiling if args.ceiling is not None else DEFAULT_CEILING
    hits = scan_tables(
        prior, args.max_order,
        samples=args.samples, digits=args.digits, ceiling=ceiling,
    )
    lines = []
    for hit in hits:
        t = hit.t_sample
        value = hit.zeta_value
        expr = f"{t.q}*k" + (f"{'+' if t.offset >= 0 else ''}{t.offset}" if t.offset else "")
        t_dec = float(to_real(t, t.q_digits + 25).value)
        lines.append(
            f"hit order={hit.source_point.order} q={t.q} offset={t.offset} "
            f't_exact="{expr}" t={t_dec:.4f} '
            f"zeta={_fmt_value(value, 6)} err={value.err_bound:.1e} "
            f"engine={value.method} min_re={hit.min_re_in_window:+.6f}"
        )
    if not hits:
        print("no hits")
    for line in lines:
        print(line)
    if args.out:
        Path(args.out).write_text(
            "\n".join([f"# scanned orders 2..{args.max_order}", *lines]) + "\n",
            encoding="utf-8",
        )
        print(f"saved: {args.out}")
    return 0


def _cmd_brutescan(args) -> int:
    from .scanner import brute_scan

    hit = brute_scan(args.start, args.end, args.step, digits=args.digits)
    if hit is None:
        print("no hit")
    else:
        print(f"hit t={hit}")
    return 0


def _cmd_zeta(args) -> int:
    from .zetaeval import EvalRequest, zeta

    digits = _default_digits(args.digits)
    t = _t_argument(args)
    value = zeta(EvalRequest(args.sigma, t, digits, engine=args.engine))
    print(f"zeta: {_fmt_value(value, digits)}")
    print(f"err_bound: {value.err_bound:.2e}")
    print(f"engine: {value.method}")
    return 0


def _cmd_logsum(args) -> int:
    from .zetaeval import euler_log_partial

    digits = _default_digits(args.digits)
    value = euler_log_partial(args.sigma, _t_argument(args), args.terms, digits)
    print(f"logsum: {_fmt_value(value, digits)}")
    print(f"err_bound: {value.err_bound:.2e}")
    return 0


def _t_argument(args):
    from .precision import ExactT

    if args.q is not None:
        offset = Fraction(args.offset) if args.offset else Fraction(0)
        return ExactT(args.q, _parse_pair(args.pair), offset)
    if args.t is None:
        raise DomainError("one of --t or --q is required")
    return args.t


def _cmd_buildup(args) -> int:
    from .zetaeval import arg_buildup, crossing_index

    digits = _default_digits(args.digits)
    for n, total in arg_buildup(args.max, digits):
        print(f"{n:4d} {total.digits_str(10)}")
    print(f"crossing_index: {crossing_index()}")
    return 0


def _cmd_portrait(args) -> int:
    from .modspace import ConfluencePoint
    from .precision import ExactT, residue
    from ._primes import prime_sequence

    pair = _parse_pair(args.pair)
    t = ExactT(args.q, pair)
    primes = prime_sequence(pair, args.order)
    point = ConfluencePoint(
        args.order, t, args.delta, tuple(residue(t, p) for p in primes)
    )
    from .modspace import portrait

    rows = portrait(point, args.alpha, args.samples)
    out_lines = ["prime\toffset\tresidue"]
    out_lines += [f"{p}\t{o:+.6f}\t{r:+.9f}" for p, o, r in rows]
    text = "\n".join(out_lines)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"saved: {args.out} ({len(rows)} rows)")
    else:
        print(text)
    return 0


def _cmd_stats(args) -> int:
    from .confsearch import build_gap_table, drift_stats
    from .tables import load_table

    table = load_table(args.table)
    points = list(table.points)
    print(f"order: {table.order}")
    print(f"count: {len(points)}")
    print(f"first: {points[0].q}")
    print(f"last: {points[-1].q}")
    if len(points) >= 2:
        gaps = build_gap_table(points)
        stats = drift_stats(points, gaps)
        print(f"mean_gap: {(points[-1].q - points[0].q) / (len(points) - 1):.2f}")
        print("gaps: " + ", ".join(
            f"{g} (x{c})" for g, c in zip(gaps.gaps, gaps.counts)
        ))
        print(f"first_gap_fraction: {stats.first_gap_fraction:.4f}")
        print(f"residue_min: {stats.min_residue:+.9f}")
        print(f"residue_mean: {stats.mean_residue:+.9f}")
        print(f"residue_max: {stats.max_residue:+.9f}")
    return 0


# ---------------------------------------------------------------------------
# Parser and dispatch
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="confluence",
        description="Confluence-point search and zeta negativity scans on sigma=1.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="Disk bound for zeta on a vertical line")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--digits", type=int, default=30)
    p.add_argument("--threshold", action="store_true",
                   help="also compute the negativity threshold")
    p.set_defaults(handler=_cmd_bounds)

    p = sub.add_parser("base", help="Acquire the order-2 base point set")
    p.add_argument("--pair", default="2,3")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--qmax", type=int)
    p.add_argument("--nmax", type=int)
    p.add_argument("--mode", choices=("exact", "run"), default="exact")
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_base)

    p = sub.add_parser("search", help="Staged gap-table search run")
    p.add_argument("--schedule", required=True, help="run configuration file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--max-order", type=int, dest="max_order")
    p.add_argument("--budget", type=int, help="default per-order walk budget")
    p.add_argument("--resume", help="directory of the interrupted run")
    p.add_argument("--seedless", action="store_true",
                   help="reserved; runs are deterministic by construction")
    p.set_defaults(handler=_cmd_search)

    p = sub.add_parser("scan", help="Scan persisted tables for negative regions")
    p.add_argument("--run", required=True, help="run directory to scan")
    p.add_argument("--max-order", type=int, dest="max_order", required=True)
    p.add_argument("--pair", default="2,3")
    p.add_argument("--samples", type=int, default=21)
    p.add_argument("--digits", type=int, default=10)
    p.add_argument("--ceiling", type=float)
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_scan)

    p = sub.add_parser("brutescan", help="Stepwise baseline scan of sigma=1")
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="end", type=float, required=True)
    p.add_argument("--step", type=float, default=0.1)
    p.add_argument("--digits", type=int, default=10)
    p.set_defaults(handler=_cmd_brutescan)

    p = sub.add_parser("zeta", help="Evaluate zeta(sigma + it)")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--t")
    p.add_argument("--q", type=int, help="exact lattice height q (t = q*k)")
    p.add_argument("--offset", help="rational offset added to q*k")
    p.add_argument("--pair", default="2,3")
    p.add_argument("--digits", type=int, default=30)
    p.add_argument("--engine", default="auto",
                   choices=("auto", "em", "em-vector", "dirichlet", "reference"))
    p.set_defaults(handler=_cmd_zeta)

    p = sub.add_parser("logsum", help="Partial Euler-product logarithm")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--t")
    p.add_argument("--q", type=int)
    p.add_argument("--offset")
    p.add_argument("--pair", default="2,3")
    p.add_argument("--terms", type=int, required=True)
    p.add_argument("--digits", type=int, default=30)
    p.set_defaults(handler=_cmd_logsum)

    p = sub.add_parser("buildup", help="Cumulative prime argument growth")
    p.add_argument("--max", type=int, required=True)
    p.add_argument("--digits", type=int, default=30)
    p.set_defaults(handler=_cmd_buildup)

    p = sub.add_parser("portrait", help="Residue lines around a point")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--pair", default="2,3")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=41)
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_portrait)

    p = sub.add_parser("stats", help="Gap and drift statistics of a table file")
    p.add_argument("--table", required=True)
    p.set_defaults(handler=_cmd_stats)

    return parser


def command_dispatch(argv) -> int:
    """Run one CLI invocation; returns the exit status (never raises)."""
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 2
        if code != 0:
            return _fail("usage", "invalid arguments; see --help")
        return 0
    try:
        return args.handler(args)
    except GapTableExhausted as exc:
        return _fail(
            "gap-table-exhausted", str(exc),
            stranded_q=exc.stranded_q, order=exc.order, delta=exc.delta,
        )
    except EvaluationCeilingError as exc:
        return _fail("ceiling", str(exc), t=exc.t, ceiling=exc.ceiling)
    except PoleProximityError as exc:
        return _fail("pole", str(exc))
    except PrecisionError as exc:
        return _fail("precision", str(exc))
    except TableFormatError as exc:
        return _fail("table-format", str(exc))
    except LockError as exc:
        return _fail("lock", str(exc))
    except DomainError as exc:
        return _fail("domain", str(exc))
    except ConfluenceError as exc:  # pragma: no cover - safety net
        return _fail("unexpected", str(exc))
    except Exception as exc:  # pragma: no cover - safety net
        return _fail("unexpected", f"{type(exc).__name__}: {exc}")


def main() -> None:
    sys.exit(command_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
