"""Command-line harness: run scenarios, sample response curves, sweep
parameters.

Exit codes: 0 success, 2 invalid configuration, 3 violated convergence
precondition, 4 internal invariant breach.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__, engine, oracle, report
from .errors import ConfigError, EngineInvariantError, TheoremViolationError
from .prc import DesyncPrf, GeneralPrf, SyncPrc, rate_limited_prf, response
from .scenario import load_config, validate
from .torus import TWO_PI


def _print_violations(violations, file=sys.stderr) -> None:
    for v in violations:
        print(str(v), file=file)


def cmd_run(config_path: str, out_dir: str, variant: str = "normal",
            seed: int | None = None, step: float = 1e-4,
            figures: bool = True) -> Path:
    """Run one scenario and write trace/metric CSVs (plus figures)."""
    raw = Path(config_path).read_bytes()
    config = load_config(config_path, seed_override=seed)
    violations = validate(config)
    hard = [v for v in violations if v.level == "error"]
    _print_violations(v for v in violations if v.level == "warning")
    if hard:
        raise TheoremViolationError(hard)
    started = time.perf_counter()
    if variant == "normal":
        trace = engine.run(config)
    elif variant == "instantaneous":
        trace = engine.run_instantaneous_assumption(config)
    elif variant == "oracle":
        trace = oracle.oracle_run(config, step=step)
    else:
        raise ConfigError(f"unknown variant {variant!r}")
    out = Path(out_dir)
    outputs = report.write_run_outputs(trace, out)
    if figures:
        outputs += report.render_run_figures(trace, out)
    manifest = report.RunManifest(
        config_path=str(config_path),
        config_sha256=report.sha256_of(raw),
        seed=config.seed,
        variant=variant,
        outputs=[p.name for p in outputs],
        wall_clock_seconds=time.perf_counter() - started,
        tool_version=__version__,
    )
    manifest.write(out / "manifest.json")
    final_arc = trace.lambda_rows[-1][1] if trace.lambda_rows else float("nan")
    line = f"run complete: t={trace.samples[-1].t:.6g}s lambda={final_arc:.6g}"
    if trace.p_rows:
        line += f" p={trace.p_rows[-1][1]:.6g}"
    print(line)
    return out


def _curve_grid(points: int, breakpoints) -> list:
    grid = [TWO_PI * k / points for k in range(points)]
    for b in breakpoints:
        for p in (b - 1e-9, b, b + 1e-9):
            if 0.0 <= p < TWO_PI:
                grid.append(p)
    return sorted(set(grid))


def cmd_curves(prc_kind: str, out_file: str, *, alpha: float = 0.5,
               refractory: float = 0.0, l1: float = 0.8, l2: float = 0.6,
               n: int = 5, omega_max: float | None = None,
               t0: float | None = None, points: int = 10_000,
               figures: bool = True) -> Path:
    """Sample a response rule: (phi, response, updated phase) rows, with
    the rate-limited effective columns when omega_max and t0 are given."""
    if prc_kind == "sync":
        prc = SyncPrc(alpha=alpha, refractory=refractory)
        breakpoints = [0.0, refractory, math.pi]
    elif prc_kind == "desync":
        prc = DesyncPrf(l1=l1, l2=l2, n=n)
        breakpoints = [0.0, prc.forward_edge, prc.backward_edge]
    else:
        raise ConfigError(f"unknown prc kind {prc_kind!r}")
    effective: GeneralPrf | None = None
    if omega_max is not None or t0 is not None:
        if prc_kind != "desync":
            raise ConfigError("rate-limited curves apply to the desync rule")
        if omega_max is None or t0 is None:
            raise ConfigError("both --omega-max and --t0 are required")
        effective = rate_limited_prf(prc, omega_max, t0)
        breakpoints += list(effective.breakpoints)
    rows = []
    for phi in _curve_grid(points, breakpoints):
        psi = response(prc, phi)
        row = [phi, psi, phi + psi]
        if effective is not None:
            eff = response(effective, phi)
            row += [eff, phi + eff]
        rows.append(tuple(row))
    path = Path(out_file)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = "phi,response,phi_plus"
    if effective is not None:
        header += ",effective_response,effective_phi_plus"
    fmt = "{:.12g}"
    lines = [header]
    for row in rows:
        lines.append(",".join(fmt.format(x) for x in row))
    path.write_text("\n".join(lines) + "\n")
    if figures:
        report.render_curves_figure(rows, path.with_suffix(".png"),
                                    has_effective=effective is not None)
    print(f"curves written: {path} ({len(rows)} rows)")
    return path


def _set_path(data: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    node = data
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot descend into {part!r} of {dotted!r}")
    node[parts[-1]] = value


def _parse_sweep_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _sweep_one(args) -> tuple:
    raw, key, value, out_dir, threshold, figures = args
    data = json.loads(json.dumps(raw))
    _set_path(data, key, value)
    config = load_config(data)
    hard = [v for v in validate(config) if v.level == "error"]
    if hard:
        raise TheoremViolationError(hard)
    trace = engine.run(config)
    out = Path(out_dir)
    report.write_run_outputs(trace, out)
    if figures:
        report.render_run_figures(trace, out)
    desync = isinstance(config.prc, (DesyncPrf, GeneralPrf))
    metric = "p" if desync else "lambda"
    series = trace.p_rows if desync else trace.lambda_rows
    final = series[-1][1] if series else None
    crossing = trace.first_crossing(metric, threshold)
    cycles = None if crossing is None else crossing / config.period
    return (value, metric, final, cycles)


def cmd_sweep(config_path: str, sweep: str, out_dir: str,
              threshold: float = 1e-3, workers: int = 1,
              figures: bool = False) -> Path:
    """Run the base scenario once per value of one config key and write
    a summary of (value, final metric, cycles to threshold)."""
    if "=" not in sweep:
        raise ConfigError("--sweep expects KEY=V1,V2,...")
    key, _, value_text = sweep.partition("=")
    key = key.strip()
    values = [_parse_sweep_value(v) for v in value_text.split(",") if v != ""]
    try:
        raw = json.loads(Path(config_path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [
        (raw, key, value, str(out / f"{key}={value}"), threshold, figures)
        for value in values
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(job) for job in jobs]
    results.sort(key=lambda r: (0, float(r[0]), "") if isinstance(r[0], (int, float))
                 else (1, 0.0, str(r[0])))
    fmt = "{:.12g}"
    lines = ["value,metric,final,cycles_to_threshold"]
    for value, metric, final, cycles in results:
        lines.append(",".join((
            str(value), metric,
            "" if final is None else fmt.format(final),
            "" if cycles is None else fmt.format(cycles),
        )))
    (out / "summary.csv").write_text("\n".join(lines) + "\n")
    if figures:
        report.render_sweep_figure(results, out / "sweep.png")
    print(f"sweep complete: {len(results)} runs, summary at {out / 'summary.csv'}")
    return out / "summary.csv"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcoheading",
        description="Pulse-coupled-oscillator heading coordination simulator",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--variant", default="normal",
                       choices=["normal", "instantaneous", "oracle"])
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
    p_run.add_argument("--step", type=float, default=1e-4,
                       help="integrator step for --variant oracle")
    p_run.add_argument("--no-figures", action="store_true")

    p_curves = sub.add_parser("curves", help="sample a response curve")
    p_curves.add_argument("--prc", required=True, choices=["sync", "desync"])
    p_curves.add_argument("--out", required=True)
    p_curves.add_argument("--alpha", type=float, default=0.5)
    p_curves.add_argument("--refractory", type=float, default=0.0)
    p_curves.add_argument("--l1", type=float, default=0.8)
    p_curves.add_argument("--l2", type=float, default=0.6)
    p_curves.add_argument("--n", type=int, default=5)
    p_curves.add_argument("--omega-max", type=float, default=None)
    p_curves.add_argument("--t0", type=float, default=None)
    p_curves.add_argument("--points", type=int, default=10_000)
    p_curves.add_argument("--no-figures", action="store_true")

    p_sweep = sub.add_parser("sweep", help="run a scenario per value of one key")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--sweep", required=True, metavar="KEY=V1,V2,...")
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--threshold", type=float, default=1e-3)
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--figures", action="store_true")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cmd_run(args.config, args.out, variant=args.variant,
                    seed=args.seed, step=args.step,
                    figures=not args.no_figures)
        elif args.command == "curves":
            cmd_curves(args.prc, args.out, alpha=args.alpha,
                       refractory=args.refractory, l1=args.l1, l2=args.l2,
                       n=args.n, omega_max=args.omega_max, t0=args.t0,
                       points=args.points, figures=not args.no_figures)
        elif args.command == "sweep":
            cmd_sweep(args.config, args.sweep, args.out,
                      threshold=args.threshold, workers=args.workers,
                      figures=args.figures)
    except TheoremViolationError as exc:
        _print_violations(exc.violations)
        return 3
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except EngineInvariantError as exc:
        print(f"internal invariant breach: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
