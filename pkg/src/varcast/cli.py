"""Command-line interface covering the full workflow without the service.

Exit codes: 0 success, 1 domain failure (naming the failed stage), 2 usage.
The data directory resolves from --data-dir, then $VARCAST_DATA_DIR, then
./data.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .catalog import Catalog
from .errors import VarcastError
from .montecarlo import SimulationConfig
from .pipeline import evaluate, render_report
from .scenario import parse_scenario, validate


def _data_dir(args) -> Path:
    if args.data_dir:
        return Path(args.data_dir)
    return Path(os.environ.get("VARCAST_DATA_DIR", "data"))


def _load_catalog(args) -> Catalog:
    return Catalog.load(_data_dir(args))


def cmd_ingest(args) -> int:
    catalog = _load_catalog(args)
    fatal = False
    for name in args.csv:
        try:
            with open(name, "rb") as fh:
                summary = catalog.ingest_csv(fh)
        except (OSError, VarcastError) as exc:
            print(f"{name}: fatal: {exc}", file=sys.stderr)
            fatal = True
            continue
        reasons = "".join(
            f"\n  {count} x {reason}" for reason, count in sorted(summary.reasons.items())
        )
        print(f"{name}: accepted {summary.accepted}, rejected {summary.rejected}{reasons}")
    catalog.save(_data_dir(args))
    return 1 if fatal else 0


def cmd_series_list(args) -> int:
    catalog = _load_catalog(args)
    try:
        keys = catalog.query(
            metric=args.metric, item=args.item, region=args.region, frequency=args.frequency
        )
    except VarcastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print("metric | item | region | secondary_region | frequency | points")
    for key in keys:
        n = len(catalog.get(key))
        print(
            f"{key.metric} | {key.item} | {key.region} | "
            f"{key.secondary_region or '-'} | {key.frequency.value} | {n}"
        )
    return 0


def cmd_scenario_validate(args) -> int:
    catalog = _load_catalog(args)
    try:
        scenario = parse_scenario(Path(args.file).read_bytes())
    except (OSError, VarcastError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    report = validate(scenario, catalog)
    if args.json:
        print(json.dumps(report.as_dict(), indent=2))
    else:
        for f in report.findings:
            print(f"{f.severity.upper()} {f.code} at {f.path}: {f.message}")
        print(f"status: {report.status}")
    return 0 if report.status == "valid" else 1


def cmd_scenario_evaluate(args) -> int:
    catalog = _load_catalog(args)
    try:
        scenario = parse_scenario(Path(args.file).read_bytes())
        config = SimulationConfig(
            n_sims=args.sims,
            seed=args.seed,
            ci_level=args.ci,
            default_uncertainty_std_pct=args.default_uncertainty_std,
            include_residual_noise=not args.no_residual_noise,
        )
        report = evaluate(scenario, catalog, config, n_workers=args.workers)
    except (OSError, VarcastError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    rendered = render_report(report, args.format)
    if args.out:
        Path(args.out).write_bytes(rendered)
        print(f"report written to {args.out}")
    else:
        sys.stdout.buffer.write(rendered)
        sys.stdout.buffer.flush()
    return 0


def cmd_serve(args) -> int:
    from .api import serve

    serve(
        _data_dir(args),
        host=args.host,
        port=args.port,
        sim_defaults=SimulationConfig(),
        max_workers=args.workers,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="varcast",
        description="What-if scenario evaluation on multivariate time series",
    )
    parser.add_argument("--data-dir", default=None, help="catalog directory (default ./data)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="ingest catalog CSV files")
    p.add_argument("csv", nargs="+", help="CSV files in the catalog column format")
    p.set_defaults(func=cmd_ingest)

    series = sub.add_parser("series", help="catalog queries")
    series_sub = series.add_subparsers(dest="series_command", required=True)
    p = series_sub.add_parser("list", help="list catalog series")
    p.add_argument("--metric")
    p.add_argument("--item")
    p.add_argument("--region")
    p.add_argument("--frequency")
    p.set_defaults(func=cmd_series_list)

    scenario = sub.add_parser("scenario", help="scenario operations")
    scenario_sub = scenario.add_subparsers(dest="scenario_command", required=True)

    p = scenario_sub.add_parser("validate", help="validate a scenario document")
    p.add_argument("file")
    p.add_argument("--json", action="store_true", help="emit the report as JSON")
    p.set_defaults(func=cmd_scenario_validate)

    p = scenario_sub.add_parser("evaluate", help="evaluate a scenario")
    p.add_argument("file")
    p.add_argument("--sims", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ci", type=float, default=0.95)
    p.add_argument("--default-uncertainty-std", type=float, default=0.0)
    p.add_argument("--no-residual-noise", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="write the rendered report to a file")
    p.add_argument("--format", choices=["json", "table"], default="table")
    p.set_defaults(func=cmd_scenario_evaluate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--workers", type=int, default=2)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
