"""Command line front end: single runs and parameter scans."""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .config import ConfigError, parse_config
from .scan import ScanSpec, run_scan
from .solver import run


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fstokes",
        description="Pseudo-spectral transport runs driven by a fractional "
        "Stokes velocity, with dyadic-frequency diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="integrate one configured problem")
    run_p.add_argument("config", help="path to a key = value config file")
    run_p.add_argument("--out", help="output directory (overrides output.dir)")
    run_p.add_argument("--seed", type=int, help="override the config rng seed")

    scan_p = sub.add_parser("scan", help="sweep one parameter over a value list")
    scan_p.add_argument("config", help="path to the base config file")
    scan_p.add_argument("--var", required=True, choices=("alpha", "amplitude"),
                        help="which parameter to vary")
    scan_p.add_argument("--values", required=True,
                        help="comma-separated list, e.g. 0.5,0.6,0.7")
    scan_p.add_argument("--out", help="scan output directory")
    scan_p.add_argument("--workers", type=int, default=1,
                        help="concurrent scan rows")
    scan_p.add_argument("--seed", type=int, help="override the config rng seed")
    return parser


def _load_config(path, seed):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None
    try:
        config = parse_config(text)
    except ConfigError as exc:
        print(f"error:\n{exc}", file=sys.stderr)
        return None
    if seed is not None:
        config = dataclasses.replace(config, seed=seed)
    return config


def _cmd_run(args) -> int:
    config = _load_config(args.config, args.seed)
    if config is None:
        return 1
    out = args.out if args.out is not None else config.output.dir
    result = run(config, out_dir=args.out)
    last = result.series.records[-1]
    print(f"status: {result.status}")
    print(f"t_final: {last['time']:g}  samples: {len(result.series.records)}")
    if result.t_star_proxy is not None:
        print(f"t_star_proxy: {result.t_star_proxy:g}  trigger: {result.which_trigger}")
    if out is not None:
        from . import plots

        figures = plots.render_series_figures(
            result.series, config.diagnostics, Path(out)
        )
        print(f"report: {Path(out) / 'series.csv'}")
        for path in figures:
            print(f"figure: {path}")
    return {"completed": 0, "blowup_proxy": 2}.get(result.status, 1)


def _parse_values(raw) -> tuple[float, ...]:
    tokens = [tok for tok in raw.replace(",", " ").split() if tok]
    return tuple(sorted({float(tok) for tok in tokens}))


def _cmd_scan(args) -> int:
    config = _load_config(args.config, args.seed)
    if config is None:
        return 1
    try:
        values = _parse_values(args.values)
        spec = ScanSpec(base=config, variable=args.var, values=values)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = args.out if args.out is not None else config.output.dir
    rows, fit = run_scan(spec, out_dir=out, workers=args.workers)
    print("value  status  t_star_proxy  int_V_at_stop  int_dircrit_at_stop")
    for row in rows:
        tstar = "" if row["t_star_proxy"] is None else f"{row['t_star_proxy']:g}"
        iv = "" if row["int_V_at_stop"] is None else f"{row['int_V_at_stop']:g}"
        idc = ("" if row["int_dircrit_at_stop"] is None
               else f"{row['int_dircrit_at_stop']:g}")
        print(f"{row['value']:g}  {row['status']}  {tstar}  {iv}  {idc}")
        if row.get("error"):
            print(f"    error: {row['error']}")
    if fit is not None:
        print(
            f"fit vs log(1 + 1/(1 - alpha)): slope {fit['slope']:.4g}, "
            f"R^2 {fit['r_squared']:.4g} over {fit['n_points']} points"
        )
    if out is not None:
        from . import plots

        figure = plots.render_scan_figure(rows, spec.variable, fit, Path(out) / "lifespan.png")
        print(f"report: {Path(out) / 'scan.csv'}")
        print(f"figure: {figure}")
    if all(row["status"] == "error" for row in rows):
        return 1
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_scan(args)


if __name__ == "__main__":
    sys.exit(main())
