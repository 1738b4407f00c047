"""Command line entry points: analyze-f, simulate, verdict, sweep."""
from __future__ import annotations

import argparse
import sys

from .errors import ChainscopeError
from .runner import analyze_f, output_root, run_scenario, sweep, verdict_from_csv, write_sweep_summary
from .scenario import resolve_config


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="chainscope",
        description="Phase-plane chain census and long-time audits for u_t = u_xx + f(u).",
    )
    sub = p.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze-f", help="stationary census only")
    pa.add_argument("config", help="config file path or shipped preset name")
    pa.add_argument("--out-root", default=None, help="output root (default: CHAINSCOPE_OUT or .)")
    pa.add_argument("--no-plots", action="store_true")

    ps = sub.add_parser("simulate", help="solve the PDE, run audits and verdicts")
    ps.add_argument("config")
    ps.add_argument("--out-root", default=None)
    ps.add_argument("--no-plots", action="store_true")

    pv = sub.add_parser("verdict", help="audits and verdicts on existing snapshots")
    pv.add_argument("config")
    pv.add_argument("--snapshots", required=True, help="snapshots.csv from a previous run")
    pv.add_argument("--out-root", default=None)

    pw = sub.add_parser("sweep", help="run a scenario across one numeric config axis")
    pw.add_argument("config")
    pw.add_argument("--axis", required=True, help="dotted config path, e.g. initial_data.amplitude")
    pw.add_argument("--values", required=True, help="comma-separated numbers")
    pw.add_argument("--workers", type=int, default=1)
    pw.add_argument("--out-root", default=None)
    pw.add_argument("--plots", action="store_true", help="render figures for every run")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = resolve_config(args.config)
        if args.command == "analyze-f":
            out = analyze_f(cfg, args.out_root, plots=not args.no_plots)
            print(f"census written to {out}")
            return 0
        if args.command == "simulate":
            res = run_scenario(cfg, args.out_root, plots=not args.no_plots)
            print(f"run complete: verdict kind = {res.verdict.get('kind')}; files in {res.out_dir}")
            return 0
        if args.command == "verdict":
            verdict = verdict_from_csv(cfg, args.snapshots, args.out_root)
            print(f"verdict kind = {verdict.get('kind')}")
            return 0
        if args.command == "sweep":
            values = [float(v) for v in args.values.split(",") if v.strip()]
            if not values:
                print("sweep: --values must contain at least one number", file=sys.stderr)
                return 2
            summary = sweep(cfg, args.axis, values, args.workers, args.out_root, plots=args.plots)
            name = cfg.get("name", "scenario")
            out = output_root(args.out_root) / cfg.get("output_dir", f"out/{name}")
            write_sweep_summary(summary, out)
            for row in summary["rows"]:
                print(f"{args.axis}={row['value']:g}: {row['kind']}"
                      + (f" (final sup {row['final_sup']:.4g})" if row["final_sup"] is not None else ""))
            if summary["threshold_bracket"]:
                b = summary["threshold_bracket"]
                print(f"threshold bracket: ({b['last_before_flip']:g}, {b['first_after_flip']:g})")
            print(f"summary written to {out}")
            return 0
        raise AssertionError("unreachable")
    except ChainscopeError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
