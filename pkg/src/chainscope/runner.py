"""Orchestration: run one scenario end to end, emit flat files, sweep axes.

Everything numeric is written with 12 significant digits so identical
configs produce byte-identical CSV/JSON; the wall-clock timestamp lives only
in run_meta.json.
"""
from __future__ import annotations

import csv
import datetime
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import (
    LocateResult,
    Verdict,
    connection_verdict,
    estimate_omega,
    far_field_limits,
    locate_component,
    morse_partition,
    quasiconvergence_verdict,
    spatial_trajectory,
)
from .errors import AllBelowTol, ChainscopeError, EmptyOverlap
from .nonlinearity import classify_scenario
from .pde import Snapshot, SolverConfig, make_snapshot, residual, solve
from .phase_plane import Census, build_census
from .scenario import Scenario, load_scenario, set_by_path
from .sturm import audit_monotonicity, check_critical_finiteness, check_reflection_finiteness, reflect, zero_count


def fmt(x: float) -> str:
    """Decimal with 12 significant digits."""
    return f"{float(x):.12g}"


def _round_floats(obj):
    if isinstance(obj, float):
        if math.isinf(obj) or math.isnan(obj):
            return None
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(_round_floats(payload), indent=2, sort_keys=True) + "\n")


def census_payloads(census: Census) -> tuple[list, list, dict]:
    chains = []
    for ch in census.chains:
        chains.append(
            {
                "id": ch.id,
                "trivial": ch.trivial,
                "p": ch.p,
                "q": ch.q,
                "energy": ch.energy,
                "saddles": list(ch.saddles),
                "loops": [
                    {
                        "id": lp.id,
                        "kind": lp.kind,
                        "anchors": [lp.left_anchor, lp.right_anchor],
                        "energy": lp.energy,
                    }
                    for lp in ch.loops
                ],
            }
        )
    components = [
        {
            "id": an.id,
            "inner_chain_id": an.inner_chain_id,
            "outer_loop_id": an.outer_loop_id,
            "p_hat": None if math.isinf(an.u_min) else an.u_min,
            "q_hat": None if math.isinf(an.u_max) else an.u_max,
        }
        for an in census.annuli
    ]
    order = {
        "relations": [
            {"i": i, "j": j, "relation": rel}
            for (i, j), rel in sorted(census.order.relations.items())
        ]
    }
    return chains, components, order


def write_census(census: Census, out: Path) -> None:
    chains, components, order = census_payloads(census)
    write_json(out / "chains.json", chains)
    write_json(out / "components.json", components)
    write_json(out / "order.json", order)


def write_snapshots_csv(snapshots: list[Snapshot], path: Path) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x", "u", "ux", "uxx"])
        for s in snapshots:
            for i in range(s.x.size):
                w.writerow([fmt(s.t), fmt(s.x[i]), fmt(s.u[i]), fmt(s.ux[i]), fmt(s.uxx[i])])


def read_snapshots_csv(path: Path) -> list[Snapshot]:
    rows: dict[float, list[tuple[float, float]]] = {}
    with path.open() as fh:
        r = csv.DictReader(fh)
        for rec in r:
            rows.setdefault(float(rec["t"]), []).append((float(rec["x"]), float(rec["u"])))
    out = []
    for t in sorted(rows):
        pts = sorted(rows[t])
        x = np.array([p[0] for p in pts])
        u = np.array([p[1] for p in pts])
        out.append(make_snapshot(t, x, u))
    return out


@dataclass
class AuditResult:
    zerocount_rows: list[tuple]
    monotonicity: dict
    nc: dict
    r: dict


def run_audits(scn: Scenario, census: Census, snapshots: list[Snapshot],
               pair_snapshots: list[Snapshot] | None) -> AuditResult:
    rows: list[tuple] = []
    series: dict[str, list] = {}

    def track(fid: str, t: float, values, grid):
        try:
            rep = zero_count(values, grid)
        except AllBelowTol:
            rep = None
        series.setdefault(fid, []).append((t, rep))
        interval = f"({fmt(grid[0])};{fmt(grid[-1])})"
        rows.append(
            (fid, t, interval, rep.count if rep else -1, len(rep.multiples) if rep else 0)
        )

    interior = slice(1, -1)
    for s in snapshots:
        g = s.x[interior]
        if scn.track_u_minus_beta:
            for z in census.zeros:
                track(f"u-beta:{fmt(z.value)}", s.t, s.u[interior] - z.value, g)
        if scn.track_ux:
            track("ux", s.t, s.ux[interior], g)
        for lam in scn.lambdas:
            try:
                xs, v = reflect(s, lam)
            except EmptyOverlap:
                continue
            track(f"V:{fmt(lam)}", s.t, v, xs)
        for i, prof in enumerate(scn.steady_profiles):
            ref = prof.build(s.x)
            track(f"u-steady:{i}", s.t, (s.u - ref)[interior], g)
    if pair_snapshots is not None:
        for s, sp in zip(snapshots, pair_snapshots):
            track("pair-diff", s.t, (s.u - sp.u)[interior], s.x[interior])

    monotonicity = {}
    for fid, entries in series.items():
        log = audit_monotonicity(entries)
        monotonicity[fid] = {
            "violations": log.violations,
            "drops_without_multiple": log.unexplained_drops,
            "monotone": log.monotone,
        }
    nc = check_critical_finiteness(snapshots)
    r = check_reflection_finiteness(snapshots, scn.lambdas)
    return AuditResult(rows, monotonicity, nc, r)


def write_zerocounts(rows: list[tuple], path: Path) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["functional_id", "t", "interval", "count", "n_multiples"])
        for fid, t, interval, count, nmult in rows:
            w.writerow([fid, fmt(t), interval, count, nmult])


def compute_verdict(scn: Scenario, census: Census, snapshots: list[Snapshot]) -> dict:
    payload: dict = {}
    ff = far_field_limits(snapshots, scn.f)
    payload["theta_limits"] = list(ff.limits)
    payload["theta_path_residual"] = ff.path_residual
    payload["theta_limit_stable"] = list(ff.limit_stable)
    payload["theta_transient"] = ff.transient

    if scn.verdict_plan in ("quasiconvergence", "both"):
        est = estimate_omega(snapshots, scn.f, scn.probe_window, scn.tail_fraction)
        v = quasiconvergence_verdict(est, census, scn.tolerances)
        payload["quasiconvergence"] = _verdict_dict(v)
        try:
            groups = morse_partition(est, census, scn.tolerances)
            payload["morse_groups"] = [
                {"chain_id": cid, "times": times} for cid, times in groups
            ]
        except ChainscopeError as e:
            payload["morse_groups"] = None
            payload["morse_refusal"] = str(e)
    if scn.verdict_plan in ("connection", "both"):
        mid = snapshots[len(snapshots) // 2]
        loc = locate_component(spatial_trajectory(mid, scn.probe_window), census)
        payload["located_component"] = _locate_dict(loc)
        if loc.annulus_id is not None:
            an = census.annulus_by_id(loc.annulus_id)
            v = connection_verdict(
                snapshots, an, census, scn.tolerances, scn.probe_window
            )
            payload["connection"] = _verdict_dict(v)
        else:
            payload["connection"] = {
                "kind": "inconclusive",
                "reason": f"mid-run trajectory not inside one annulus ({loc.status})",
            }

    kinds = [
        payload.get(k, {}).get("kind")
        for k in ("quasiconvergence", "connection")
        if payload.get(k)
    ]
    payload["kind"] = next((k for k in kinds if k and k != "inconclusive"), kinds[0] if kinds else "none")
    payload["horizon"] = snapshots[-1].t
    payload["probe_window"] = scn.probe_window
    payload["tolerances"] = scn.tolerances.as_dict()
    return payload


def _verdict_dict(v: Verdict) -> dict:
    return {
        "kind": v.kind,
        "chain_id": v.chain_id,
        "annulus_id": v.annulus_id,
        "distances": v.distances,
        "tolerances": v.tolerances,
        "probe_window": v.probe_window,
        "horizon": v.horizon,
        "reason": v.reason,
        "proxy": v.proxy,
    }


def _locate_dict(loc: LocateResult) -> dict:
    return {
        "annulus_id": loc.annulus_id,
        "status": loc.status,
        "offenders": [list(p) for p in loc.offenders],
        "nearest_chain_id": loc.nearest_chain_id,
    }


def output_root(override: str | None = None) -> Path:
    root = override or os.environ.get("CHAINSCOPE_OUT") or "."
    return Path(root)


def analyze_f(cfg: dict, out_root: str | None = None, plots: bool = True) -> Path:
    """Census-only pipeline: the stationary decomposition and its files."""
    scn = load_scenario(cfg)
    census = build_census(scn.f)
    out = output_root(out_root) / scn.output_dir
    out.mkdir(parents=True, exist_ok=True)
    write_census(census, out)
    _write_meta(scn, out, extra={"mode": "analyze-f"})
    if plots:
        from .plots import render_phase_plane

        render_phase_plane(census, out / "phase_plane.png")
    return out


@dataclass
class RunResult:
    out_dir: Path
    verdict: dict
    final_sup: float
    settle_metric: float | None
    final_residual: float | None = None
    error: str | None = None


def run_scenario(cfg: dict, out_root: str | None = None, plots: bool = True) -> RunResult:
    """Full pipeline: census, solve, audits, verdicts, files, figures."""
    scn = load_scenario(cfg)
    census = build_census(scn.f)
    out = output_root(out_root) / scn.output_dir
    out.mkdir(parents=True, exist_ok=True)
    write_census(census, out)

    snapshots = solve(scn.solver, scn.f)
    write_snapshots_csv(snapshots, out / "snapshots.csv")

    pair_snapshots = None
    if scn.pair_initial_data is not None:
        pair_cfg = SolverConfig(
            half_width=scn.solver.half_width,
            dx=scn.solver.dx,
            dt=scn.solver.dt,
            t_end=scn.solver.t_end,
            snapshot_times=scn.solver.snapshot_times,
            boundary_mode=scn.solver.boundary_mode,
            u0=scn.pair_initial_data,
        )
        pair_snapshots = solve(pair_cfg, scn.f)

    audits = run_audits(scn, census, snapshots, pair_snapshots)
    write_zerocounts(audits.zerocount_rows, out / "zerocounts.csv")
    write_json(
        out / "nc_r_report.json",
        {"nc": audits.nc, "r": audits.r, "monotonicity": audits.monotonicity},
    )

    verdict = compute_verdict(scn, census, snapshots) if scn.verdict_plan != "none" else {"kind": "none"}
    write_json(out / "verdict.json", verdict)
    _write_meta(scn, out, extra={"mode": "simulate"})

    if plots:
        from .plots import render_phase_plane, render_snapshots, render_trajectories

        render_phase_plane(census, out / "phase_plane.png")
        render_snapshots(snapshots, out / "snapshots.png")
        render_trajectories(census, snapshots, out / "trajectories.png", scn.probe_window)

    final_sup = float(np.max(np.abs(snapshots[-1].u)))
    final_res = residual(snapshots[-1], scn.f)
    settle = None
    q = verdict.get("quasiconvergence")
    if q:
        settle = q.get("distances", {}).get("settle_metric")
    return RunResult(out, verdict, final_sup, settle, final_res)


def verdict_from_csv(cfg: dict, snapshots_path: str | Path,
                     out_root: str | None = None) -> dict:
    """Recompute audits and verdicts from an existing snapshots.csv."""
    scn = load_scenario(cfg)
    census = build_census(scn.f)
    snapshots = read_snapshots_csv(Path(snapshots_path))
    if not snapshots:
        raise ChainscopeError(f"no snapshots found in {snapshots_path}")
    out = output_root(out_root) / scn.output_dir
    out.mkdir(parents=True, exist_ok=True)
    write_census(census, out)
    audits = run_audits(scn, census, snapshots, None)
    write_zerocounts(audits.zerocount_rows, out / "zerocounts.csv")
    write_json(
        out / "nc_r_report.json",
        {"nc": audits.nc, "r": audits.r, "monotonicity": audits.monotonicity},
    )
    verdict = compute_verdict(scn, census, snapshots)
    write_json(out / "verdict.json", verdict)
    _write_meta(scn, out, extra={"mode": "verdict", "snapshots": str(snapshots_path)})
    return verdict


def _write_meta(scn: Scenario, out: Path, extra: dict | None = None) -> None:
    try:
        sc = classify_scenario(scn.f)
    except ChainscopeError:
        sc = None
    meta = {
        "config": scn.config,
        "version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "nonlinearity": {
            "name": scn.f.name,
            "lipschitz_bound": scn.f.lipschitz_bound,
            "far_field_cutoff": scn.f.far_field_cutoff,
            "window": list(scn.f.window),
            "satellites": [
                {"value": z.value, "slope": z.slope, "provenance": z.provenance}
                for z in scn.satellites
            ],
            "scenario_class": None
            if sc is None
            else {
                "tag": sc.tag,
                "limit_value": sc.limit_value,
                "bistable": list(sc.bistable) if sc.bistable else None,
            },
        },
        "front_speed_estimate": 2.0 * math.sqrt(max(scn.f.lipschitz_bound, 0.0)),
    }
    if extra:
        meta.update(extra)
    write_json(out / "run_meta.json", meta)


def _sweep_worker(args: tuple) -> dict:
    cfg, out_root, plots = args
    try:
        res = run_scenario(cfg, out_root, plots=plots)
        return {
            "value": None,
            "kind": res.verdict.get("kind"),
            "settle_metric": res.settle_metric,
            "final_sup": res.final_sup,
            "final_residual": res.final_residual,
            "error": None,
            "out_dir": str(res.out_dir),
        }
    except ChainscopeError as e:
        return {
            "value": None,
            "kind": f"error:{type(e).__name__}",
            "settle_metric": None,
            "final_sup": None,
            "final_residual": None,
            "error": str(e),
            "out_dir": None,
        }


def sweep(
    cfg: dict,
    axis: str,
    values: list[float],
    workers: int = 1,
    out_root: str | None = None,
    plots: bool = False,
) -> dict:
    """One run per axis value; rows ordered; threshold bracket on first flip."""
    jobs = []
    for i, v in enumerate(values):
        variant = set_by_path(cfg, axis, v)
        base_out = variant.get("output_dir", f"out/{variant.get('name', 'scenario')}")
        variant["output_dir"] = f"{base_out}/sweep_{i:03d}"
        variant["name"] = f"{variant.get('name', 'scenario')}@{axis}={v:g}"
        jobs.append((variant, out_root, plots))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_sweep_worker, jobs))
    else:
        rows = [_sweep_worker(j) for j in jobs]
    for v, row in zip(values, rows):
        row["value"] = v

    bracket = None
    for (v0, r0), (v1, r1) in zip(zip(values, rows), zip(values[1:], rows[1:])):
        if r0["kind"] != r1["kind"]:
            bracket = {"last_before_flip": v0, "first_after_flip": v1,
                       "kind_before": r0["kind"], "kind_after": r1["kind"]}
            break
    return {"axis": axis, "rows": rows, "threshold_bracket": bracket}


def write_sweep_summary(summary: dict, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with (out / "sweep_summary.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["value", "kind", "settle_metric", "final_sup", "final_residual", "error"])
        for row in summary["rows"]:
            w.writerow(
                [
                    fmt(row["value"]),
                    row["kind"],
                    fmt(row["settle_metric"]) if row["settle_metric"] is not None else "",
                    fmt(row["final_sup"]) if row["final_sup"] is not None else "",
                    fmt(row["final_residual"]) if row.get("final_residual") is not None else "",
                    row["error"] or "",
                ]
            )
    write_json(out / "sweep_summary.json", summary)
