"""Figure rendering: phase portrait, snapshot waterfall, trajectory overlay.

Figures are written next to the delimited output of a run; nothing here is
interactive.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .pde import Snapshot
from .phase_plane import Census


def render_phase_plane(census: Census, path: Path, n_orbits: int = 4) -> None:
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    colors = plt.cm.tab10.colors
    for ch in census.chains:
        color = colors[ch.id % len(colors)]
        if ch.trivial:
            ax.plot([ch.p], [0.0], "o", color=color, ms=6,
                    label=f"chain {ch.id} (center)")
            continue
        pts = census.boundary_points("chain", ch.id, n=800)
        ax.plot(pts[:, 0], pts[:, 1], "-", color=color, lw=1.6,
                label=f"chain {ch.id} (c={ch.energy:.4g})")
        for s in ch.saddles:
            ax.plot([s], [0.0], "x", color=color, ms=8)
    for an in census.annuli:
        if an.outer_loop_id is None:
            continue
        try:
            orbits = census.sample_orbits(an, count=n_orbits)
        except Exception:
            continue
        for orb in orbits:
            u = np.linspace(orb.p, orb.q, 300)
            v = np.sqrt(np.maximum(2.0 * (orb.energy - census.potential(u)), 0.0))
            ax.plot(np.concatenate([u, u[::-1]]), np.concatenate([v, -v[::-1]]),
                    color="0.8", lw=0.6, zorder=0)
    ax.set_xlabel("u")
    ax.set_ylabel("u_x")
    ax.set_title("stationary phase plane: chains, loops, sample orbits")
    ax.legend(loc="best", fontsize=7)
    ax.grid(alpha=0.2)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_snapshots(snapshots: list[Snapshot], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    cmap = plt.cm.viridis
    t_max = max(s.t for s in snapshots) or 1.0
    for s in snapshots:
        ax.plot(s.x, s.u, color=cmap(s.t / t_max), lw=0.9)
    sm = plt.cm.ScalarMappable(cmap=cmap, norm=plt.Normalize(0.0, t_max))
    fig.colorbar(sm, ax=ax, label="t")
    ax.set_xlabel("x")
    ax.set_ylabel("u")
    ax.set_title("solution snapshots")
    ax.grid(alpha=0.2)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_trajectories(
    census: Census, snapshots: list[Snapshot], path: Path, probe_window: float
) -> None:
    from .asymptotics import spatial_trajectory

    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    for ch in census.chains:
        if ch.trivial:
            ax.plot([ch.p], [0.0], "ko", ms=4)
            continue
        pts = census.boundary_points("chain", ch.id, n=800)
        ax.plot(pts[:, 0], pts[:, 1], "k-", lw=1.0, alpha=0.6)
    cmap = plt.cm.plasma
    t_max = max(s.t for s in snapshots) or 1.0
    tail = snapshots[max(0, len(snapshots) - 6):]
    for s in tail:
        tr = spatial_trajectory(s, probe_window)
        ax.plot(tr.points[:, 0], tr.points[:, 1], color=cmap(s.t / t_max), lw=1.0)
    ax.set_xlabel("u")
    ax.set_ylabel("u_x")
    ax.set_title(f"tail spatial trajectories on |x| <= {probe_window:g}")
    ax.grid(alpha=0.2)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
