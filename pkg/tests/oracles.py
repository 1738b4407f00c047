"""Independent numerical oracles used by the tests.

Everything here works by direct time integration of the planar system
u' = v, v' = -f(u) -- no potential tabulation, no level-set inversion -- so
census results can be cross-checked against a genuinely different route.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.integrate import solve_ivp


def first_return_ivp(f, p: float, t_max: float = 200.0):
    """High-accuracy first return to the axis from (p, 0); returns (q, T_half)."""
    fp = float(f(p))
    if fp == 0.0:
        raise ValueError("seed is an equilibrium")

    def rhs(t, y):
        return [y[1], -float(f(y[0]))]

    def ev(t, y):
        return y[1]

    ev.terminal = True
    ev.direction = -1.0 if fp < 0 else 1.0
    sol = solve_ivp(rhs, [0.0, t_max], [p, 0.0], events=ev, rtol=1e-11, atol=1e-13)
    if sol.t_events[0].size == 0:
        raise RuntimeError(f"no return from {p!r} within t={t_max}")
    return float(sol.y_events[0][0][0]), float(sol.t_events[0][0])


def batch_first_return(
    fvec,
    seeds: np.ndarray,
    t_max: float = 60.0,
    dt: float = 0.004,
) -> np.ndarray:
    """Fixed-step RK4 first-return positions for many axis seeds at once.

    Returns an array with the first u where v re-crosses zero (nan when no
    return happened by t_max; equilibrium seeds also give nan).
    """
    u = np.array(seeds, dtype=float)
    v = np.zeros_like(u)
    f0 = np.asarray(fvec(u), dtype=float)
    s0 = np.sign(-f0)  # sign v takes immediately after leaving the axis
    out = np.full(u.shape, np.nan)
    active = np.abs(f0) > 1e-12

    def rhs(state):
        return np.array([state[1], -np.asarray(fvec(state[0]), dtype=float)])

    state = np.array([u, v])
    n_steps = int(round(t_max / dt))
    left_axis = np.zeros(u.shape, dtype=bool)
    for _ in range(n_steps):
        if not active.any():
            break
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * dt * k1)
        k3 = rhs(state + 0.5 * dt * k2)
        k4 = rhs(state + dt * k3)
        new = state + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        v_old, v_new = state[1], new[1]
        left_axis |= active & (np.abs(v_old) > 1e-10)
        crossed = active & left_axis & (np.sign(v_new) != s0) & (np.sign(v_old) == s0)
        if crossed.any():
            frac = v_old[crossed] / (v_old[crossed] - v_new[crossed])
            out[crossed] = state[0][crossed] + frac * (new[0][crossed] - state[0][crossed])
            active &= ~crossed
        state = new
    return out


def axis_chain_boundaries(
    fvec,
    window: tuple[float, float],
    fscalar=None,
    n_seeds: int = 301,
    refine_tol: float = 1e-8,
    jump_tol: float = 0.2,
    t_max: float = 60.0,
    coarse_tol: float = 2e-4,
) -> list[float]:
    """Boundary u-values of the periodic components along the axis.

    Scans the window for jumps of the first-return map, bisects each jump
    with the batch integrator down to a coarse width, then switches to the
    adaptive integrator (fixed-step RK4 loses too much energy in the slow
    near-saddle passage to classify closer orbits).  The resulting points are
    exactly where the axis meets a chain (turning extremes and equal-level
    saddles).
    """
    lo, hi = window
    pad = 0.01 * (hi - lo)
    seeds = np.linspace(lo + pad, hi - pad, n_seeds)
    returns = batch_first_return(fvec, seeds, t_max=t_max)
    valid = [
        (float(s), float(r)) for s, r in zip(seeds, returns) if not math.isnan(r)
    ]

    brackets = []  # [a, ra, b, rb]
    for (a, ra), (b, rb) in zip(valid[:-1], valid[1:]):
        if abs(ra - rb) > jump_tol:
            brackets.append([a, ra, b, rb])

    while brackets and max(b[2] - b[0] for b in brackets) > coarse_tol:
        mids = np.array([0.5 * (br[0] + br[2]) for br in brackets])
        rms = batch_first_return(fvec, mids, t_max=t_max)
        for br, m, rm in zip(brackets, mids, rms):
            if br[2] - br[0] <= coarse_tol:
                continue
            if math.isnan(rm):
                br[0] = br[2] = float(m)
            elif abs(rm - br[1]) <= abs(rm - br[3]):
                br[0], br[1] = float(m), float(rm)
            else:
                br[2], br[3] = float(m), float(rm)

    if fscalar is None:
        fscalar = lambda u: float(fvec(np.array([u]))[0])
    out = []
    for br in brackets:
        a, ra, b, rb = br
        while b - a > refine_tol:
            m = 0.5 * (a + b)
            try:
                rm, _ = first_return_ivp(fscalar, m, t_max=4.0 * t_max)
            except (RuntimeError, ValueError):
                # no return by the horizon or an exact equilibrium: on the boundary
                a = b = m
                break
            if abs(rm - ra) <= abs(rm - rb):
                a, ra = m, rm
            else:
                b, rb = m, rm
        out.append(0.5 * (a + b))
    return out


def scan_equilibria(fvec, window: tuple[float, float], n: int = 20001) -> list[float]:
    """Sign-change scan plus bisection; independent of the census zero path."""
    u = np.linspace(window[0], window[1], n)
    v = np.asarray(fvec(u), dtype=float)
    roots = []
    idx = np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]
    for i in idx:
        a, b = float(u[i]), float(u[i + 1])
        fa = float(fvec(np.array([a]))[0])
        for _ in range(60):
            m = 0.5 * (a + b)
            fm = float(fvec(np.array([m]))[0])
            if fa * fm <= 0:
                b = m
            else:
                a, fa = m, fm
        roots.append(0.5 * (a + b))
    return roots


def extended_vec(coeffs, kappa: float, blend_width: float):
    """Far-field extension of an ascending-coefficient polynomial.

    Restates the blend definition directly so oracle runs check against the
    analytic construction, not the package implementation.  Returns a
    numpy-vectorized evaluator and a fast plain-python scalar one.
    """
    inner = kappa - blend_width
    c = np.asarray(coeffs, dtype=float)
    rev = tuple(reversed(coeffs))

    def base(u):
        return np.polynomial.polynomial.polyval(u, c)

    def base_scalar(u: float) -> float:
        acc = 0.0
        for ck in rev:
            acc = acc * u + ck
        return acc

    f_right = float(base(inner))
    f_left = float(base(-inner))
    slope_right = (kappa / 2.0 - f_right) / blend_width
    slope_left = (f_left + kappa / 2.0) / blend_width

    def fvec(u):
        u = np.asarray(u, dtype=float)
        return np.where(
            np.abs(u) <= inner,
            base(np.clip(u, -inner, inner)),
            np.where(
                np.abs(u) >= kappa,
                u / 2.0,
                np.where(
                    u > 0,
                    f_right + slope_right * (u - inner),
                    f_left + slope_left * (u + inner),
                ),
            ),
        )

    def fscalar(u: float) -> float:
        au = -u if u < 0 else u
        if au <= inner:
            return base_scalar(u)
        if au >= kappa:
            return u / 2.0
        if u > 0:
            return f_right + slope_right * (u - inner)
        return f_left + slope_left * (u + inner)

    return fvec, fscalar
