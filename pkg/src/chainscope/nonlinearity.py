"""Reaction terms: zero census, potential, far-field extension, scenario class.

The reaction term f drives both the stationary phase plane and the parabolic
flow.  Everything downstream consumes the objects built here: the zero census
with nondegeneracy classification, the tabulated potential F(u) = int_0^u f,
and the far-field linear extension that makes every level set of the energy
bounded.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import NDViolation, NoStableLimit, TangencySuspected

DEFAULT_WINDOW = (-6.0, 6.0)
DEFAULT_ZERO_TOL = 1e-12
DEFAULT_DEGENERACY_TOL = 1e-6
DEFAULT_SCAN_DENSITY = 10_000
POTENTIAL_GRID_SIZE = 100_000

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    """A reaction term on a fixed analysis window.

    ``evaluator`` must accept scalars and numpy arrays elementwise.  When
    ``derivative_evaluator`` is absent, slopes fall back to central finite
    differences.  ``far_field_cutoff`` is set when the term equals s/2
    outside that radius (see :func:`extend_far_field`).
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    derivative_evaluator: Callable[[np.ndarray], np.ndarray] | None = None
    lipschitz_bound: float = 0.0
    far_field_cutoff: float | None = None
    window: tuple[float, float] = DEFAULT_WINDOW
    name: str = "custom"

    def __call__(self, u):
        return self.evaluator(u)

    def slope(self, u, h: float = 1e-6):
        if self.derivative_evaluator is not None:
            return self.derivative_evaluator(u)
        return (self.evaluator(u + h) - self.evaluator(u - h)) / (2.0 * h)

    @property
    def guard(self) -> float:
        """Radius beyond which PDE values are treated as blown up."""
        if self.far_field_cutoff is not None:
            return self.far_field_cutoff + 1.0
        return max(abs(self.window[0]), abs(self.window[1]))


def _estimate_lipschitz(f: Callable, window: tuple[float, float], n: int = 4096) -> float:
    u = np.linspace(window[0], window[1], n)
    v = np.asarray(f(u), dtype=float)
    return float(np.max(np.abs(np.diff(v) / np.diff(u))))


def from_callable(
    evaluator: Callable,
    derivative: Callable | None = None,
    window: tuple[float, float] = DEFAULT_WINDOW,
    name: str = "custom",
) -> Nonlinearity:
    lip = _estimate_lipschitz(evaluator, window)
    return Nonlinearity(evaluator, derivative, lip, None, window, name)


def from_polynomial(
    coefficients: Sequence[float],
    window: tuple[float, float] = DEFAULT_WINDOW,
    name: str | None = None,
) -> Nonlinearity:
    """Build from ascending-degree coefficients [c0, c1, c2, ...]."""
    coeffs = np.asarray(list(coefficients), dtype=float)
    if coeffs.size == 0:
        raise ValueError("polynomial needs at least one coefficient")
    dcoeffs = coeffs[1:] * np.arange(1, coeffs.size)

    def evaluator(u, _c=coeffs):
        return np.polynomial.polynomial.polyval(u, _c)

    def derivative(u, _c=dcoeffs):
        if _c.size == 0:
            return np.zeros_like(np.asarray(u, dtype=float))
        return np.polynomial.polynomial.polyval(u, _c)

    lip = _estimate_lipschitz(evaluator, window)
    label = name or "poly[" + ",".join(f"{c:g}" for c in coeffs) + "]"
    return Nonlinearity(evaluator, derivative, lip, None, window, label)


PRESET_COEFFICIENTS: dict[str, list[float]] = {
    # u - u^3: balanced bistable well pair around an unstable origin
    "cubic_bistable": [0.0, 1.0, 0.0, -1.0],
    # u^2 - u: stable origin with a single ground-state lobe to the right
    "quadratic_groundstate": [0.0, -1.0, 1.0],
    # -2(u + 0.7)(u - 0.15)(u - 1.2): asymmetric, f(0) != 0
    "shifted_cubic": [0.252, 1.918, -0.7, -2.0],
}


def preset(name: str, window: tuple[float, float] = DEFAULT_WINDOW) -> Nonlinearity:
    try:
        coeffs = PRESET_COEFFICIENTS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; options: {sorted(PRESET_COEFFICIENTS)}")
    return from_polynomial(coeffs, window, name=name)


@dataclass(frozen=True)
class Equilibrium:
    """A nondegenerate zero of f."""

    value: float
    slope: float
    provenance: str = "original"  # "original" | "satellite"

    @property
    def ode_stable(self) -> bool:
        """Stability for the scalar flow y' = f(y)."""
        return self.slope < 0.0


def find_zeros(
    f: Nonlinearity,
    scan_density: int = DEFAULT_SCAN_DENSITY,
    zero_tol: float = DEFAULT_ZERO_TOL,
    degeneracy_tol: float = DEFAULT_DEGENERACY_TOL,
    provenance: str = "original",
) -> list[Equilibrium]:
    """Locate all sign changes of f on the window, refined by bisection.

    Raises NDViolation for a near-degenerate zero and TangencySuspected when
    f dips to zero without changing sign at the scan resolution.
    """
    lo, hi = f.window
    if not (hi > lo) or scan_density <= 0:
        raise ValueError("window must be nonempty and scan_density positive")
    u = np.linspace(lo, hi, scan_density)
    v = np.asarray(f(u), dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("evaluator is not finite on the window")

    sign = np.sign(v)
    zeros: list[Equilibrium] = []
    flips = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    for i in flips:
        root = brentq(lambda s: float(f(s)), u[i], u[i + 1], xtol=zero_tol, rtol=8.9e-16)
        slope = float(f.slope(root))
        if abs(slope) <= degeneracy_tol:
            raise NDViolation(root, slope, degeneracy_tol)
        zeros.append(Equilibrium(float(root), slope, provenance))

    # Exact grid hits (sign == 0 runs) refine to the node value itself.
    exact = np.nonzero(sign == 0)[0]
    for i in exact:
        root = float(u[i])
        if any(abs(root - z.value) <= max(1e-9, zero_tol * 10) for z in zeros):
            continue
        slope = float(f.slope(root))
        if abs(slope) <= degeneracy_tol:
            raise NDViolation(root, slope, degeneracy_tol)
        zeros.append(Equilibrium(root, slope, provenance))

    _scan_tangencies(f, u, v, zeros)
    zeros.sort(key=lambda z: z.value)
    return zeros


def _scan_tangencies(f, u, v, zeros, rel_tol: float = 1e-6) -> None:
    """Flag interior dips of |f| to ~zero that are not bracketed sign changes."""
    absv = np.abs(v)
    scale = max(1.0, float(np.max(absv)))
    cand = np.nonzero(
        (absv[1:-1] <= absv[:-2]) & (absv[1:-1] <= absv[2:]) & (absv[1:-1] < rel_tol * scale)
    )[0]
    for i in cand + 1:
        if v[i - 1] * v[i + 1] <= 0:
            continue  # bracketed by a sign change; handled as a zero
        if any(u[i - 1] <= z.value <= u[i + 1] for z in zeros):
            continue
        res = minimize_scalar(
            lambda s: abs(float(f(s))), bounds=(u[i - 1], u[i + 1]), method="bounded",
            options={"xatol": 1e-12},
        )
        if abs(res.fun) < rel_tol * scale:
            raise TangencySuspected(float(res.x), float(res.fun))


class Potential:
    """Tabulated potential F(u) = int_0^u f(s) ds with F(0) = 0.

    ``__call__`` interpolates linearly between grid nodes (vectorized);
    ``refined`` re-integrates from the nearest node with Gauss-Legendre
    quadrature for scalar evaluations at root-finding accuracy.
    """

    def __init__(self, f: Nonlinearity, grid_size: int = POTENTIAL_GRID_SIZE):
        lo, hi = f.window
        self._f = f
        if lo < 0.0 < hi:
            n_left = max(2, int(round(grid_size * (-lo) / (hi - lo))))
            n_right = max(2, grid_size - n_left)
            grid = np.concatenate(
                [np.linspace(lo, 0.0, n_left + 1)[:-1], np.linspace(0.0, hi, n_right)]
            )
            anchor = n_left
        else:
            grid = np.linspace(lo, hi, grid_size)
            anchor = None
        self.grid = grid

        # Composite Simpson per cell, accumulated; exact anchor F(0)=0 when
        # 0 is a node, otherwise offset by a one-off quadrature from 0.
        mid = 0.5 * (grid[:-1] + grid[1:])
        h = np.diff(grid)
        fl = np.asarray(f(grid[:-1]), dtype=float)
        fm = np.asarray(f(mid), dtype=float)
        fr = np.asarray(f(grid[1:]), dtype=float)
        increments = h / 6.0 * (fl + 4.0 * fm + fr)
        values = np.concatenate([[0.0], np.cumsum(increments)])
        if anchor is not None:
            values -= values[anchor]
            values[anchor] = 0.0
        else:
            values += self._gl_integral(0.0, grid[0])
        self.values = values

    def _gl_integral(self, a: float, b: float) -> float:
        if a == b:
            return 0.0
        half = 0.5 * (b - a)
        nodes = 0.5 * (a + b) + half * _GL_NODES
        return float(half * np.dot(_GL_WEIGHTS, np.asarray(self._f(nodes), dtype=float)))

    def __call__(self, u):
        return np.interp(u, self.grid, self.values)

    def refined(self, u: float) -> float:
        """Scalar F(u) at quadrature accuracy (node value + local GL)."""
        i = int(np.clip(np.searchsorted(self.grid, u) - 1, 0, self.grid.size - 1))
        return float(self.values[i]) + self._gl_integral(float(self.grid[i]), float(u))

    def refined_vec(self, u: np.ndarray) -> np.ndarray:
        """Vectorized quadrature-accuracy evaluation."""
        u = np.asarray(u, dtype=float)
        i = np.clip(np.searchsorted(self.grid, u) - 1, 0, self.grid.size - 1)
        a = self.grid[i]
        half = 0.5 * (u - a)
        nodes = 0.5 * (u + a)[:, None] + half[:, None] * _GL_NODES[None, :]
        fv = np.asarray(self._f(nodes), dtype=float)
        return self.values[i] + half * (fv @ _GL_WEIGHTS)

    def invert_on_segment(self, level: float, a: float, b: float) -> float:
        """Solve F(u) = level for u in [a, b] where F is monotone."""
        g = lambda s: self.refined(s) - level
        ga, gb = g(a), g(b)
        if ga == 0.0:
            return float(a)
        if gb == 0.0:
            return float(b)
        if ga * gb > 0:
            raise ValueError("level not bracketed on the requested segment")
        return float(brentq(g, a, b, xtol=1e-14, rtol=8.9e-16))


@lru_cache(maxsize=16)
def potential(f: Nonlinearity, grid_size: int = POTENTIAL_GRID_SIZE) -> Potential:
    """Tabulate the potential of f (cached per Nonlinearity instance)."""
    return Potential(f, grid_size)


def extend_far_field(
    f: Nonlinearity,
    cutoff: float,
    blend_width: float,
    degeneracy_tol: float = DEFAULT_DEGENERACY_TOL,
) -> tuple[Nonlinearity, list[Equilibrium]]:
    """Replace f by s/2 outside |s| >= cutoff with a linear blend.

    Returns the extended term plus the satellite equilibria the blend creates
    (each classified; a degenerate one raises NDViolation so the caller can
    retry with a perturbed blend width).  The original term is untouched on
    [-cutoff + blend_width, cutoff - blend_width].
    """
    if cutoff <= 0 or blend_width <= 0 or blend_width >= cutoff:
        raise ValueError("need 0 < blend_width < cutoff")
    inner = cutoff - blend_width
    base = f.evaluator
    f_right = float(base(inner))
    f_left = float(base(-inner))
    slope_right = (cutoff / 2.0 - f_right) / blend_width
    slope_left = (f_left - (-cutoff / 2.0)) / blend_width

    def evaluator(u, _b=base):
        u = np.asarray(u, dtype=float)
        out = np.where(
            np.abs(u) <= inner,
            _b(np.clip(u, -inner, inner)),
            np.where(
                u > 0,
                np.where(u >= cutoff, u / 2.0, f_right + slope_right * (u - inner)),
                np.where(u <= -cutoff, u / 2.0, f_left + slope_left * (u + inner)),
            ),
        )
        return out if out.ndim else float(out)

    base_slope = f.slope

    def derivative(u):
        u = np.asarray(u, dtype=float)
        out = np.where(
            np.abs(u) <= inner,
            base_slope(np.clip(u, -inner, inner)),
            np.where(np.abs(u) >= cutoff, 0.5, np.where(u > 0, slope_right, slope_left)),
        )
        return out if out.ndim else float(out)

    lip = _estimate_lipschitz(evaluator, f.window)
    extended = Nonlinearity(
        evaluator, derivative, lip, cutoff, f.window, f"{f.name}+farfield"
    )

    original = find_zeros(f, degeneracy_tol=degeneracy_tol)
    satellites = [
        z
        for z in find_zeros(extended, degeneracy_tol=degeneracy_tol)
        if not any(abs(z.value - o.value) <= 1e-8 for o in original)
    ]
    satellites = [replace(z, provenance="satellite") for z in satellites]
    return extended, satellites


@dataclass(frozen=True)
class ScenarioClass:
    """How the zero far-field value behaves under the scalar flow y' = f(y).

    tag "unstable": 0 is an unstable equilibrium (f(0)=0, f'(0)>0); anything
    else is "stable" (0 stable, or not an equilibrium at all).
    """

    tag: str  # "stable" | "unstable"
    limit_value: float | None = None  # settling value of y'=f(y), y(0)=0
    bistable: tuple[float, float] | None = None


def classify_scenario(
    f: Nonlinearity,
    zeros: list[Equilibrium] | None = None,
    horizon: float = 400.0,
    settle_tol: float = 1e-10,
) -> ScenarioClass:
    """Classify the far-field behavior of the zero limit and find its target."""
    if zeros is None:
        zeros = find_zeros(f)
    f0 = float(f(0.0))
    at_zero = next((z for z in zeros if abs(z.value) < 1e-9), None)

    if at_zero is not None and not at_zero.ode_stable:
        below = [z.value for z in zeros if z.value < -1e-9]
        above = [z.value for z in zeros if z.value > 1e-9]
        bistable = None
        if below and above:
            g1, g2 = max(below), min(above)
            s1 = next(z.slope for z in zeros if z.value == g1)
            s2 = next(z.slope for z in zeros if z.value == g2)
            if s1 < 0 and s2 < 0:
                bistable = (g1, g2)
        return ScenarioClass("unstable", limit_value=None, bistable=bistable)

    if at_zero is not None:  # 0 is a stable equilibrium
        return ScenarioClass("stable", limit_value=0.0)

    # f(0) != 0: integrate y' = f(y), y(0) = 0 until it settles.
    y = 0.0
    dt = min(0.01, 0.25 / max(f.lipschitz_bound, 1.0))
    steps = int(math.ceil(horizon / dt))
    lo, hi = f.window
    for _ in range(steps):
        y = _rk4_scalar(f, y, dt)
        if not (lo <= y <= hi):
            raise NoStableLimit(f"trajectory left the window at y={y!r}")
        if abs(float(f(y))) < settle_tol:
            break
    target = min(zeros, key=lambda z: abs(z.value - y), default=None)
    if target is None or abs(target.value - y) > 1e-6 or not target.ode_stable:
        raise NoStableLimit(f"no stable equilibrium reached from 0 (y={y!r})")
    _ = f0
    return ScenarioClass("stable", limit_value=target.value)


def _rk4_scalar(f: Nonlinearity, y: float, dt: float) -> float:
    k1 = float(f(y))
    k2 = float(f(y + 0.5 * dt * k1))
    k3 = float(f(y + 0.5 * dt * k2))
    k4 = float(f(y + dt * k3))
    return y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
