"""Parabolic flow u_t = u_xx + f(u) on [-L, L] with ODE-driven edge values.

The edges follow the scalar flow theta' = f(theta) started from the sampled
initial edge values, which is the faithful truncation of far-field limits on
the whole line.  Time stepping is IMEX: explicit half-steps of the reaction
around a trapezoidal (Crank-Nicolson) diffusion solve, so long horizons are
cheap at fine grids.  A non-finite or out-of-guard value aborts the run;
clamping would silently break the comparison ordering the audits rely on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .errors import Blowup, ConfigError, NonFinite
from .nonlinearity import Nonlinearity


@dataclass(frozen=True)
class InitialData:
    """Initial profile specification; ``build`` samples it on a grid."""

    kind: str
    params: dict

    def build(self, x: np.ndarray) -> np.ndarray:
        p = self.params
        if self.kind == "compact_bump":
            pattern = p.get("sign_pattern", [1])
            width = float(p["width"])
            amp = float(p["amplitude"])
            center = float(p.get("center", 0.0))
            k = len(pattern)
            u = np.zeros_like(x)
            for i, s in enumerate(pattern):
                ci = center + (i - (k - 1) / 2.0) * width
                mask = np.abs(x - ci) < width / 2.0
                u[mask] += s * amp * np.cos(np.pi * (x[mask] - ci) / width) ** 2
            return u
        if self.kind == "step_front":
            ll = float(p["level_left"])
            lr = float(p["level_right"])
            steep = float(p.get("steepness", 1.0))
            return ll + (lr - ll) * 0.5 * (1.0 + np.tanh(steep * x))
        if self.kind == "tanh_profile":
            shift = float(p.get("shift", 0.0))
            scale = float(p.get("scale", math.sqrt(2.0)))
            return np.tanh((x - shift) / scale)
        if self.kind == "decaying_oscillation":
            # M e^x on the left of -k, e^{-x}(M + sin x) on the right of k,
            # linear bridge between; finitely many reflection zeros only for
            # mirror points beyond the oscillating tail.
            M = float(p["M"])
            k = float(p["k"])
            if M <= 2 or k <= 0:
                raise ValueError("decaying_oscillation needs M > 2 and k > 0")
            left = M * np.exp(x)
            right = np.exp(-x) * (M + np.sin(x))
            yl = M * math.exp(-k)
            yr = math.exp(-k) * (M + math.sin(k))
            bridge = yl + (yr - yl) * (x + k) / (2.0 * k)
            return np.where(x < -k, left, np.where(x > k, right, bridge))
        if self.kind == "explicit_samples":
            values = np.asarray(p["values"], dtype=float)
            if values.shape != x.shape:
                raise ValueError(
                    f"explicit_samples length {values.size} does not match grid {x.size}"
                )
            return values.copy()
        raise ValueError(f"unknown initial data kind {self.kind!r}")

    def support_radius(self) -> float | None:
        """Outer edge of the support for compact kinds, else None."""
        if self.kind == "compact_bump":
            k = len(self.params.get("sign_pattern", [1]))
            width = float(self.params["width"])
            center = float(self.params.get("center", 0.0))
            return abs(center) + k * width / 2.0
        return None


@dataclass(frozen=True)
class SolverConfig:
    half_width: float = 60.0
    dx: float = 0.01
    dt: float = 0.005
    t_end: float = 80.0
    snapshot_times: tuple[float, ...] = ()
    boundary_mode: str = "ode_driven"  # "ode_driven" | "frozen_dirichlet"
    u0: InitialData = field(default_factory=lambda: InitialData("compact_bump",
                                                                {"width": 10.0, "amplitude": 0.5}))

    def validate(self, f: Nonlinearity) -> None:
        if self.half_width <= 0:
            raise ConfigError("solver.L", "must be positive")
        if self.dx <= 0 or self.dx > self.half_width:
            raise ConfigError("solver.dx", "must be in (0, L]")
        if self.dt <= 0:
            raise ConfigError("solver.dt", "must be positive")
        dt_max = 0.5 / max(f.lipschitz_bound, 1e-12)
        if self.dt > dt_max:
            raise ConfigError(
                "solver.dt",
                f"must be <= 0.5/lipschitz_bound = {dt_max:.6g} for reaction accuracy",
            )
        if self.t_end < 0:
            raise ConfigError("solver.t_end", "must be nonnegative")
        if self.boundary_mode not in ("ode_driven", "frozen_dirichlet"):
            raise ConfigError("solver.boundary_mode", "must be ode_driven or frozen_dirichlet")
        for t in self.snapshot_times:
            if t < 0 or t > self.t_end + 1e-12:
                raise ConfigError("solver.snapshot_times", f"time {t!r} outside [0, t_end]")
        rad = self.u0.support_radius()
        if rad is not None and rad > self.half_width - 5.0:
            raise ConfigError(
                "initial_data", "compact support must stay within (-L+5, L-5)"
            )

    @property
    def n_nodes(self) -> int:
        return int(round(2.0 * self.half_width / self.dx)) + 1

    def grid(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n_nodes)


@dataclass(frozen=True)
class Snapshot:
    """One time slice with central-difference derivatives (one-sided edges)."""

    t: float
    x: np.ndarray
    u: np.ndarray
    ux: np.ndarray
    uxx: np.ndarray


def _derivatives(x: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    dx = x[1] - x[0]
    ux = np.empty_like(u)
    ux[1:-1] = (u[2:] - u[:-2]) / (2.0 * dx)
    ux[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx)
    ux[-1] = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * dx)
    uxx = np.empty_like(u)
    uxx[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / dx**2
    uxx[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / dx**2
    uxx[-1] = (2.0 * u[-1] - 5.0 * u[-2] + 4.0 * u[-3] - u[-4]) / dx**2
    return ux, uxx


def make_snapshot(t: float, x: np.ndarray, u: np.ndarray) -> Snapshot:
    ux, uxx = _derivatives(x, u)
    for a in (x, u, ux, uxx):
        a.setflags(write=False)
    return Snapshot(float(t), x, u, ux, uxx)


def _rk4(f: Callable[[float], float], y: float, h: float) -> float:
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def boundary_theta(
    f: Nonlinearity, theta0: float, t: float, max_step: float = 0.005
) -> float:
    """Edge value at time t: RK4 on theta' = f(theta) from theta(0) = theta0."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return float(theta0)
    n = max(1, int(math.ceil(t / max_step)))
    h = t / n
    scalar = lambda y: float(f(y))
    y = float(theta0)
    lo, hi = f.window
    for _ in range(n):
        y = _rk4(scalar, y, h)
        if not (lo <= y <= hi) or not math.isfinite(y):
            raise Blowup(f"edge value left the window: theta={y!r}")
    return y


class Stepper:
    """Owns the factored diffusion operator and the edge ODE state."""

    def __init__(self, config: SolverConfig, f: Nonlinearity):
        config.validate(f)
        self.config = config
        self.f = f
        self.x = config.grid()
        self.dx = self.x[1] - self.x[0]
        self.dt = config.dt
        self.n = self.x.size
        r = self.dt / (2.0 * self.dx**2)
        self.r = r
        m = self.n - 2
        ab = np.zeros((2, m))
        ab[0, 1:] = -r
        ab[1, :] = 1.0 + 2.0 * r
        self._chol = cholesky_banded(ab, lower=False)
        self.u = config.u0.build(self.x)
        self.t = 0.0
        self.theta = (float(self.u[0]), float(self.u[-1]))
        self._scalar_f = lambda y: float(f(y))
        self.guard = f.guard

    def _theta_half(self) -> tuple[tuple[float, float], tuple[float, float]]:
        if self.config.boundary_mode == "frozen_dirichlet":
            return self.theta, self.theta
        h = 0.5 * self.dt
        mid = tuple(_rk4(self._scalar_f, y, h) for y in self.theta)
        new = tuple(_rk4(self._scalar_f, y, h) for y in mid)
        lo, hi = self.f.window
        for y in new:
            if not (lo <= y <= hi) or not math.isfinite(y):
                raise Blowup(f"edge value left the window: theta={y!r}")
        return mid, new  # type: ignore[return-value]

    def _react_half(self, u: np.ndarray) -> np.ndarray:
        h = 0.5 * self.dt
        mid = u + 0.5 * h * self.f(u)
        return u + h * self.f(mid)

    def step(self) -> None:
        theta_mid, theta_new = self._theta_half()
        u1 = self._react_half(self.u)
        u1[0], u1[-1] = theta_mid

        r = self.r
        w = u1[1:-1]
        rhs = (1.0 - 2.0 * r) * w
        rhs[1:] += r * w[:-1]
        rhs[:-1] += r * w[1:]
        rhs[0] += 2.0 * r * theta_mid[0]
        rhs[-1] += 2.0 * r * theta_mid[1]
        w_new = cho_solve_banded((self._chol, False), rhs)

        u2 = np.empty_like(self.u)
        u2[0], u2[-1] = theta_mid
        u2[1:-1] = w_new
        u3 = self._react_half(u2)
        u3[0], u3[-1] = theta_new

        self.u = u3
        self.t += self.dt
        self.theta = theta_new

        bad = ~np.isfinite(self.u) | (np.abs(self.u) > self.guard)
        if bad.any():
            i = int(np.argmax(bad))
            raise NonFinite(self.t, float(self.x[i]), float(self.u[i]))

    def snapshot(self) -> Snapshot:
        return make_snapshot(self.t, self.x, self.u.copy())


def step(snapshot: Snapshot, f: Nonlinearity, dt: float,
         boundary_mode: str = "ode_driven") -> Snapshot:
    """One IMEX step from an existing snapshot (convenience wrapper)."""
    x = snapshot.x
    config = SolverConfig(
        half_width=float(x[-1]),
        dx=float(x[1] - x[0]),
        dt=dt,
        t_end=dt,
        boundary_mode=boundary_mode,
        u0=InitialData("explicit_samples", {"values": np.asarray(snapshot.u)}),
    )
    st = Stepper(config, f)
    st.t = snapshot.t
    st.step()
    return st.snapshot()


def solve(config: SolverConfig, f: Nonlinearity) -> list[Snapshot]:
    """Snapshots at t = 0 and at the requested times (nearest step each)."""
    st = Stepper(config, f)
    n_steps = int(round(config.t_end / config.dt))
    wanted = sorted({min(max(int(round(t / config.dt)), 0), n_steps)
                     for t in config.snapshot_times})
    if not wanted and n_steps > 0:
        wanted = [n_steps]
    out = [st.snapshot()]
    targets = [k for k in wanted if k > 0]
    for k in range(1, n_steps + 1):
        st.step()
        if targets and k == targets[0]:
            out.append(st.snapshot())
            targets.pop(0)
    return out


def residual(snapshot: Snapshot, f: Nonlinearity) -> float:
    """Steadiness meter: sup over interior nodes of |u_xx + f(u)|."""
    interior = slice(1, -1)
    r = snapshot.uxx[interior] + f(snapshot.u[interior])
    return float(np.max(np.abs(r)))
