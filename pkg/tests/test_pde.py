import numpy as np
import pytest

from chainscope import boundary_theta, from_callable, from_polynomial, residual, solve, step
from chainscope.errors import Blowup, ConfigError, NonFinite
from chainscope.pde import InitialData, SolverConfig, Stepper, make_snapshot


def small_config(u0, *, L=20.0, dx=0.02, dt=0.01, t_end=2.0, times=None, mode="ode_driven"):
    return SolverConfig(
        half_width=L, dx=dx, dt=dt, t_end=t_end,
        snapshot_times=times or (t_end,), boundary_mode=mode, u0=u0,
    )


def test_boundary_theta_linear_decay():
    f = from_polynomial([0.0, -1.0])
    assert boundary_theta(f, 0.1, 1.0) == pytest.approx(0.1 * np.exp(-1), abs=1e-8)


def test_boundary_theta_equilibrium():
    f = from_polynomial([0.0, 1.0, 0.0, -1.0])
    for t in (0.0, 1.0, 10.0):
        assert boundary_theta(f, 0.0, t) == 0.0


def test_boundary_theta_logistic_front():
    f = from_polynomial([1.0, 0.0, -1.0])
    assert boundary_theta(f, 0.0, 2.0) == pytest.approx(np.tanh(2.0), abs=1e-8)


def test_boundary_theta_blowup():
    f = from_polynomial([0.0, 1.0])  # y' = y from 1 exits the window
    with pytest.raises(Blowup):
        boundary_theta(f, 1.0, 3.0)


def test_step_fixed_point(cubic_f):
    x = np.linspace(-20, 20, 2001)
    s = make_snapshot(0.0, x, np.ones_like(x))
    s2 = step(s, cubic_f, 0.01)
    assert np.max(np.abs(s2.u - 1.0)) <= 1e-13
    s0 = make_snapshot(0.0, x.copy(), np.zeros_like(x))
    s3 = step(s0, cubic_f, 0.01)
    assert np.all(s3.u == 0.0)


def test_step_steady_profile_drift(cubic_f):
    dx = 0.005
    x = np.arange(-30.0, 30.0 + dx / 2, dx)
    cfg = small_config(
        InitialData("tanh_profile", {"scale": float(np.sqrt(2.0))}),
        L=30.0, dx=dx, dt=0.005, t_end=1.0,
    )
    snaps = solve(cfg, cubic_f)
    drift = np.max(np.abs(snaps[-1].u - snaps[0].u))
    assert drift <= 1e-4  # sup-change per unit time on the discrete steady state


def test_solve_zero_horizon(cubic_f):
    cfg = small_config(InitialData("compact_bump", {"width": 4.0, "amplitude": 0.5}),
                       t_end=0.0, times=())
    snaps = solve(cfg, cubic_f)
    assert len(snaps) == 1 and snaps[0].t == 0.0


def test_solve_front_relaxes_to_shifted_tanh(cubic_f):
    cfg = small_config(
        InitialData("step_front", {"level_left": -1.0, "level_right": 1.0, "steepness": 0.4}),
        L=30.0, dx=0.02, dt=0.01, t_end=20.0, times=(20.0,),
    )
    snaps = solve(cfg, cubic_f)
    s = snaps[-1]
    from scipy.optimize import minimize_scalar

    mask = np.abs(s.x) <= 20.0
    fit = minimize_scalar(
        lambda sh: float(np.max(np.abs(s.u[mask] - np.tanh((s.x[mask] - sh) / np.sqrt(2))))),
        bounds=(-5, 5), method="bounded",
    )
    assert fit.fun <= 1e-2


def test_solve_subthreshold_decay(quadratic_f):
    cfg = small_config(
        InitialData("compact_bump", {"width": 4.0, "amplitude": 0.05}),
        t_end=10.0, times=(10.0,),
    )
    snaps = solve(cfg, quadratic_f)
    final = float(np.max(np.abs(snaps[-1].u)))
    assert final <= 1e-3
    # linearized decay envelope: slope of f at 0 is -1
    assert final <= 0.05 * np.exp(-0.5 * 10.0)


def test_residual_analytic_profiles(cubic_f, quadratic_f):
    for dx, bound in ((0.005, 1e-4),):
        x = np.arange(-30.0, 30.0 + dx / 2, dx)
        tanh_prof = make_snapshot(0.0, x, np.tanh(x / np.sqrt(2)))
        sech_prof = make_snapshot(0.0, x.copy(), 1.5 / np.cosh(x / 2) ** 2)
        assert residual(tanh_prof, cubic_f) <= bound
        assert residual(sech_prof, quadratic_f) <= bound


def test_residual_second_order(cubic_f):
    res = {}
    for dx in (0.01, 0.005):
        x = np.arange(-30.0, 30.0 + dx / 2, dx)
        res[dx] = residual(make_snapshot(0.0, x, np.tanh(x / np.sqrt(2))), cubic_f)
    assert res[0.01] / res[0.005] >= 3.5


def test_comparison_principle(cubic_f):
    times = tuple(np.linspace(0.5, 8.0, 16))
    lo = small_config(InitialData("compact_bump", {"width": 8.0, "amplitude": 0.3}),
                      t_end=8.0, times=times)
    hi = small_config(InitialData("compact_bump", {"width": 8.0, "amplitude": 0.6}),
                      t_end=8.0, times=times)
    s_lo, s_hi = solve(lo, cubic_f), solve(hi, cubic_f)
    for a, b in zip(s_lo, s_hi):
        assert float(np.min(b.u - a.u)) >= -1e-10


def test_boundary_fidelity_until_front_arrival():
    f, _ = __import__("chainscope").extend_far_field(from_polynomial([1.0, 0.0, -1.0]), 2.0, 0.25)
    L = 30.0
    times = tuple(np.linspace(0.25, 3.0, 12))
    cfg = small_config(InitialData("compact_bump", {"width": 6.0, "amplitude": 0.3}),
                       L=L, dx=0.02, dt=0.005, t_end=3.0, times=times)
    snaps = solve(cfg, f)
    probe = np.argmin(np.abs(snaps[0].x - (L - 5.0)))
    t_front = (L - 5.0 - 3.0) / (2.0 * np.sqrt(f.lipschitz_bound))
    for s in snaps[1:]:
        if s.t > t_front:
            break
        assert abs(s.u[probe] - np.tanh(s.t)) <= 1e-2


def test_determinism(cubic_f):
    cfg = small_config(InitialData("compact_bump", {"width": 6.0, "amplitude": 0.5}),
                       t_end=1.0, times=(0.5, 1.0))
    a = solve(cfg, cubic_f)
    b = solve(cfg, cubic_f)
    for s, t in zip(a, b):
        assert np.array_equal(s.u, t.u)


def test_nonfinite_abort(quadratic_f):
    cfg = small_config(InitialData("compact_bump", {"width": 10.0, "amplitude": 1.9}),
                       t_end=30.0, times=(30.0,))
    with pytest.raises(NonFinite) as exc:
        solve(cfg, quadratic_f)
    assert exc.value.t > 0


def test_config_validation(cubic_f):
    with pytest.raises(ConfigError) as e:
        small_config(InitialData("compact_bump", {"width": 4.0, "amplitude": 0.5}),
                     dt=1.0).validate(cubic_f)
    assert e.value.field == "solver.dt"
    with pytest.raises(ConfigError) as e2:
        small_config(InitialData("compact_bump", {"width": 44.0, "amplitude": 0.5}),
                     L=20.0).validate(cubic_f)
    assert e2.value.field == "initial_data"


def test_frozen_dirichlet_mode(cubic_f):
    cfg = small_config(
        InitialData("step_front", {"level_left": -1.0, "level_right": 1.0, "steepness": 0.4}),
        t_end=1.0, times=(1.0,), mode="frozen_dirichlet",
    )
    snaps = solve(cfg, cubic_f)
    assert snaps[-1].u[0] == snaps[0].u[0]
    assert snaps[-1].u[-1] == snaps[0].u[-1]
