import math
from dataclasses import replace

import numpy as np
import pytest

from poisson_lab.errors import (
    BlowupDetected,
    ConfigInvalid,
    GridMismatch,
    GridTooCoarse,
    HistoryDomainMismatch,
)
from poisson_lab.signals import Signal, sample_function
from poisson_lab.systems import (
    IntegratorConfig,
    SystemSpec,
    cocycle_defect,
    dde_cocycle_defect,
    integrate_dde,
    integrate_ode,
    integrate_parabolic,
    order_check,
    quasimonotone_check,
)

SQRT2 = math.sqrt(2.0)


def ode(A, forcing, dim=None):
    dim = dim or len(A)
    kind = "scalar_ode" if dim == 1 else "cooperative_ode"
    return SystemSpec(kind, dim, "linear+trig", {"A": A, "forcing": forcing})


RK45 = IntegratorConfig(method="rk45_adaptive", dt=0.01, rel_tol=1e-8,
                        abs_tol=1e-10, t_end=10.0, record_dt=0.05)


# ---------------------------------------------------------------------------
# test-side oracle: undetermined coefficients, verified by differencing
# ---------------------------------------------------------------------------

def particular(A, forcing):
    """Independent oracle for u' = A u + sum amp sin(wt + phase)."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    groups = {}
    for i, terms in enumerate(forcing):
        for amp, om, ph in terms:
            groups.setdefault((om, ph), np.zeros(n))[i] += amp
    parts = []
    for (om, ph), b in groups.items():
        c = np.linalg.solve(A @ A + om * om * np.eye(n), -A @ b)
        d = -(A @ c + b) / om
        parts.append((om, ph, c, d))

    def fn(ts):
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        out = np.zeros((ts.size, n))
        for om, ph, c, d in parts:
            out += np.outer(np.sin(om * ts + ph), c) + np.outer(np.cos(om * ts + ph), d)
        return out

    # Self-check: the oracle must satisfy the equation to finite-difference
    # accuracy before it is trusted.
    h = 1e-5
    for t in (0.3, 2.7):
        du = (fn(t + h)[0] - fn(t - h)[0]) / (2 * h)
        p = sum(np.sin(om * t + ph) * b for (om, ph), b in groups.items())
        resid = np.abs(du - (A @ fn(t)[0] + p)).max()
        assert resid < 1e-8, "oracle fails its own defining equation"
    return fn


# ---------------------------------------------------------------------------
# ODE integration
# ---------------------------------------------------------------------------

def test_exponential_decay():
    sys = ode([[-1.0]], [[]])
    sol = integrate_ode(sys, [1.0], replace(RK45, t_end=1.0))
    assert sol.at(1.0)[0] == pytest.approx(math.exp(-1.0), abs=1e-6)


def test_zero_rhs_constant():
    sys = ode([[0.0]], [[]])
    sol = integrate_ode(sys, [0.7], replace(RK45, t_end=5.0))
    assert np.abs(sol.samples - 0.7).max() < 1e-12


def test_forced_scalar_matches_oracle():
    forcing = [[[1.0, 1.0, 0.0]]]
    sys = ode([[-1.0]], forcing)
    fn = particular([[-1.0]], forcing)
    # Known closed form: (sin t - cos t) / 2.
    ts = np.array([0.0, 1.0, 2.5])
    assert np.abs(fn(ts) - 0.5 * (np.sin(ts) - np.cos(ts))[:, None]).max() < 1e-12
    sol = integrate_ode(sys, fn(0.0)[0], replace(RK45, t_end=50.0))
    assert np.abs(sol.samples - fn(sol.times())).max() < 1e-6


def test_first_sample_is_initial_state():
    sys = ode([[-1.0]], [[]])
    sol = integrate_ode(sys, [0.3], RK45)
    assert sol.at(0.0)[0] == 0.3


@pytest.mark.parametrize("A,forcing,dim", [
    ([[-1.0]], [[[1.0, 1.0, 0.0], [1.0, SQRT2, 0.0]]], 1),
    ([[-2.0, 1.0], [1.0, -2.0]], [[[1.0, 1.0, 0.0]], [[1.0, 1.0, math.pi / 2]]], 2),
])
def test_adaptive_fixed_cross_check(A, forcing, dim):
    sys = ode(A, forcing, dim)
    u0 = np.full(dim, 0.25)
    a = integrate_ode(sys, u0, replace(RK45, t_end=10.0))
    b = integrate_ode(sys, u0, IntegratorConfig(
        method="rk4_fixed", dt=1e-3, t_end=10.0, record_dt=0.05))
    assert np.abs(a.samples - b.samples).max() < 1e-5


@pytest.mark.parametrize("A,forcing,dim", [
    ([[-1.0]], [[[1.0, 1.0, 0.0], [1.0, SQRT2, 0.0]]], 1),
    ([[-2.0, 1.0], [1.0, -2.0]], [[[1.0, 1.0, 0.0]], [[1.0, 1.0, math.pi / 2]]], 2),
])
def test_cocycle_identity_random_pairs(A, forcing, dim):
    # Restarting at tau with the translated forcing must reproduce the
    # direct integration to t + tau.
    sys = ode(A, forcing, dim)
    rng = np.random.default_rng(7)
    cfg = replace(RK45, rel_tol=1e-10, abs_tol=1e-12)
    u0 = np.full(dim, -0.4)
    for _ in range(20):
        t, tau = rng.uniform(0.5, 8.0, size=2)
        assert cocycle_defect(sys, u0, cfg, t, tau) < 1e-7


def test_blowup_detected():
    sys = ode([[1.0]], [[]])
    cfg = IntegratorConfig(method="rk4_fixed", dt=0.01, t_end=20.0,
                           record_dt=0.1, blowup_bound=1e3)
    with pytest.raises(BlowupDetected):
        integrate_ode(sys, [1.0], cfg)


def test_negative_dt_rejected():
    with pytest.raises(ConfigInvalid):
        IntegratorConfig(dt=-0.1)


# ---------------------------------------------------------------------------
# DDE
# ---------------------------------------------------------------------------

def dde(a_self, a_delay, forcing, r=1.0):
    return SystemSpec("dde_single_delay", 1, "delay-linear",
                      {"A_self": [[a_self]], "A_delay": [[a_delay]],
                       "delay": r, "forcing": forcing})


DDE_CFG = IntegratorConfig(method="rk4_fixed", dt=0.01, t_end=10.0,
                           record_dt=0.05)


def const_history(value, r=1.0, dim=1):
    return Signal(-r, r / 2, np.full((3, dim), float(value)))


def test_dde_zero_history_stays_zero():
    sys = dde(0.0, -1.0, [[]])
    sol = integrate_dde(sys, const_history(0.0), DDE_CFG)
    assert np.abs(sol.samples).max() == 0.0


def test_dde_hand_step():
    # x'(t) = x(t-1) with history 1 gives x = 1 + t on [0, 1].
    sys = dde(0.0, 1.0, [[]])
    sol = integrate_dde(sys, const_history(1.0), replace(DDE_CFG, t_end=1.0))
    ts = sol.times()
    mask = ts >= 0.0
    assert np.abs(sol.samples[mask, 0] - (1.0 + ts[mask])).max() <= 1e-8


def test_dde_equilibrium():
    sys = dde(-1.0, 1.0, [[]])
    sol = integrate_dde(sys, const_history(0.8), DDE_CFG)
    assert np.abs(sol.samples - 0.8).max() < 1e-12


def test_dde_coincides_with_history():
    sys = dde(-2.0, 1.0, [[[1.0, 1.0, 0.0]]])
    sol = integrate_dde(sys, const_history(0.5), DDE_CFG)
    ts = sol.times()
    assert np.abs(sol.samples[ts <= 0.0, 0] - 0.5).max() < 1e-12


def test_dde_history_domain_mismatch():
    sys = dde(-1.0, 1.0, [[]])
    bad = Signal(-2.0, 1.0, np.zeros((3, 1)))
    with pytest.raises(HistoryDomainMismatch):
        integrate_dde(sys, bad, DDE_CFG)


def test_dde_cocycle_identity():
    sys = dde(-2.0, 1.0, [[[1.0, 1.0, 0.0]]])
    for t, tau in [(3.0, 2.0), (1.5, 4.0), (2.5, 2.5), (5.0, 1.0)]:
        defect = dde_cocycle_defect(sys, const_history(0.5), DDE_CFG, t, tau)
        assert defect < 1e-7


# ---------------------------------------------------------------------------
# parabolic
# ---------------------------------------------------------------------------

L = math.pi


def rd(nu=0.1, decay=0.0, amp=0.0):
    return SystemSpec("parabolic_1d", 1, "rd-scalar",
                      {"nu": [nu], "L": L, "decay": [decay],
                       "source_amp": [amp], "omega": 1.0, "phase": 0.0})


def test_constant_is_neumann_equilibrium():
    m = 32
    cfg = IntegratorConfig(method="rk4_fixed", dt=0.5, t_end=2.0,
                           record_dt=0.5, space_points=m)
    field = integrate_parabolic(rd(), np.full((1, m), 1.5), cfg)
    assert np.abs(field.values - 1.5).max() < 1e-12


def test_cosine_mode_decay_rate():
    nu, m = 0.1, 200
    t_star = L * L / (nu * math.pi ** 2)
    cfg = IntegratorConfig(method="rk4_fixed", dt=1.0, t_end=t_star,
                           record_dt=t_star / 10, space_points=m)
    xs = np.linspace(0.0, L, m)
    field = integrate_parabolic(rd(nu=nu), np.cos(math.pi * xs / L)[None, :], cfg)
    amps = field.mode_amplitude(np.cos(math.pi * xs / L))[:, 0]
    target = math.exp(-nu * (math.pi / L) ** 2 * t_star)
    assert abs(amps[-1] / amps[0] - target) / target < 1e-2


def test_spatial_mean_conserved():
    m = 64
    cfg = IntegratorConfig(method="rk4_fixed", dt=0.5, t_end=5.0,
                           record_dt=0.5, space_points=m)
    rng = np.random.default_rng(0)
    u0 = 1.0 + 0.3 * rng.standard_normal(m)
    field = integrate_parabolic(rd(nu=0.2), u0[None, :], cfg)
    means = field.spatial_mean()[:, 0]
    assert np.abs(means - means[0]).max() / abs(means[0]) < 1e-8


def test_grid_too_coarse():
    cfg = IntegratorConfig(method="rk4_fixed", dt=0.1, t_end=1.0,
                           record_dt=0.5, space_points=4)
    with pytest.raises(GridTooCoarse):
        integrate_parabolic(rd(), np.ones((1, 4)), cfg)


def test_parabolic_cocycle_identity():
    from poisson_lab.systems import parabolic_cocycle_defect
    m = 32
    xs = np.linspace(0.0, L, m)
    u0 = (1.0 + 0.4 * np.cos(math.pi * xs / L))[None, :]
    sys = rd(nu=0.1, decay=1.0, amp=1.0)
    cfg = IntegratorConfig(method="rk4_fixed", dt=0.5, t_end=6.0,
                           record_dt=0.5, space_points=m)
    for t, tau in [(2.0, 1.5), (3.0, 2.5), (1.0, 4.0)]:
        assert parabolic_cocycle_defect(sys, u0, cfg, t, tau) < 1e-9


# ---------------------------------------------------------------------------
# monotonicity checks
# ---------------------------------------------------------------------------

def test_quasimonotone_pass_and_fail():
    good = ode([[-1.0, 0.5], [0.5, -1.0]], [[], []], 2)
    res = quasimonotone_check(good, [[-1, 1], [-1, 1]], [0.0, 1.0], h=1e-4)
    assert res.passed
    bad = ode([[-1.0, -0.5], [0.5, -1.0]], [[], []], 2)
    res = quasimonotone_check(bad, [[-1, 1], [-1, 1]], [0.0, 1.0], h=1e-4)
    assert not res.passed
    t, u, i, j = res.witness
    assert (i, j) == (0, 1)


def test_quasimonotone_scalar_vacuous():
    res = quasimonotone_check(ode([[-3.0]], [[]]), [[-1, 1]], [0.0], h=1e-4)
    assert res.passed


def test_order_check():
    zeros = sample_function(lambda t: 0.0 * np.asarray(t), 0.0, 10.0, 0.01)
    ones = sample_function(lambda t: 0.0 * np.asarray(t) + 1.0, 0.0, 10.0, 0.01)
    sine = sample_function(np.sin, 0.0, 10.0, 0.01)
    assert order_check(zeros, zeros, 1e-9).ordered
    assert order_check(zeros, ones, 1e-9).ordered
    res = order_check(sine, zeros, 1e-3)
    assert not res.ordered
    # First sample with sin t above the tolerance.
    assert res.time == pytest.approx(0.01, abs=1e-9)
    with pytest.raises(GridMismatch):
        order_check(zeros, sample_function(np.sin, 0.0, 10.0, 0.02), 1e-9)
