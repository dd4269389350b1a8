"""Equation registry and integrators producing Signals.

A :class:`SystemSpec` names one equation family (scalar or cooperative ODE,
single-delay DDE, 1-D parabolic system) plus its time-dependent forcing, and
the integrators here realize the solution operator: state at time t as a
function of the start state and the forcing phase.  The forcing family is
represented lazily by the shift parameter ``base_shift`` on closed-form
forcings, which keeps time translates exact.

Integration of one trajectory is strictly sequential; distinct trajectories
(ordered-pair batteries, probe sweeps) are independent and the batch helpers
run them side by side in one vectorized pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    BlowupDetected,
    ConfigInvalid,
    DimensionMismatch,
    GridMismatch,
    GridTooCoarse,
    HistoryDomainMismatch,
    StepUnderflow,
    UnknownRegistryKey,
)
from .signals import Signal

KINDS = ("scalar_ode", "cooperative_ode", "dde_single_delay", "parabolic_1d")

_DEFAULT_BLOWUP = 1e9


@dataclass(frozen=True)
class SystemSpec:
    """Declarative description of one equation family.

    ``rhs`` is a registry key; ``params`` its real parameters (matrices as
    nested lists, forcing terms as (amplitude, frequency, phase) triples).
    ``base_shift`` selects the time translate of the forcing, i.e. which
    member of the forcing's hull drives this trajectory.
    """

    kind: str
    dim: int
    rhs: str
    params: Mapping = field(default_factory=dict)
    base_shift: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigInvalid(f"unknown system kind {self.kind!r}")
        if self.dim < 1:
            raise ConfigInvalid("dim must be >= 1")
        object.__setattr__(self, "params", dict(self.params))

    def shifted(self, tau: float) -> "SystemSpec":
        """The same system driven by the tau-translate of its forcing."""
        return replace(self, base_shift=self.base_shift + tau)


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk45_adaptive"
    dt: float = 1e-2
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    t_end: float = 100.0
    record_dt: float = 0.05
    space_points: int = 0
    blowup_bound: float | None = None

    def __post_init__(self):
        if self.method not in ("rk4_fixed", "rk45_adaptive"):
            raise ConfigInvalid(f"unknown method {self.method!r}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigInvalid("dt must be positive")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ConfigInvalid("tolerances must be positive")
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise ConfigInvalid("t_end must be positive")
        if self.record_dt < self.dt - 1e-15:
            raise ConfigInvalid("record_dt must be >= dt")

    @property
    def bound(self) -> float:
        return self.blowup_bound if self.blowup_bound is not None else _DEFAULT_BLOWUP


# ---------------------------------------------------------------------------
# right-hand-side registry
# ---------------------------------------------------------------------------

def _fold_terms(components: Sequence[Sequence], dim: int, base_shift: float):
    """Stack per-component (amp, omega, phase) triples into matrix form.

    The base shift is folded into the phases, so the translate of the
    forcing is exact.
    """
    rows, amps, omegas, phases = [], [], [], []
    for i, terms in enumerate(components):
        for amp, omega, phase in terms:
            rows.append(i)
            amps.append(float(amp))
            omegas.append(float(omega))
            phases.append(float(phase) + float(omega) * base_shift)
    k = len(amps)
    proj = np.zeros((dim, k))
    for col, (i, amp) in enumerate(zip(rows, amps)):
        proj[i, col] = amp
    return proj, np.asarray(omegas), np.asarray(phases)


class LinearTrigRhs:
    """u' = A u + p(t) with trigonometric forcing p."""

    def __init__(self, A, components, offset, base_shift):
        self.A = np.asarray(A, dtype=float)
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise ConfigInvalid("A must be square")
        self.dim = n
        self.offset = np.asarray(offset, dtype=float)
        self.proj, self.omegas, self.phases = _fold_terms(components, n, base_shift)
        self._components = components
        self._base_shift = base_shift

    def forcing(self, t: float) -> np.ndarray:
        if self.omegas.size == 0:
            return self.offset.copy()
        return self.offset + self.proj @ np.sin(self.omegas * t + self.phases)

    def __call__(self, t: float, u: np.ndarray) -> np.ndarray:
        p = self.forcing(t)
        if u.ndim == 2:
            return self.A @ u + p[:, None]
        return self.A @ u + p

    def scalar_fn(self) -> Callable[[float, float], float] | None:
        """Plain-float right-hand side for the 1-D fast path."""
        if self.dim != 1:
            return None
        a = float(self.A[0, 0])
        c = float(self.offset[0])
        terms = [
            (float(self.proj[0, j]), float(self.omegas[j]), float(self.phases[j]))
            for j in range(self.omegas.size)
            if self.proj[0, j] != 0.0
        ]
        sin = math.sin
        if not terms:
            return lambda t, x: a * x + c
        if len(terms) == 1:
            (a1, w1, p1), = terms
            return lambda t, x: a * x + c + a1 * sin(w1 * t + p1)
        if len(terms) == 2:
            (a1, w1, p1), (a2, w2, p2) = terms
            return lambda t, x: a * x + c + a1 * sin(w1 * t + p1) + a2 * sin(w2 * t + p2)
        tup = tuple(terms)

        def fn(t, x):
            acc = a * x + c
            for amp, om, ph in tup:
                acc += amp * sin(om * t + ph)
            return acc

        return fn


class DelayLinearRhs:
    """u'(t) = A_self u(t) + A_delay u(t - r) + p(t)."""

    def __init__(self, A_self, A_delay, delay, components, base_shift):
        self.A_self = np.asarray(A_self, dtype=float)
        self.A_delay = np.asarray(A_delay, dtype=float)
        self.dim = self.A_self.shape[0]
        if self.A_self.shape != self.A_delay.shape or self.A_self.shape != (self.dim, self.dim):
            raise ConfigInvalid("A_self and A_delay must be square and equal-sized")
        if not delay > 0:
            raise ConfigInvalid("delay must be positive")
        self.r = float(delay)
        self.proj, self.omegas, self.phases = _fold_terms(components, self.dim, base_shift)

    def forcing(self, t: float) -> np.ndarray:
        if self.omegas.size == 0:
            return np.zeros(self.dim)
        return self.proj @ np.sin(self.omegas * t + self.phases)

    def __call__(self, t, u_now, u_past):
        p = self.forcing(t)
        if u_now.ndim == 2:
            return self.A_self @ u_now + self.A_delay @ u_past + p[:, None]
        return self.A_self @ u_now + self.A_delay @ u_past + p


class ReactionDiffusion:
    """w_t = nu w_xx + f(t, x, w) on [0, L] with Neumann walls.

    The registered reaction is affine in the state: -decay * w plus a
    separable space-time source amp_profile(x) * sin(omega t + phase).
    """

    def __init__(self, nu, L, decay, source_amp, omega, phase, base_shift,
                 profile="one-plus-cos"):
        self.nu = np.atleast_1d(np.asarray(nu, dtype=float))
        self.n_species = self.nu.size
        if np.any(self.nu <= 0):
            raise ConfigInvalid("diffusivities must be positive")
        if not L > 0:
            raise ConfigInvalid("domain length must be positive")
        self.L = float(L)
        self.decay = np.atleast_1d(np.asarray(decay, dtype=float))
        self.source_amp = np.atleast_1d(np.asarray(source_amp, dtype=float))
        if self.decay.size != self.n_species or self.source_amp.size != self.n_species:
            raise ConfigInvalid("decay/source_amp must have one entry per species")
        self.omega = float(omega)
        self.phase = float(phase) + self.omega * base_shift
        if profile not in ("one-plus-cos", "flat"):
            raise ConfigInvalid(f"unknown source profile {profile!r}")
        self.profile_kind = profile

    def profile(self, xs: np.ndarray) -> np.ndarray:
        if self.profile_kind == "flat":
            return np.ones_like(xs)
        return 1.0 + np.cos(np.pi * xs / self.L)

    def reaction(self, t, xs, W):
        """Reaction term; W has shape (n, m) or (n, m, batch)."""
        src = self.source_amp[:, None] * self.profile(xs)[None, :]
        amp_t = math.sin(self.omega * t + self.phase)
        if W.ndim == 3:
            return -self.decay[:, None, None] * W + (src * amp_t)[:, :, None]
        return -self.decay[:, None] * W + src * amp_t

    def species_jacobian_offdiag(self, t, x, w, i, j, h):
        """Central-difference d f_i / d w_j at one space-state sample."""
        wp = np.array(w, dtype=float)
        wm = np.array(w, dtype=float)
        wp[j] += h
        wm[j] -= h
        fp = self._pointwise(t, x, wp)
        fm = self._pointwise(t, x, wm)
        return (fp[i] - fm[i]) / (2 * h)

    def _pointwise(self, t, x, w):
        prof = 1.0 if self.profile_kind == "flat" else 1.0 + math.cos(math.pi * x / self.L)
        return -self.decay * w + self.source_amp * prof * math.sin(self.omega * t + self.phase)


_ODE_BUILDERS: dict[str, Callable[[SystemSpec], LinearTrigRhs]] = {}
_DDE_BUILDERS: dict[str, Callable[[SystemSpec], DelayLinearRhs]] = {}
_PDE_BUILDERS: dict[str, Callable[[SystemSpec], ReactionDiffusion]] = {}


def _build_linear_trig(spec: SystemSpec) -> LinearTrigRhs:
    p = spec.params
    A = p.get("A")
    if A is None:
        raise ConfigInvalid("linear+trig requires a coupling matrix 'A'")
    components = p.get("forcing", [[] for _ in range(spec.dim)])
    offset = p.get("offset", [0.0] * spec.dim)
    rhs = LinearTrigRhs(A, components, offset, spec.base_shift)
    if rhs.dim != spec.dim:
        raise ConfigInvalid("matrix size does not match spec.dim")
    return rhs


def _build_delay_linear(spec: SystemSpec) -> DelayLinearRhs:
    p = spec.params
    if "delay" not in p:
        raise ConfigInvalid("delay-linear requires 'delay' > 0")
    return DelayLinearRhs(
        p.get("A_self"), p.get("A_delay"), p["delay"],
        p.get("forcing", [[] for _ in range(spec.dim)]), spec.base_shift,
    )


def _build_rd_scalar(spec: SystemSpec) -> ReactionDiffusion:
    p = spec.params
    return ReactionDiffusion(
        p.get("nu", [1.0]), p.get("L", 1.0),
        p.get("decay", [0.0] * spec.dim),
        p.get("source_amp", [0.0] * spec.dim),
        p.get("omega", 1.0), p.get("phase", 0.0), spec.base_shift,
        p.get("profile", "one-plus-cos"),
    )


_ODE_BUILDERS["linear+trig"] = _build_linear_trig
_DDE_BUILDERS["delay-linear"] = _build_delay_linear
_PDE_BUILDERS["rd-scalar"] = _build_rd_scalar


def build_ode_rhs(spec: SystemSpec) -> LinearTrigRhs:
    if spec.kind not in ("scalar_ode", "cooperative_ode"):
        raise ConfigInvalid(f"{spec.kind} is not an ODE kind")
    try:
        builder = _ODE_BUILDERS[spec.rhs]
    except KeyError:
        raise UnknownRegistryKey(f"no ODE right-hand side {spec.rhs!r}") from None
    return builder(spec)


def build_dde_rhs(spec: SystemSpec) -> DelayLinearRhs:
    if spec.kind != "dde_single_delay":
        raise ConfigInvalid(f"{spec.kind} is not a DDE kind")
    try:
        builder = _DDE_BUILDERS[spec.rhs]
    except KeyError:
        raise UnknownRegistryKey(f"no DDE right-hand side {spec.rhs!r}") from None
    return builder(spec)


def build_reaction(spec: SystemSpec) -> ReactionDiffusion:
    if spec.kind != "parabolic_1d":
        raise ConfigInvalid(f"{spec.kind} is not a parabolic kind")
    try:
        builder = _PDE_BUILDERS[spec.rhs]
    except KeyError:
        raise UnknownRegistryKey(f"no reaction {spec.rhs!r}") from None
    return builder(spec)


# ---------------------------------------------------------------------------
# forcing synthesis (closed-form base signals)
# ---------------------------------------------------------------------------

_SQRT2 = math.sqrt(2.0)


def _levitan_h(ts: np.ndarray) -> np.ndarray:
    return 2.0 + np.cos(ts) + np.cos(_SQRT2 * ts)


_FORCINGS: dict[str, Callable] = {
    "levitan-base": _levitan_h,
    "levitan-phi": lambda ts: 1.0 / _levitan_h(ts),
    "levitan-psi": lambda ts: np.sin(1.0 / _levitan_h(ts)),
    "ramp": lambda ts: np.array(ts, dtype=float),
}


def forcing_values(key: str, ts, *, shift: float = 0.0,
                   components: Sequence[Sequence] | None = None,
                   offset: Sequence[float] | None = None) -> np.ndarray:
    """Evaluate a closed-form forcing (or its exact time translate).

    ``trig-sum`` takes explicit (amp, omega, phase) triples per component;
    the named entries are fixed function families.
    """
    ts = np.asarray(ts, dtype=float) + shift
    if key == "trig-sum":
        if components is None:
            raise ConfigInvalid("trig-sum needs forcing components")
        dim = len(components)
        proj, omegas, phases = _fold_terms(components, dim, 0.0)
        vals = proj @ np.sin(np.outer(omegas, ts) + phases[:, None])
        if offset is not None:
            vals = vals + np.asarray(offset, dtype=float)[:, None]
        return vals.T
    try:
        fn = _FORCINGS[key]
    except KeyError:
        raise UnknownRegistryKey(f"no forcing {key!r}") from None
    return fn(ts)[:, None]


def forcing_signal(key: str, t0: float, t_end: float, dt: float, *,
                   shift: float = 0.0, components=None, offset=None,
                   interp: str = "cubic") -> Signal:
    n = int(round((t_end - t0) / dt))
    ts = t0 + dt * np.arange(n + 1)
    return Signal(t0, dt, forcing_values(key, ts, shift=shift,
                                         components=components, offset=offset),
                  interp)


# ---------------------------------------------------------------------------
# fixed-step RK4 cores
# ---------------------------------------------------------------------------

def _check_state(y: np.ndarray, bound: float, t: float) -> None:
    m = np.max(np.abs(y))
    if not np.isfinite(m) or m > bound:
        raise BlowupDetected(f"state norm {m:g} exceeds bound {bound:g} at t={t:g}")


def _rk4_span(rhs, t0: float, y: np.ndarray, t1: float, h_target: float):
    """Advance y across [t0, t1] with uniform RK4 substeps of size ~h_target."""
    span = t1 - t0
    if span <= 0:
        return y
    nsub = max(1, int(math.ceil(span / h_target - 1e-12)))
    h = span / nsub
    for i in range(nsub):
        t = t0 + i * h
        k1 = rhs(t, y)
        th = t + 0.5 * h
        k2 = rhs(th, y + (0.5 * h) * k1)
        k3 = rhs(th, y + (0.5 * h) * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    return y


def _rk4_scalar_span(fn, t0: float, x: float, t1: float, h_target: float) -> float:
    span = t1 - t0
    if span <= 0:
        return x
    nsub = max(1, int(math.ceil(span / h_target - 1e-12)))
    h = span / nsub
    h2 = 0.5 * h
    h6 = h / 6.0
    for i in range(nsub):
        t = t0 + i * h
        k1 = fn(t, x)
        th = t + h2
        k2 = fn(th, x + h2 * k1)
        k3 = fn(th, x + h2 * k2)
        k4 = fn(t + h, x + h * k3)
        x += h6 * (k1 + 2.0 * (k2 + k3) + k4)
    return x


# ---------------------------------------------------------------------------
# adaptive Dormand-Prince 5(4)
# ---------------------------------------------------------------------------

_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


class _Dopri5:
    """Embedded 5(4) pair with FSAL and max-norm step control."""

    def __init__(self, rhs, t0, y0, cfg: IntegratorConfig):
        self.rhs = rhs
        self.t = float(t0)
        self.y = np.array(y0, dtype=float)
        self.rtol = cfg.rel_tol
        self.atol = cfg.abs_tol
        self.h = cfg.dt
        self.bound = cfg.bound
        self.k1 = rhs(self.t, self.y)

    def advance_to(self, t_target: float) -> np.ndarray:
        eps_t = 1e-12 * max(1.0, abs(t_target))
        while self.t < t_target - eps_t:
            h = min(self.h, t_target - self.t)
            while True:
                if h < 1e-14 * max(1.0, abs(self.t)):
                    raise StepUnderflow(f"step {h:g} underflow at t={self.t:g}")
                ks = [self.k1]
                yi = self.y
                for i in range(1, 7):
                    acc = self.y.copy()
                    for a, k in zip(_DP_A[i], ks):
                        if a != 0.0:
                            acc += (h * a) * k
                    yi = acc
                    ks.append(self.rhs(self.t + _DP_C[i] * h, yi))
                y5 = yi  # the 7th stage is evaluated at the 5th-order solution
                err_vec = np.zeros_like(self.y)
                for e, k in zip(_DP_E, ks):
                    if e != 0.0:
                        err_vec += e * k
                err_vec *= h
                scale = self.atol + self.rtol * np.maximum(np.abs(self.y), np.abs(y5))
                err = float(np.max(np.abs(err_vec) / scale))
                if err <= 1.0:
                    self.t += h
                    self.y = y5
                    self.k1 = ks[6]
                    _check_state(self.y, self.bound, self.t)
                    grow = 0.9 * (max(err, 1e-16)) ** -0.2
                    self.h = h * min(5.0, max(0.2, grow))
                    break
                h *= min(1.0, max(0.2, 0.9 * err ** -0.2))
        return self.y


# ---------------------------------------------------------------------------
# ODE drivers
# ---------------------------------------------------------------------------

def _record_times(cfg: IntegratorConfig) -> np.ndarray:
    n = int(math.floor(cfg.t_end / cfg.record_dt + 1e-9))
    return cfg.record_dt * np.arange(n + 1)


def _coerce_state(u0, dim) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u0, dtype=float))
    if u.shape != (dim,):
        raise DimensionMismatch(f"initial state must have shape ({dim},)")
    return u


def integrate_ode(sys: SystemSpec, u0, cfg: IntegratorConfig) -> Signal:
    """Solve the ODE from u0 at t=0 and sample the result on the record grid."""
    rhs = build_ode_rhs(sys)
    u = _coerce_state(u0, sys.dim)
    ts = _record_times(cfg)
    out = np.empty((ts.size, sys.dim))
    out[0] = u
    if cfg.method == "rk4_fixed":
        fn = rhs.scalar_fn()
        if fn is not None:
            x = float(u[0])
            for i in range(1, ts.size):
                x = _rk4_scalar_span(fn, ts[i - 1], x, ts[i], cfg.dt)
                if not (abs(x) <= cfg.bound):
                    raise BlowupDetected(f"|x|={abs(x):g} at t={ts[i]:g}")
                out[i, 0] = x
        else:
            y = u
            for i in range(1, ts.size):
                y = _rk4_span(rhs, ts[i - 1], y, ts[i], cfg.dt)
                _check_state(y, cfg.bound, ts[i])
                out[i] = y
    else:
        stepper = _Dopri5(rhs, 0.0, u, cfg)
        for i in range(1, ts.size):
            out[i] = stepper.advance_to(ts[i])
    return Signal(0.0, cfg.record_dt, out, "cubic")


def integrate_ode_snapshots(sys: SystemSpec, u0, cfg: IntegratorConfig,
                            snapshot_times) -> np.ndarray:
    """States at the given times only (no dense recording)."""
    rhs = build_ode_rhs(sys)
    u = _coerce_state(u0, sys.dim)
    times = np.asarray(snapshot_times, dtype=float)
    if times.size and (np.any(np.diff(times) <= 0) or times[0] < 0):
        raise ConfigInvalid("snapshot times must be positive and increasing")
    out = np.empty((times.size, sys.dim))
    if cfg.method == "rk4_fixed":
        fn = rhs.scalar_fn()
        if fn is not None:
            x = float(u[0])
            t_prev = 0.0
            for i, t in enumerate(times):
                x = _rk4_scalar_span(fn, t_prev, x, t, cfg.dt)
                if not (abs(x) <= cfg.bound):
                    raise BlowupDetected(f"|x|={abs(x):g} at t={t:g}")
                out[i, 0] = x
                t_prev = t
        else:
            y = u
            t_prev = 0.0
            for i, t in enumerate(times):
                y = _rk4_span(rhs, t_prev, y, t, cfg.dt)
                _check_state(y, cfg.bound, t)
                out[i] = y
                t_prev = t
    else:
        stepper = _Dopri5(rhs, 0.0, u, cfg)
        for i, t in enumerate(times):
            out[i] = stepper.advance_to(t)
    return out


def integrate_ode_batch(sys: SystemSpec, U0, cfg: IntegratorConfig):
    """Fixed-step RK4 over a batch of starts; U0 has shape (dim, batch).

    Returns (times, Y) with Y of shape (n_rec, dim, batch).  Used by the
    ordered-pair batteries, which are embarrassingly parallel.
    """
    rhs = build_ode_rhs(sys)
    U = np.asarray(U0, dtype=float)
    if U.ndim != 2 or U.shape[0] != sys.dim:
        raise DimensionMismatch(f"batch starts must have shape ({sys.dim}, batch)")
    ts = _record_times(cfg)
    Y = np.empty((ts.size,) + U.shape)
    Y[0] = U
    y = U
    for i in range(1, ts.size):
        y = _rk4_span(rhs, ts[i - 1], y, ts[i], cfg.dt)
        _check_state(y, cfg.bound, ts[i])
        Y[i] = y
    return ts, Y


# ---------------------------------------------------------------------------
# DDE method of steps
# ---------------------------------------------------------------------------

# Cubic Lagrange weights at the half node for stencil offsets 0.5, 1.5, 2.5.
_HALF_W = {
    1: (-1 / 16, 9 / 16, 9 / 16, -1 / 16),     # nodes j-1 .. j+2, x = 1.5
    0: (5 / 16, 15 / 16, -5 / 16, 1 / 16),     # nodes j .. j+3,   x = 0.5
    2: (1 / 16, -5 / 16, 15 / 16, 5 / 16),     # nodes j-2 .. j+1, x = 2.5
}


def _half_value(U: np.ndarray, j: int, n_sub: int) -> np.ndarray:
    """Cubic interpolation of the solution buffer at node index j + 1/2.

    The stencil never crosses a breakpoint (a multiple of the delay, i.e.
    of n_sub nodes), where the solution loses smoothness.
    """
    if n_sub < 3:
        return 0.5 * (U[j] + U[j + 1])
    b = (j // n_sub) * n_sub
    s = min(max(j - 1, b), b + n_sub - 3)
    w = _HALF_W[j - s]
    return w[0] * U[s] + w[1] * U[s + 1] + w[2] * U[s + 2] + w[3] * U[s + 3]


def _validate_history(history: Signal, r: float, dim: int) -> None:
    tol = 1e-9 * max(1.0, r)
    if abs(history.t0 + r) > tol or abs(history.t_end) > tol:
        raise HistoryDomainMismatch(
            f"history must cover exactly [-{r:g}, 0], got "
            f"[{history.t0:g}, {history.t_end:g}]"
        )
    if history.dim != dim:
        raise DimensionMismatch("history dimension does not match system")


def integrate_dde(sys: SystemSpec, history: Signal, cfg: IntegratorConfig) -> Signal:
    """Method of steps for a single-delay system.

    The step is snapped to divide the delay so breakpoints stay on-grid, and
    delayed values are read by cubic interpolation of the computed solution.
    The output coincides with the history on [-r, 0].
    """
    ts, U, k_rec = _dde_core(sys, history.values, history, cfg, batch=None)
    return Signal(-build_dde_rhs(sys).r, k_rec, U, "cubic")


def integrate_dde_batch(sys: SystemSpec, history_states: np.ndarray,
                        cfg: IntegratorConfig):
    """Constant-history batch variant; history_states has shape (dim, batch)."""
    H = np.asarray(history_states, dtype=float)
    if H.ndim != 2 or H.shape[0] != sys.dim:
        raise DimensionMismatch(f"history batch must have shape ({sys.dim}, batch)")

    def hist_vals(times):
        return np.broadcast_to(H, (len(times),) + H.shape).copy()

    ts, U, k_rec = _dde_core(sys, hist_vals, None, cfg, batch=H.shape[1])
    return -build_dde_rhs(sys).r + k_rec * np.arange(U.shape[0]), U


def _dde_core(sys, hist_vals, history, cfg, batch):
    rhs = build_dde_rhs(sys)
    r = rhs.r
    if history is not None:
        _validate_history(history, r, sys.dim)
    n_sub = max(1, int(math.ceil(r / cfg.dt - 1e-12)))
    h = r / n_sub
    k_rec = max(1, int(round(cfg.record_dt / h)))
    n_fwd = int(math.ceil(cfg.t_end / h - 1e-9))
    # Extend so the last record node is at or beyond t_end.
    n_fwd = int(math.ceil(n_fwd / k_rec) * k_rec)
    total = n_sub + n_fwd
    shape = (total + 1, sys.dim) if batch is None else (total + 1, sys.dim, batch)
    U = np.empty(shape)
    grid_hist = -r + h * np.arange(n_sub + 1)
    U[: n_sub + 1] = hist_vals(grid_hist)
    bound = cfg.bound
    for i in range(n_sub, total):
        t = -r + i * h
        y = U[i]
        jd = i - n_sub
        yd0 = U[jd]
        yd1 = U[jd + 1]
        ydh = _half_value(U, jd, n_sub)
        k1 = rhs(t, y, yd0)
        th = t + 0.5 * h
        k2 = rhs(th, y + (0.5 * h) * k1, ydh)
        k3 = rhs(th, y + (0.5 * h) * k2, ydh)
        k4 = rhs(t + h, y + h * k3, yd1)
        U[i + 1] = y + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        if (i + 1) % k_rec == 0:
            _check_state(U[i + 1], bound, t + h)
    return None, U[::k_rec].copy(), k_rec * h


# ---------------------------------------------------------------------------
# parabolic method of lines
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Field:
    """Space-time field: one grid function per recorded time."""

    times: np.ndarray   # (T,)
    xs: np.ndarray      # (m,)
    values: np.ndarray  # (T, n_species, m)

    def to_signal(self) -> Signal:
        """Flatten species x space into one Signal (dim = n * m)."""
        T = self.values.shape[0]
        dt = float(self.times[1] - self.times[0]) if T > 1 else 1.0
        return Signal(float(self.times[0]), dt, self.values.reshape(T, -1), "cubic")

    def spatial_mean(self) -> np.ndarray:
        """Trapezoid-weight spatial mean per species; shape (T, n)."""
        w = _trapezoid_weights(self.xs.size)
        return (self.values * w).sum(axis=2) / w.sum()

    def mode_amplitude(self, profile: np.ndarray) -> np.ndarray:
        """Weighted projection onto a spatial profile; shape (T, n)."""
        w = _trapezoid_weights(self.xs.size)
        denom = float((w * profile * profile).sum())
        return (self.values * (w * profile)).sum(axis=2) / denom


def _trapezoid_weights(m: int) -> np.ndarray:
    w = np.ones(m)
    w[0] = w[-1] = 0.5
    return w


def _neumann_laplacian(W: np.ndarray, dx: float) -> np.ndarray:
    """Second-order Laplacian with mirrored ghost nodes (u[-1] = u[1]).

    The mirrored closure conserves the trapezoid-weight spatial mean exactly
    when the reaction vanishes.  W has shape (n, m) or (n, m, batch).
    """
    out = np.empty_like(W)
    out[:, 1:-1] = W[:, 2:] - 2.0 * W[:, 1:-1] + W[:, :-2]
    out[:, 0] = 2.0 * (W[:, 1] - W[:, 0])
    out[:, -1] = 2.0 * (W[:, -2] - W[:, -1])
    out /= dx * dx
    return out


def integrate_parabolic(sys: SystemSpec, u0, cfg: IntegratorConfig) -> Field:
    """Method of lines on [0, L]: central Laplacian, ghost-node Neumann walls.

    The step is capped at the explicit diffusion stability limit and snapped
    to divide record_dt.
    """
    ts, vals, xs = _parabolic_core(sys, np.asarray(u0, dtype=float), cfg, batch=False)
    return Field(ts, xs, vals)


def integrate_parabolic_batch(sys: SystemSpec, U0, cfg: IntegratorConfig):
    """Batch variant; U0 has shape (n_species, m, batch)."""
    return _parabolic_core(sys, np.asarray(U0, dtype=float), cfg, batch=True)


def _parabolic_core(sys, W0, cfg, batch):
    reaction = build_reaction(sys)
    n = reaction.n_species
    want = 3 if batch else 2
    if W0.ndim == want - 1 and n == 1:
        W0 = W0[None]
    if W0.ndim != want or W0.shape[0] != n:
        raise DimensionMismatch(f"initial field must have shape (n={n}, m{', b' if batch else ''})")
    m = W0.shape[1]
    if cfg.space_points and cfg.space_points != m:
        raise ConfigInvalid("space_points does not match the initial field")
    if m < 8:
        raise GridTooCoarse(f"space_points={m} < 8")
    L = reaction.L
    dx = L / (m - 1)
    xs = dx * np.arange(m)
    nu = reaction.nu
    h_stab = 0.35 * dx * dx / float(nu.max())
    h_target = min(cfg.dt, h_stab)
    nsub = max(1, int(math.ceil(cfg.record_dt / h_target - 1e-12)))
    h = cfg.record_dt / nsub
    n_rec = int(math.floor(cfg.t_end / cfg.record_dt + 1e-9))
    rec_ts = cfg.record_dt * np.arange(n_rec + 1)
    out = np.empty((n_rec + 1,) + W0.shape)
    out[0] = W0
    W = W0.copy()
    nu_col = nu[:, None, None] if batch else nu[:, None]

    def rhs(t, F):
        return nu_col * _neumann_laplacian(F, dx) + reaction.reaction(t, xs, F)

    t = 0.0
    for i in range(1, n_rec + 1):
        for _ in range(nsub):
            k1 = rhs(t, W)
            th = t + 0.5 * h
            k2 = rhs(th, W + (0.5 * h) * k1)
            k3 = rhs(th, W + (0.5 * h) * k2)
            k4 = rhs(t + h, W + h * k3)
            W = W + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
            t += h
        t = rec_ts[i]
        _check_state(W, cfg.bound, t)
        out[i] = W
    return rec_ts, out, xs


# ---------------------------------------------------------------------------
# monotonicity checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuasimonotoneResult:
    passed: bool
    witness: tuple | None = None  # (t, state, i, j)

    def __bool__(self) -> bool:
        return self.passed


@dataclass(frozen=True)
class OrderResult:
    ordered: bool
    time: float | None = None
    component: int | None = None
    max_violation: float = 0.0

    def __bool__(self) -> bool:
        return self.ordered


def _box_samples(box: np.ndarray, rng: np.random.Generator, extra: int = 8):
    """3-level lattice plus a few seeded uniform draws inside the box."""
    dim = box.shape[0]
    levels = [np.array([lo, 0.5 * (lo + hi), hi]) for lo, hi in box]
    if dim <= 3:
        mesh = np.meshgrid(*levels, indexing="ij")
        lattice = np.stack([g.ravel() for g in mesh], axis=1)
    else:
        lattice = np.stack([np.array([lo, hi]) for lo, hi in box], axis=1).T
    draws = rng.uniform(box[:, 0], box[:, 1], size=(extra, dim))
    return np.vstack([lattice, draws])


def quasimonotone_check(sys: SystemSpec, box, t_probe, h: float,
                        tol_scale: float = 1e-7) -> QuasimonotoneResult:
    """Finite-sample cooperativity test of the right-hand side.

    ODE and parabolic kinds check off-diagonal partials >= -tol by central
    differences over a lattice in box x t_probe; the DDE kind checks the
    componentwise inequality on sampled ordered pairs that agree in the
    probed component at the current time.
    """
    box = np.asarray(box, dtype=float)
    if box.ndim != 2 or box.shape[1] != 2 or box.shape[0] == 0:
        raise ConfigInvalid("box must be an array of (lo, hi) rows")
    if not h > 0:
        raise ConfigInvalid("finite-difference step h must be > 0")
    rng = np.random.default_rng(2025)
    if sys.kind in ("scalar_ode", "cooperative_ode"):
        return _quasimonotone_ode(sys, box, t_probe, h, tol_scale, rng)
    if sys.kind == "dde_single_delay":
        return _quasimonotone_dde(sys, box, t_probe, tol_scale, rng)
    return _quasimonotone_parabolic(sys, box, t_probe, h, tol_scale, rng)


def _quasimonotone_ode(sys, box, t_probe, h, tol_scale, rng):
    rhs = build_ode_rhs(sys)
    n = sys.dim
    if n == 1:
        return QuasimonotoneResult(True)  # i != j is vacuous
    pts = _box_samples(box, rng)
    scale = 1.0
    for t in t_probe:
        for u in pts:
            scale = max(scale, float(np.max(np.abs(rhs(float(t), u)))))
    tol = tol_scale * scale
    for t in t_probe:
        t = float(t)
        for u in pts:
            for j in range(n):
                up = u.copy(); up[j] += h
                um = u.copy(); um[j] -= h
                dcol = (rhs(t, up) - rhs(t, um)) / (2 * h)
                for i in range(n):
                    if i != j and dcol[i] < -tol:
                        return QuasimonotoneResult(False, (t, u.copy(), i, j))
    return QuasimonotoneResult(True)


def _quasimonotone_dde(sys, box, t_probe, tol_scale, rng):
    rhs = build_dde_rhs(sys)
    n = sys.dim
    pts = _box_samples(box, rng)
    span = box[:, 1] - box[:, 0]
    scale = 1.0
    for t in t_probe:
        for u in pts:
            scale = max(scale, float(np.max(np.abs(rhs(float(t), u, u)))))
    tol = tol_scale * scale
    for t in t_probe:
        t = float(t)
        for u_now in pts:
            for _ in range(4):
                d_now = rng.uniform(0.0, 0.5, size=n) * span
                d_past = rng.uniform(0.0, 0.5, size=n) * span
                u_past = u_now  # segment endpoints sampled jointly
                v_past = u_past + d_past
                for i in range(n):
                    v_now = u_now + d_now
                    v_now[i] = u_now[i]
                    fi_u = rhs(t, u_now, u_past)[i]
                    fi_v = rhs(t, v_now, v_past)[i]
                    if fi_u > fi_v + tol:
                        return QuasimonotoneResult(False, (t, u_now.copy(), i, i))
    return QuasimonotoneResult(True)


def _quasimonotone_parabolic(sys, box, t_probe, h, tol_scale, rng):
    reaction = build_reaction(sys)
    n = reaction.n_species
    if n == 1:
        return QuasimonotoneResult(True)
    pts = _box_samples(box, rng)
    xs = np.linspace(0.0, reaction.L, 5)
    tol = tol_scale
    for t in t_probe:
        t = float(t)
        for x in xs:
            for w in pts:
                for i in range(n):
                    for j in range(n):
                        if i == j:
                            continue
                        d = reaction.species_jacobian_offdiag(t, float(x), w, i, j, h)
                        if d < -tol:
                            return QuasimonotoneResult(False, (t, w.copy(), i, j))
    return QuasimonotoneResult(True)


def order_check(u: Signal, v: Signal, tol: float) -> OrderResult:
    """Componentwise u(t) <= v(t) + tol at every shared sample."""
    if u.dim != v.dim:
        raise DimensionMismatch(f"dims differ: {u.dim} vs {v.dim}")
    if (len(u) != len(v) or abs(u.t0 - v.t0) > 1e-9 * max(1.0, abs(u.t0))
            or abs(u.dt - v.dt) > 1e-12 * u.dt):
        raise GridMismatch("order_check requires identical sampling grids")
    gap = u.samples - v.samples
    worst = float(gap.max())
    if worst <= tol:
        return OrderResult(True, max_violation=max(worst, 0.0))
    bad = gap > tol
    row = int(np.nonzero(bad.any(axis=1))[0][0])
    comp = int(np.nonzero(bad[row])[0][0])
    return OrderResult(False, float(u.t0 + row * u.dt), comp, worst)


# ---------------------------------------------------------------------------
# cocycle identity probe
# ---------------------------------------------------------------------------

def cocycle_defect(sys: SystemSpec, u0, cfg: IntegratorConfig,
                   t: float, tau: float) -> float:
    """|phi(t+tau, u, g) - phi(t, phi(tau, u, g), g^tau)| in the sup norm.

    Zero (up to integration error) exactly when the solver realizes the
    skew-product composition law.
    """
    if t <= 0 or tau <= 0:
        raise ConfigInvalid("t and tau must be positive")
    snaps = integrate_ode_snapshots(sys, u0, cfg, [tau, t + tau])
    mid, end_direct = snaps[0], snaps[1]
    end_restart = integrate_ode_snapshots(sys.shifted(tau), mid, cfg, [t])[0]
    return float(np.max(np.abs(end_direct - end_restart)))


def dde_cocycle_defect(sys: SystemSpec, history: Signal, cfg: IntegratorConfig,
                       t: float, tau: float) -> float:
    """Cocycle identity for the delay system on segment space."""
    rhs = build_dde_rhs(sys)
    r = rhs.r
    fine = replace(cfg, t_end=t + tau, record_dt=cfg.dt)
    sol = integrate_dde(sys, history, fine)
    seg = sol.restrict(tau - r, tau)
    seg_hist = Signal(-r, seg.dt, seg.samples, seg.interp)
    sol2 = integrate_dde(sys.shifted(tau), seg_hist, replace(fine, t_end=t))
    end_direct = sol.at(t + tau)
    end_restart = sol2.at(t)
    return float(np.max(np.abs(end_direct - end_restart)))


def parabolic_cocycle_defect(sys: SystemSpec, u0, cfg: IntegratorConfig,
                             t: float, tau: float) -> float:
    """Cocycle identity for the reaction-diffusion system on the grid state.

    t and tau must be multiples of the record step so the restart field is
    an exact recorded snapshot.
    """
    full = integrate_parabolic(sys, u0, replace(cfg, t_end=t + tau))
    idx_mid = int(round(tau / cfg.record_dt))
    idx_end = int(round((t + tau) / cfg.record_dt))
    mid = full.values[idx_mid]
    end_direct = full.values[idx_end]
    restart = integrate_parabolic(sys.shifted(tau), mid, replace(cfg, t_end=t))
    return float(np.max(np.abs(end_direct - restart.values[-1])))
