"""Limit-set sampling and convergence machinery.

Snapshots of a trajectory at base return times approximate one fiber of its
omega-limit set; componentwise extrema of those snapshots, restarted
integrations from the extrema, and trailing-window distance checks realize
the extremal-solution and convergence statements numerically.  Return times
always come from the base forcing, never from the trajectory itself.

All estimates are finite-horizon; horizons, probe counts and seeds are
configuration-visible so reports are reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionMismatch, InsufficientReturns, NotCauchy
from .recurrence import ReturnSequence
from .signals import Signal, Window, sup_distance
from .systems import (
    IntegratorConfig,
    SystemSpec,
    integrate_ode_snapshots,
)


# ---------------------------------------------------------------------------
# omega-fiber sampling and extrema
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OmegaSample:
    """Trajectory snapshots at base return times past a settle horizon."""

    returns: ReturnSequence
    settle_time: float
    times: np.ndarray      # retained return times
    snapshots: np.ndarray  # (k, dim)
    fiber_tag: str = ""

    def diameter(self) -> float:
        return float((self.snapshots.max(axis=0) - self.snapshots.min(axis=0)).max())


@dataclass(frozen=True)
class ExtremalPair:
    alpha: np.ndarray
    beta: np.ndarray
    alpha_in_sample: bool
    beta_in_sample: bool


@dataclass(frozen=True)
class GammaExtraction:
    gamma: np.ndarray
    cauchy_tail: tuple          # successive snapshot gaps
    snapshot_times: tuple
    snapshots: np.ndarray


@dataclass(frozen=True)
class ConvergenceReport:
    splits: tuple               # ((T, sup-distance on [T, T+w]), ...)
    trend: str                  # decreasing | stagnant | increasing
    passed: bool
    threshold: float


def omega_fiber_sample(traj: Signal, returns: ReturnSequence,
                       settle_time: float, fiber_tag: str = "") -> OmegaSample:
    """Snapshots traj(t_n) for return times past the settle horizon."""
    times = np.asarray(returns.times, dtype=float)
    keep = times[times > settle_time]
    if keep.size < 3:
        raise InsufficientReturns(
            f"only {keep.size} return times past settle_time={settle_time:g}"
        )
    lo, hi = traj.domain
    if keep[0] < lo or keep[-1] > hi:
        raise InsufficientReturns("return times leave the trajectory domain")
    snaps = traj.values(keep)
    return OmegaSample(returns, settle_time, keep, snaps, fiber_tag)


def fiber_extrema(sample: OmegaSample, tol: float) -> ExtremalPair:
    """Componentwise extrema of the snapshots with attainment flags.

    The extrema need not be attained by any single snapshot; the flags
    record whether they are, within tol in the sup norm.
    """
    snaps = sample.snapshots
    alpha = snaps.min(axis=0)
    beta = snaps.max(axis=0)
    a_in = bool(np.abs(snaps - alpha).max(axis=1).min() <= tol)
    b_in = bool(np.abs(snaps - beta).max(axis=1).min() <= tol)
    return ExtremalPair(alpha, beta, a_in, b_in)


# ---------------------------------------------------------------------------
# distinguished-solution extraction
# ---------------------------------------------------------------------------

def gamma_extract(sys: SystemSpec, start, returns: ReturnSequence,
                  cfg: IntegratorConfig, *, tol: float = 1e-4,
                  tail: int = 5) -> GammaExtraction:
    """Integrate from ``start`` and track snapshots at the base return times.

    The final snapshot is the distinguished-solution estimate; the list of
    successive snapshot gaps is the convergence evidence.  Raises NotCauchy
    when the last gaps fail to shrink: that is the signal that the
    extremal-limit hypotheses fail for this scenario.
    """
    if len(returns) == 0:
        raise InsufficientReturns("empty return sequence")
    times = np.asarray(returns.times, dtype=float)
    snaps = integrate_ode_snapshots(sys, start, cfg, times)
    gaps = [float(np.abs(snaps[i + 1] - snaps[i]).max())
            for i in range(len(times) - 1)]
    if not gaps:
        raise InsufficientReturns("need at least two return times")
    k = min(tail, len(gaps))
    recent = gaps[-k:]
    final = recent[-1]
    # Strict decrease is required only above the tolerance floor; gaps at
    # the floor are rounding noise of an already-converged sequence.
    shrinking = all(
        b < a or b < tol for a, b in zip(recent, recent[1:])
    )
    if not (final < tol and shrinking):
        raise NotCauchy(
            f"snapshot gaps not Cauchy: tail={['%.3g' % g for g in recent]}",
            gaps,
        )
    return GammaExtraction(snaps[-1], tuple(gaps), tuple(times), snaps)


def entire_trajectory_estimate(traj: Signal, returns: ReturnSequence,
                               half_width: float):
    """Reconstruct a two-sided trajectory segment from late return times.

    gamma_n(t) := traj(t + t_n) on [-W, W] for the last two usable t_n; the
    reported agreement between them is the numeric counterpart of a unique
    backward extension.
    """
    lo, hi = traj.domain
    usable = [t for t in returns.times
              if t - half_width >= lo - 1e-9 and t + half_width <= hi + 1e-9]
    if len(usable) < 2:
        raise InsufficientReturns(
            f"need 2 return times with +-{half_width:g} margin, have {len(usable)}"
        )
    t_a, t_b = usable[-2], usable[-1]
    offs = traj.dt * np.arange(-round(half_width / traj.dt),
                               round(half_width / traj.dt) + 1)
    rec_a = traj.values(offs + t_a)
    rec_b = traj.values(offs + t_b)
    agreement = float(np.abs(rec_a - rec_b).max())
    gamma_signal = Signal(float(offs[0]), traj.dt, rec_b, traj.interp)
    return gamma_signal, agreement


# ---------------------------------------------------------------------------
# stability and contraction estimates
# ---------------------------------------------------------------------------

def _probe_directions(dim: int, probes: int, rng: np.random.Generator) -> np.ndarray:
    """Unit directions: ordered cone rays first, then seeded general ones."""
    dirs = [np.ones(dim) / math.sqrt(dim)]
    for j in range(dim):
        e = np.zeros(dim)
        e[j] = 1.0
        dirs.append(e)
        dirs.append(-e)
    while len(dirs) < probes:
        v = rng.normal(size=dim)
        n = np.linalg.norm(v, ord=np.inf)
        if n > 1e-12:
            dirs.append(v / n)
    return np.stack(dirs[:probes], axis=1)  # (dim, probes)


def uniform_stability_estimate(sys: SystemSpec, anchor, epsilon_list,
                               probes: int, horizon: float, *,
                               cfg: IntegratorConfig | None = None,
                               seed: int = 0, delta_cap_factor: float = 4.0,
                               bisect_iters: int = 16) -> list:
    """Empirical stability modulus delta_hat(eps) around one anchor.

    For each eps, the largest shell radius delta (found by bracketing and
    bisection) such that every probe started delta away stays eps-close to
    the anchor trajectory on [0, horizon].  Anchored at t0 = 0; probing is
    on both ordered and unordered perturbation directions.
    """
    if probes < 8:
        raise ValueError("need at least 8 probes")
    if cfg is None:
        cfg = IntegratorConfig(method="rk4_fixed", dt=1e-2, t_end=horizon,
                               record_dt=max(1e-2, horizon / 1000))
    else:
        cfg = replace(cfg, t_end=horizon)
    rng = np.random.default_rng(seed)
    dirs = _probe_directions(sys.dim, probes, rng)
    anchor = np.asarray(anchor, dtype=float)
    from .systems import integrate_ode_batch

    _, anchor_path = integrate_ode_batch(sys, anchor[:, None], cfg)

    def max_deviation(delta: float) -> float:
        starts = anchor[:, None] + delta * dirs
        _, Y = integrate_ode_batch(sys, starts, cfg)
        return float(np.abs(Y - anchor_path).max())

    out = []
    for eps in sorted(float(e) for e in epsilon_list):
        cap = eps * delta_cap_factor
        lo_ok = 0.0
        hi_bad = None
        # Geometric bracket downward from the cap.
        d = cap
        for _ in range(40):
            if max_deviation(d) < eps:
                lo_ok = d
                break
            hi_bad = d
            d /= 4.0
            if d < eps * 1e-9:
                break
        if lo_ok == 0.0:
            out.append((eps, 0.0))
            continue
        if hi_bad is None:
            out.append((eps, cap))
            continue
        for _ in range(bisect_iters):
            mid = math.sqrt(lo_ok * hi_bad)
            if max_deviation(mid) < eps:
                lo_ok = mid
            else:
                hi_bad = mid
        out.append((eps, lo_ok))
    # delta_hat must be nondecreasing in eps by construction; enforce the
    # reported monotonicity against bisection jitter.
    for i in range(1, len(out)):
        if out[i][1] < out[i - 1][1]:
            out[i] = (out[i][0], out[i - 1][1])
    return out


def convergence_check(a: Signal, b: Signal, threshold: float,
                      split_count: int) -> ConvergenceReport:
    """Sup-distances on trailing windows of the common domain plus a trend."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dims differ: {a.dim} vs {b.dim}")
    lo = max(a.t0, b.t0)
    hi = min(a.t_end, b.t_end)
    if split_count < 2 or hi - lo <= 0:
        raise ValueError("need an overlapping domain and split_count >= 2")
    width = (hi - lo) / split_count
    splits = []
    for k in range(split_count):
        t_k = lo + k * width
        w = Window(t_k + width / 2, width / 2)
        splits.append((t_k, sup_distance(a, b, w)))
    vals = [s for _, s in splits]
    rel = 1e-9 * max(max(vals), 1e-300)
    if all(y <= x + rel for x, y in zip(vals, vals[1:])) and vals[-1] < vals[0] - rel:
        trend = "decreasing"
    elif all(y >= x - rel for x, y in zip(vals, vals[1:])) and vals[-1] > vals[0] + rel:
        trend = "increasing"
    else:
        trend = "stagnant"
    passed = vals[-1] < threshold and trend != "increasing"
    return ConvergenceReport(tuple(splits), trend, passed, threshold)


@dataclass(frozen=True)
class ContractionResult:
    contracting: bool
    witness: tuple | None = None  # (pair index, t, d_before, d_after)

    def __bool__(self) -> bool:
        return self.contracting


def contraction_check(sys: SystemSpec, pairs: int, horizon: float, *,
                      box=None, cfg: IntegratorConfig | None = None,
                      seed: int = 0, sample_times: int = 5) -> ContractionResult:
    """Strict decrease of the gap between same-fiber pairs at sampled times."""
    if pairs < 8:
        raise ValueError("need at least 8 pairs")
    if box is None:
        box = np.array([[-1.0, 1.0]] * sys.dim)
    else:
        box = np.asarray(box, dtype=float)
    if cfg is None:
        cfg = IntegratorConfig(method="rk4_fixed", dt=1e-3, t_end=horizon,
                               record_dt=horizon / sample_times)
    else:
        cfg = replace(cfg, t_end=horizon, record_dt=horizon / sample_times)
    rng = np.random.default_rng(seed)
    A = rng.uniform(box[:, 0], box[:, 1], size=(pairs, sys.dim)).T
    B = rng.uniform(box[:, 0], box[:, 1], size=(pairs, sys.dim)).T
    from .systems import integrate_ode_batch

    ts, Ya = integrate_ode_batch(sys, A, cfg)
    _, Yb = integrate_ode_batch(sys, B, cfg)
    gaps = np.abs(Ya - Yb).max(axis=1)  # (n_times, pairs)
    for p in range(pairs):
        if gaps[0, p] < 1e-12:
            continue
        for i in range(1, gaps.shape[0]):
            if not gaps[i, p] < gaps[i - 1, p]:
                return ContractionResult(
                    False, (p, float(ts[i]), float(gaps[i - 1, p]), float(gaps[i, p])))
    return ContractionResult(True)


# ---------------------------------------------------------------------------
# ordered-pair batteries
# ---------------------------------------------------------------------------

def ordered_pairs(box, count: int, rng: np.random.Generator):
    """Random componentwise-ordered pairs (lower, upper) inside a box."""
    box = np.asarray(box, dtype=float)
    dim = box.shape[0]
    lo = rng.uniform(box[:, 0], box[:, 1], size=(count, dim))
    up = lo + rng.uniform(0.0, 1.0, size=(count, dim)) * (box[:, 1] - lo)
    return lo.T, up.T  # each (dim, count)


def comparison_battery(sys: SystemSpec, box, count: int, horizon: float, *,
                       cfg: IntegratorConfig | None = None, seed: int = 0,
                       tol: float | None = None):
    """Integrate ordered pairs side by side and report the worst violation.

    Returns (ordered: bool, worst_violation, witness or None).
    """
    from .systems import integrate_ode_batch

    if cfg is None:
        cfg = IntegratorConfig(method="rk4_fixed", dt=1e-3, t_end=horizon,
                               record_dt=0.05)
    else:
        cfg = replace(cfg, t_end=horizon)
    rng = np.random.default_rng(seed)
    lo, up = ordered_pairs(box, count, rng)
    _, Ylo = integrate_ode_batch(sys, lo, cfg)
    _, Yup = integrate_ode_batch(sys, up, cfg)
    if tol is None:
        scale = float(np.abs(np.stack([Ylo, Yup])).max())
        tol = 1e-9 + 1e-6 * scale
    gap = Ylo - Yup  # ordered means <= 0 (+tol)
    worst = float(gap.max())
    if worst <= tol:
        return True, worst, None
    idx = np.unravel_index(int(np.argmax(gap)), gap.shape)
    t_bad = idx[0] * cfg.record_dt
    return False, worst, (float(t_bad), int(idx[1]), int(idx[2]))
