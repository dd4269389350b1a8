"""Uniformly sampled signals, time shifts, and windowed discrepancy metrics.

A :class:`Signal` is the numerical stand-in for a point of the function space
carrying the shift flow: forcings and trajectories are both signals, and all
recurrence analysis reduces to windowed comparisons between a signal and its
own translates.  Quantifiers over the whole real line are evaluated on finite
windows; every downstream report records the window it used.

All values here are immutable after construction and every operation is a
pure function, so they are safe to hand to parallel workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    DimensionMismatch,
    ParseError,
    ShiftOutOfDomain,
    WindowOutOfDomain,
)

# Relative slack used when snapping times to the sample grid.
_GRID_RTOL = 1e-9

_INTERP_KINDS = ("linear", "cubic")


@dataclass(frozen=True)
class Window:
    """Closed interval [center - half_width, center + half_width]."""

    center: float
    half_width: float

    def __post_init__(self):
        if not (self.half_width > 0 and math.isfinite(self.half_width)):
            raise ValueError("half_width must be positive and finite")
        if not math.isfinite(self.center):
            raise ValueError("center must be finite")

    @property
    def lo(self) -> float:
        return self.center - self.half_width

    @property
    def hi(self) -> float:
        return self.center + self.half_width

    def shifted(self, tau: float) -> "Window":
        return Window(self.center + tau, self.half_width)

    def require_inside(self, sig: "Signal", label: str = "window") -> None:
        slack = _GRID_RTOL * max(1.0, abs(sig.dt))
        if self.lo < sig.t0 - slack or self.hi > sig.t_end + slack:
            raise WindowOutOfDomain(
                f"{label} [{self.lo:g}, {self.hi:g}] not inside signal domain "
                f"[{sig.t0:g}, {sig.t_end:g}]"
            )


@dataclass(frozen=True, eq=False)
class Signal:
    """Vector-valued function of time on a uniform grid.

    Parameters
    ----------
    t0 : float
        Time of the first sample (arbitrary origin).
    dt : float
        Grid step, strictly positive.
    samples : array, shape (n, dim)
        Sample values; a 1-D array is treated as a single component.
    interp : {"cubic", "linear"}
        Interpolation rule between samples.  Cubic uses a natural spline and
        is the default for smooth forcings; linear is for non-smooth data.
    """

    t0: float
    dt: float
    samples: np.ndarray
    interp: str = "cubic"

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] == 0:
            raise ValueError("samples must be a nonempty (n, dim) array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError("dt must be positive and finite")
        if self.interp not in _INTERP_KINDS:
            raise ValueError(f"interp must be one of {_INTERP_KINDS}")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    # -- geometry ---------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (len(self) - 1)

    @property
    def domain(self) -> tuple[float, float]:
        # Computed, never stored.
        return (self.t0, self.t_end)

    @property
    def length(self) -> float:
        return self.dt * (len(self) - 1)

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self))

    # -- evaluation -------------------------------------------------------

    @cached_property
    def _spline(self) -> CubicSpline:
        if len(self) < 3:
            # Degenerates to linear; CubicSpline needs >= 2 breakpoints and a
            # natural spline through 2 points is the chord anyway.
            return CubicSpline(self.times(), self.samples, axis=0)
        return CubicSpline(self.times(), self.samples, axis=0, bc_type="natural")

    def values(self, ts) -> np.ndarray:
        """Interpolated values at times ``ts``; shape (len(ts), dim)."""
        ts = np.asarray(ts, dtype=float)
        slack = _GRID_RTOL * max(1.0, self.dt)
        if ts.size and (ts.min() < self.t0 - slack or ts.max() > self.t_end + slack):
            raise WindowOutOfDomain(
                f"evaluation times outside domain [{self.t0:g}, {self.t_end:g}]"
            )
        ts = np.clip(ts, self.t0, self.t_end)
        if len(self) == 1:
            return np.repeat(self.samples, ts.size, axis=0)
        if self.interp == "linear":
            grid = self.times()
            out = np.empty((ts.size, self.dim))
            for j in range(self.dim):
                out[:, j] = np.interp(ts, grid, self.samples[:, j])
            return out
        return self._spline(ts)

    def at(self, t: float) -> np.ndarray:
        """Value at a single time; shape (dim,)."""
        return self.values([t])[0]

    # -- derived signals ----------------------------------------------------

    def component(self, j: int) -> "Signal":
        return replace(self, samples=self.samples[:, j])

    def restrict(self, lo: float, hi: float) -> "Signal":
        """Sub-signal on the grid points inside [lo, hi] (snapped inward)."""
        i0 = self._index_at_or_after(lo)
        i1 = self._index_at_or_before(hi)
        if i1 < i0:
            raise WindowOutOfDomain(f"[{lo:g}, {hi:g}] contains no grid point")
        return Signal(self.t0 + i0 * self.dt, self.dt,
                      self.samples[i0 : i1 + 1], self.interp)

    def _index_at_or_after(self, t: float) -> int:
        idx = math.ceil((t - self.t0) / self.dt - _GRID_RTOL)
        return max(idx, 0)

    def _index_at_or_before(self, t: float) -> int:
        idx = math.floor((t - self.t0) / self.dt + _GRID_RTOL)
        return min(idx, len(self) - 1)

    def window_slice(self, w: Window) -> tuple[int, int]:
        """Grid index range [i0, i1] covered by ``w`` (snapped inward)."""
        w.require_inside(self)
        i0 = self._index_at_or_after(w.lo)
        i1 = self._index_at_or_before(w.hi)
        if i1 - i0 < 1:
            raise WindowOutOfDomain("window narrower than one grid cell")
        return i0, i1


def sample_function(fn, t0: float, t_end: float, dt: float,
                    interp: str = "cubic") -> Signal:
    """Sample a callable ``fn(ts) -> (n,) or (n, dim)`` onto a uniform grid."""
    n = int(round((t_end - t0) / dt))
    ts = t0 + dt * np.arange(n + 1)
    vals = np.asarray(fn(ts), dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    return Signal(t0, dt, vals, interp)


# ---------------------------------------------------------------------------
# shift flow
# ---------------------------------------------------------------------------

def shift(f: Signal, tau: float) -> Signal:
    """Translate in time: returns g with g(t) = f(t + tau).

    The result lives on the shrunken common domain, resampled on the same
    grid phase.  Shifts that are exact grid multiples are pure sample
    slices (no interpolation error).
    """
    if tau == 0.0:
        return f
    if abs(tau) >= f.length:
        raise ShiftOutOfDomain(
            f"|tau|={abs(tau):g} >= domain length {f.length:g}"
        )
    lo = max(f.t0, f.t0 - tau)
    hi = min(f.t_end, f.t_end - tau)
    i0 = f._index_at_or_after(lo)
    i1 = f._index_at_or_before(hi)
    if i1 < i0:
        raise ShiftOutOfDomain("shifted domain is empty")
    k = tau / f.dt
    k_round = round(k)
    new_t0 = f.t0 + i0 * f.dt
    if abs(k - k_round) <= _GRID_RTOL * max(1.0, abs(k)):
        vals = f.samples[i0 + k_round : i1 + k_round + 1]
    else:
        ts = new_t0 + f.dt * np.arange(i1 - i0 + 1)
        vals = f.values(ts + tau)
    return Signal(new_t0, f.dt, vals, f.interp)


# ---------------------------------------------------------------------------
# windowed metrics
# ---------------------------------------------------------------------------

def _require_same_dim(f: Signal, g: Signal) -> None:
    if f.dim != g.dim:
        raise DimensionMismatch(f"dims differ: {f.dim} vs {g.dim}")


def sup_distance(f: Signal, g: Signal, w: Window) -> float:
    """max over t in w of the componentwise sup-norm |f(t) - g(t)|."""
    _require_same_dim(f, g)
    w.require_inside(f)
    w.require_inside(g)
    i0, i1 = f.window_slice(w)
    ts = f.t0 + f.dt * np.arange(i0, i1 + 1)
    # Window endpoints are evaluated too so maxima at the edges are not
    # missed when the window is not grid-aligned.
    ts = np.unique(np.concatenate([[max(w.lo, f.t0, g.t0)], ts,
                                   [min(w.hi, f.t_end, g.t_end)]]))
    diff = np.abs(f.values(ts) - g.values(ts))
    return float(diff.max())


def shift_discrepancy(f: Signal, tau: float, w: Window) -> float:
    """Windowed sup-norm discrepancy D(tau) = max over w of |f(t+tau) - f(t)|.

    tau is an epsilon-almost period on w exactly when D(tau) < epsilon.
    """
    w.require_inside(f, "window")
    w.shifted(tau).require_inside(f, "shifted window")
    if tau == 0.0:
        return 0.0
    i0, i1 = f.window_slice(w)
    base = f.samples[i0 : i1 + 1]
    k = tau / f.dt
    k_round = round(k)
    if abs(k - k_round) <= _GRID_RTOL * max(1.0, abs(k)):
        j0 = i0 + k_round
        seg = f.samples[j0 : j0 + (i1 - i0 + 1)]
    else:
        ts = f.t0 + f.dt * np.arange(i0, i1 + 1)
        seg = f.values(ts + tau)
    return float(np.abs(seg - base).max())


def discrepancy_profile(f: Signal, taus: np.ndarray, w: Window) -> np.ndarray:
    """Vectorized ``shift_discrepancy`` over a tau grid.

    Grid-aligned taus use exact sample slices; others fall back to
    interpolation.
    """
    taus = np.asarray(taus, dtype=float)
    i0, i1 = f.window_slice(w)
    base = f.samples[i0 : i1 + 1]
    m = i1 - i0 + 1
    n = len(f)
    out = np.empty(taus.size)
    ts_cache = None
    for a, tau in enumerate(taus):
        w.shifted(tau).require_inside(f, "shifted window")
        if tau == 0.0:
            out[a] = 0.0
            continue
        k = tau / f.dt
        k_round = round(k)
        if abs(k - k_round) <= _GRID_RTOL * max(1.0, abs(k)):
            j0 = i0 + k_round
            if j0 < 0 or j0 + m > n:
                raise WindowOutOfDomain("shifted window leaves sample range")
            seg = f.samples[j0 : j0 + m]
        else:
            if ts_cache is None:
                ts_cache = f.t0 + f.dt * np.arange(i0, i1 + 1)
            seg = f.values(ts_cache + tau)
        out[a] = np.abs(seg - base).max()
    return out


def bebutov_distance(f: Signal, g: Signal, l_max: float, center: float) -> float:
    """Shift-metric distance sup_l min(max_{|t-center|<=l} |f-g|, 1/l).

    The sup runs over the grid multiples l in {dt, 2 dt, ..., l_max}; between
    grid points min(., 1/l) is piecewise monotone, so grid evaluation bounds
    the error by one dt cell.
    """
    _require_same_dim(f, g)
    if l_max < f.dt:
        raise WindowOutOfDomain("l_max smaller than one grid step")
    w = Window(center, l_max)
    w.require_inside(f)
    w.require_inside(g)
    i0, i1 = f.window_slice(w)
    ts = f.t0 + f.dt * np.arange(i0, i1 + 1)
    diff = np.abs(f.values(ts) - g.values(ts)).max(axis=1)
    return _bebutov_from_diffs(diff, ts, center, f.dt, l_max)


def _bebutov_from_diffs(diff: np.ndarray, ts: np.ndarray, center: float,
                        dt: float, l_max: float) -> float:
    """Core of the shift metric given pointwise gaps on a window."""
    offsets = np.abs(ts - center)
    order = np.argsort(offsets, kind="stable")
    cummax = np.maximum.accumulate(diff[order])
    sorted_off = offsets[order]
    k_max = int(math.floor(l_max / dt + _GRID_RTOL))
    ls = dt * np.arange(1, k_max + 1)
    # Number of points with |t - center| <= l, per l.
    counts = np.searchsorted(sorted_off, ls + _GRID_RTOL * max(1.0, l_max),
                             side="right")
    counts = np.clip(counts, 1, len(diff))
    m_l = cummax[counts - 1]
    return float(np.max(np.minimum(m_l, 1.0 / ls)))


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------

def write_signal_csv(sig: Signal, path) -> None:
    """Write the documented CSV form: header ``t,x1,...,xn``."""
    header = "t," + ",".join(f"x{j + 1}" for j in range(sig.dim))
    ts = sig.times()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for i in range(len(sig)):
            row = ",".join(f"{v:.17g}" for v in sig.samples[i])
            fh.write(f"{ts[i]:.17g},{row}\n")


def read_signal_csv(path, interp: str = "cubic") -> Signal:
    """Read the documented CSV form; rejects non-uniform grids."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ParseError(f"{path}: empty file")
    header = [c.strip() for c in lines[0].split(",")]
    if len(header) < 2 or header[0] != "t":
        raise ParseError(f"{path}: header must be 't,x1,...,xn'")
    for j, name in enumerate(header[1:]):
        if name != f"x{j + 1}":
            raise ParseError(f"{path}: column {j + 2} must be named 'x{j + 1}'")
    dim = len(header) - 1
    rows = []
    for ln_no, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != dim + 1:
            raise ParseError(f"{path}:{ln_no}: expected {dim + 1} fields")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ParseError(f"{path}:{ln_no}: non-numeric field") from exc
    if not rows:
        raise ParseError(f"{path}: no data rows")
    data = np.asarray(rows)
    ts = data[:, 0]
    if len(ts) >= 2:
        steps = np.diff(ts)
        dt = float((ts[-1] - ts[0]) / (len(ts) - 1))
        if dt <= 0 or np.any(steps <= 0):
            raise ParseError(f"{path}: times must be strictly increasing")
        if np.any(np.abs(steps - dt) > 1e-9 * dt):
            raise ParseError(f"{path}: non-uniform time grid")
    else:
        dt = 1.0
    return Signal(float(ts[0]), dt, data[:, 1:], interp)
