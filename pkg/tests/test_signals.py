import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from poisson_lab.errors import (
    DimensionMismatch,
    ParseError,
    ShiftOutOfDomain,
    WindowOutOfDomain,
)
from poisson_lab.signals import (
    Signal,
    Window,
    bebutov_distance,
    read_signal_csv,
    sample_function,
    shift,
    shift_discrepancy,
    sup_distance,
    write_signal_csv,
)


@pytest.fixture(scope="module")
def sine():
    return sample_function(np.sin, 0.0, 50.0, 0.01)


def const_signal(value, t0=-10.0, t_end=10.0, dt=0.01, dim=1):
    n = int(round((t_end - t0) / dt)) + 1
    return Signal(t0, dt, np.full((n, dim), float(value)))


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def test_invariants_on_construction():
    with pytest.raises(ValueError):
        Signal(0.0, -0.1, np.zeros((4, 1)))
    with pytest.raises(ValueError):
        Signal(0.0, 0.1, np.zeros((0, 1)))
    with pytest.raises(ValueError):
        Signal(0.0, 0.1, np.array([[np.inf]]))
    f = Signal(1.0, 0.5, np.zeros((5, 2)))
    assert f.domain == (1.0, 3.0)
    assert f.dim == 2


def test_one_sample_signal_is_legal_but_windowed_ops_reject():
    f = Signal(0.0, 1.0, np.array([[2.0]]))
    assert f.at(0.0)[0] == 2.0
    with pytest.raises(WindowOutOfDomain):
        sup_distance(f, f, Window(0.0, 0.5))


# ---------------------------------------------------------------------------
# shift
# ---------------------------------------------------------------------------

def test_shift_zero_is_bitwise_identity(sine):
    g = shift(sine, 0.0)
    assert np.array_equal(g.samples, sine.samples)


def test_shift_linear_ramp_exact():
    f = sample_function(lambda t: np.asarray(t, dtype=float), -10.0, 10.0, 0.01)
    g = shift(f, 3.0)
    assert g.t0 == pytest.approx(-10.0)
    assert g.t_end == pytest.approx(7.0, abs=1e-9)
    err = np.abs(g.samples[:, 0] - (g.times() + 3.0)).max()
    assert err < 1e-12


def test_shift_by_period(sine):
    g = shift(sine, 2 * math.pi)
    ts = g.times()
    err = np.abs(g.values(ts) - sine.values(ts)).max()
    assert err <= 1e-4


def test_shift_out_of_domain(sine):
    with pytest.raises(ShiftOutOfDomain):
        shift(sine, 51.0)


def test_shift_flow_composition_grid_aligned(sine):
    a, b = 1.25, 2.5  # both grid multiples of dt=0.01
    lhs = shift(shift(sine, a), b)
    rhs = shift(sine, a + b)
    ts = lhs.times()
    assert np.abs(lhs.values(ts) - rhs.values(ts)).max() < 1e-12


# ---------------------------------------------------------------------------
# shift_discrepancy
# ---------------------------------------------------------------------------

def test_discrepancy_zero_at_zero(sine):
    assert shift_discrepancy(sine, 0.0, Window(25.0, 10.0)) == 0.0


def test_discrepancy_half_period(sine):
    # |sin(t+pi) - sin t| = 2|sin t| peaks at 2 inside any window holding pi/2.
    d = shift_discrepancy(sine, math.pi, Window(10.0, 9.0))
    assert d == pytest.approx(2.0, abs=1e-3)


def test_discrepancy_full_period(sine):
    d = shift_discrepancy(sine, 2 * math.pi, Window(20.0, 10.0))
    assert d <= 1e-4


def test_discrepancy_bounded_by_twice_sup(sine):
    w = Window(20.0, 10.0)
    d = shift_discrepancy(sine, 7.3, w)
    assert d <= 2.0 + 1e-9


def test_discrepancy_window_out_of_domain(sine):
    with pytest.raises(WindowOutOfDomain):
        shift_discrepancy(sine, 30.0, Window(25.0, 24.0))


# ---------------------------------------------------------------------------
# bebutov distance
# ---------------------------------------------------------------------------

def test_bebutov_zero_on_equal():
    f = const_signal(1.3)
    assert bebutov_distance(f, f, 5.0, 0.0) == 0.0


def test_bebutov_constant_gap():
    # min(0.5, 1/l) = 0.5 until l = 2; the sup is 0.5.
    f = const_signal(0.0)
    g = const_signal(0.5)
    assert bebutov_distance(f, g, 10.0, 0.0) == pytest.approx(0.5, abs=1e-12)


def test_bebutov_ramp_vs_zero():
    # max over |t|<=l is l; min(l, 1/l) is maximized at l = 1.
    f = sample_function(lambda t: np.asarray(t, dtype=float), -10.0, 10.0, 0.01)
    g = const_signal(0.0)
    assert bebutov_distance(f, g, 10.0, 0.0) == pytest.approx(1.0, abs=0.02)


def test_bebutov_monotone_in_lmax():
    f = sample_function(np.sin, -10.0, 10.0, 0.01)
    g = const_signal(0.0)
    vals = [bebutov_distance(f, g, lm, 0.0) for lm in (1.0, 2.0, 5.0, 9.0)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_bebutov_dimension_mismatch():
    f = const_signal(0.0, dim=1)
    g = const_signal(0.0, dim=2)
    with pytest.raises(DimensionMismatch):
        bebutov_distance(f, g, 5.0, 0.0)


# ---------------------------------------------------------------------------
# sup distance
# ---------------------------------------------------------------------------

def test_sup_distance_examples():
    f = const_signal(1.0)
    g = const_signal(-1.0)
    assert sup_distance(f, g, Window(0.0, 5.0)) == pytest.approx(2.0)
    assert sup_distance(f, f, Window(0.0, 5.0)) == 0.0


def test_sup_distance_exponential_left_endpoint():
    f = sample_function(lambda t: np.exp(-np.asarray(t, dtype=float)), 0.0, 6.0, 0.01)
    g = const_signal(0.0, t0=0.0, t_end=6.0)
    d = sup_distance(f, g, Window(3.0, 2.0))  # [1, 5], max at t = 1
    assert d == pytest.approx(math.exp(-1.0), abs=1e-6)


# ---------------------------------------------------------------------------
# properties
# ---------------------------------------------------------------------------

signal_values = st.lists(
    st.floats(min_value=-5.0, max_value=5.0, allow_nan=False), min_size=24,
    max_size=64)


@given(signal_values, signal_values, signal_values)
def test_triangle_inequalities(a, b, c):
    n = min(len(a), len(b), len(c))
    mk = lambda vals: Signal(0.0, 0.1, np.asarray(vals[:n]), "linear")
    f, g, h = mk(a), mk(b), mk(c)
    w = Window(0.1 * (n - 1) / 2, 0.1 * (n - 1) / 2)
    assert sup_distance(f, h, w) <= (
        sup_distance(f, g, w) + sup_distance(g, h, w) + 1e-9)
    lm = 0.1 * (n - 1) / 2
    center = lm
    assert bebutov_distance(f, h, lm, center) <= (
        bebutov_distance(f, g, lm, center)
        + bebutov_distance(g, h, lm, center) + 1e-9)


@given(signal_values, st.integers(min_value=1, max_value=5),
       st.integers(min_value=1, max_value=5))
def test_shift_flow_on_samples(vals, k1, k2):
    f = Signal(0.0, 0.1, np.asarray(vals), "linear")
    a, b = 0.1 * k1, 0.1 * k2
    if a + b >= f.length:
        return
    lhs = shift(shift(f, a), b)
    rhs = shift(f, a + b)
    assert np.array_equal(lhs.samples, rhs.samples)


@given(signal_values, st.integers(min_value=1, max_value=8))
def test_discrepancy_bound_property(vals, k):
    f = Signal(0.0, 0.1, np.asarray(vals), "linear")
    tau = 0.1 * k
    hw = (f.length - tau) / 2
    if hw <= 0.1:
        return
    w = Window(hw, hw)
    d = shift_discrepancy(f, tau, w)
    assert d <= 2 * np.abs(f.samples).max() + 1e-12


def test_window_monotonicity_of_discrepancy(sine):
    tau = 1.234
    small = shift_discrepancy(sine, tau, Window(20.0, 5.0))
    large = shift_discrepancy(sine, tau, Window(20.0, 15.0))
    assert large >= small - 1e-12


def test_bebutov_nonincreasing_under_pointwise_shrink():
    f = sample_function(np.sin, -10.0, 10.0, 0.01)
    zero = const_signal(0.0)
    half = Signal(f.t0, f.dt, 0.5 * f.samples)
    assert bebutov_distance(half, zero, 8.0, 0.0) <= \
        bebutov_distance(f, zero, 8.0, 0.0) + 1e-12


# ---------------------------------------------------------------------------
# CSV round trip
# ---------------------------------------------------------------------------

def test_csv_round_trip(tmp_path, sine):
    path = tmp_path / "sine.csv"
    write_signal_csv(sine, path)
    back = read_signal_csv(path)
    assert back.dim == sine.dim
    assert np.array_equal(back.samples, sine.samples)
    assert back.t0 == sine.t0
    assert back.dt == pytest.approx(sine.dt, rel=1e-12)


def test_csv_rejects_non_uniform(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t,x1\n0,1\n0.1,2\n0.3,3\n")
    with pytest.raises(ParseError):
        read_signal_csv(path)


def test_csv_rejects_empty_and_bad_header(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(ParseError):
        read_signal_csv(path)
    path2 = tmp_path / "hdr.csv"
    path2.write_text("time,u\n0,1\n")
    with pytest.raises(ParseError):
        read_signal_csv(path2)
