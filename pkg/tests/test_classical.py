import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kerrtda.classical import (ClassicalParams, DriveProfile, bifurcation_scan,
                               classical_rhs, drive_at_step, drive_value,
                               integrate_classical, step_grid)
from kerrtda.errors import NonFiniteState

PRINTED = ClassicalParams(conjugate_nonlinearity=True)


# drive

@pytest.mark.parametrize("amp,period,t,expected", [
    (1.0, 10.0, 2.5, 1.0),
    (1.0, 10.0, 7.5, 0.0),
    (4.5, 8.0, 12.0, 0.0),
    (4.5, 8.0, 0.0, 4.5),
    (4.5, 8.0, -1.0, 0.0),
])
def test_drive_value_examples(amp, period, t, expected):
    assert drive_value(DriveProfile(amp, period), t) == expected


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 5), st.floats(0.1, 50), st.floats(-1e3, 1e3), st.integers(-50, 50))
def test_drive_is_periodic_and_two_valued(amp, period, t, k):
    p = DriveProfile(amp, period)
    assert drive_value(p, t) in (0.0, amp)
    # on the step grid the periodicity is exact for any integer shift
    spp = 2000
    step = int(t * 10)
    assert drive_at_step(p, step, spp) == drive_at_step(p, step + k * spp, spp)


def test_drive_profile_validation():
    with pytest.raises(ValueError):
        DriveProfile(1.0, 0.0)
    with pytest.raises(ValueError):
        DriveProfile(-1.0, 1.0)
    with pytest.raises(ValueError):
        ClassicalParams(gamma=-0.1)


# right-hand side

def test_rhs_drive_only():
    assert classical_rhs(0j, 1.0, PRINTED, DriveProfile(1.0, 8.0)) == 1 + 0j


def test_rhs_real_state():
    val = classical_rhs(1 + 0j, 0.0, PRINTED, DriveProfile(0.0, 8.0))
    assert val == pytest.approx(-0.025 - 0.008j, abs=1e-15)


def test_rhs_conjugated_term():
    params = ClassicalParams(chi=1.0, gamma=0.0, conjugate_nonlinearity=True)
    assert classical_rhs(1j, 0.0, params, DriveProfile(0.0, 8.0)) == pytest.approx(-1 + 0j)


def test_rhs_standard_kerr_term():
    params = ClassicalParams(chi=1.0, gamma=0.0)
    assert classical_rhs(1j, 0.0, params, DriveProfile(0.0, 8.0)) == pytest.approx(1 + 0j)


# integration

def test_analytic_decay(backend):
    params = ClassicalParams(chi=0.0, gamma=0.05)
    re, im = integrate_classical(2 + 0j, params, DriveProfile(0.0, 8.0), 40.0, backend=backend)
    assert re.times[-1] == pytest.approx(40.0)
    assert abs(re.values[-1] - 2 * math.exp(-1)) < 1e-6
    assert np.all(im.values == 0)


def test_rk4_fourth_order():
    params = ClassicalParams(chi=0.0, gamma=0.05)
    exact = 2 * math.exp(-1)
    drive = DriveProfile(0.0, 40.0)
    errs = []
    for dt in (4.0, 2.0, 1.0):
        re, _ = integrate_classical(2 + 0j, params, drive, 40.0, dt=dt, sample_interval=dt)
        errs.append(abs(re.values[-1] - exact))
    for coarse, fine in zip(errs, errs[1:]):
        assert 14 < coarse / fine < 18


def test_fixed_point_at_origin():
    re, im = integrate_classical(0j, ClassicalParams(), DriveProfile(0.0, 8.0), 80.0)
    assert not re.values.any() and not im.values.any()


def test_dissipation_monotone():
    re, im = integrate_classical(3 + 1j, ClassicalParams(), DriveProfile(0.0, 8.0), 200.0)
    mag = np.hypot(re.values, im.values)
    assert np.all(np.diff(mag) < 0)


def test_norm_conserved_without_damping():
    params = ClassicalParams(chi=0.008, gamma=0.0)
    drive = DriveProfile(0.0, 8.0)
    drifts = []
    for dt in (8.0 / 100, 8.0 / 200):
        re, im = integrate_classical(3 + 1j, params, drive, 80.0, dt=dt, sample_interval=8.0)
        drifts.append(abs(np.hypot(re.values[-1], im.values[-1]) - math.hypot(3, 1)))
    assert drifts[0] < 1e-6
    # RK4 drift scales like dt^4 (or better)
    assert drifts[1] < drifts[0] / 8 or drifts[1] < 1e-13


def test_printed_conjugate_form_diverges():
    with pytest.raises(NonFiniteState):
        integrate_classical(0j, PRINTED, DriveProfile(1.0, 8.0), 400.0)


def test_regular_cell_is_period_one():
    re, _ = integrate_classical(0j, ClassicalParams(), DriveProfile(1.0, 8.0), 500 * 8.0,
                                sample_interval=8.0)
    strobe = re.values[400:]
    assert np.max(np.abs(np.diff(strobe))) < 1e-3


def test_deterministic_and_backends_agree():
    args = (0.3j, ClassicalParams(), DriveProfile(4.5, 8.0), 80.0)
    a, _ = integrate_classical(*args, backend="compiled")
    b, _ = integrate_classical(*args, backend="compiled")
    c, _ = integrate_classical(*args, backend="python")
    assert np.array_equal(a.values, b.values)
    np.testing.assert_allclose(a.values, c.values, rtol=0, atol=1e-9)


def test_sampling_grid():
    re, _ = integrate_classical(1 + 0j, ClassicalParams(), DriveProfile(1.0, 8.0), 16.0)
    assert len(re) == 41 and re.dt == pytest.approx(0.4)
    with pytest.raises(ValueError):
        step_grid(8.0, 8.0 / 2001)
    with pytest.raises(ValueError):
        step_grid(8.0, 8.0 / 2000, sample_interval=0.0061)


# bifurcation

def test_bifurcation_undriven_column():
    (row,) = bifurcation_scan([0.0], 10.0, ClassicalParams())
    assert row.ok and len(row.samples) == 59
    assert np.max(np.abs(row.samples)) < 1e-3


def test_bifurcation_regular_vs_banded():
    rows = bifurcation_scan([1.0, 4.5], 10.0, ClassicalParams())
    assert rows[0].spread < 1e-3
    assert rows[1].spread > 1.0


def test_bifurcation_flags_divergent_cells():
    rows = bifurcation_scan([0.0, 1.0], 8.0, PRINTED, n_min=5, n_max=60)
    assert rows[0].ok
    assert not rows[1].ok and math.isnan(rows[1].spread)
    with pytest.raises(ValueError):
        bifurcation_scan([1.0], 10.0, ClassicalParams(), n_min=5, n_max=5)
