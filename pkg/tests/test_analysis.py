import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridmotion.analysis import (
    BodeGrid,
    FrequencySample,
    bode_magnitude,
    db,
    from_db,
    identify_first_order_integrator,
    integrator_lag_magnitude,
    step_metrics,
    synthetic_frf,
    trace_step_metrics,
)
from hybridmotion.ratfun import PoleEvaluationError, RationalTF
from hybridmotion.synthesis import critically_damped


# -- grids and Bode ----------------------------------------------------------


def test_grid_has_points_per_decade_and_ends():
    w = BodeGrid(1e-2, 1e4, 10).omegas()
    assert len(w) == 61
    assert w[0] == pytest.approx(1e-2) and w[-1] == pytest.approx(1e4)
    np.testing.assert_allclose(np.diff(np.log10(w)), 0.1)


def test_grid_validation():
    with pytest.raises(ValueError):
        BodeGrid(10.0, 1.0)
    with pytest.raises(ValueError):
        BodeGrid(0.0, 1.0)
    with pytest.raises(ValueError):
        BodeGrid(1.0, 10.0, 0)


def test_integrator_magnitude_and_slope():
    tf = RationalTF([1.0], [0.0, 100.0])
    out = bode_magnitude(tf, [1.0, 10.0])
    assert out[0].mag_db == pytest.approx(-40.0, abs=1e-12)
    assert out[1].mag_db - out[0].mag_db == pytest.approx(-20.0, abs=1e-12)
    assert out[0].phase == pytest.approx(-math.pi / 2)


def test_constant_is_flat_zero_db():
    out = bode_magnitude(RationalTF.constant(1.0), BodeGrid(1e-3, 1e3, 5))
    assert all(s.mag_db == 0.0 for s in out)


def test_target_response_is_minus_six_db_at_corner():
    out = bode_magnitude(critically_damped(100.0), [100.0])
    assert out[0].mag_db == pytest.approx(20.0 * math.log10(0.5), abs=1e-12)


def test_pole_on_grid_names_frequency():
    tf = RationalTF([1.0], [4.0, 0.0, 1.0])  # poles at +-2j
    with pytest.raises(PoleEvaluationError, match="2.0"):
        bode_magnitude(tf, [1.0, 2.0])


def test_sample_validation():
    with pytest.raises(ValueError):
        FrequencySample(0.0, 1.0)
    with pytest.raises(ValueError):
        FrequencySample(1.0, -1.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(-1e3, -1e-2), st.floats(-1e3, -1e-2))
def test_magnitude_of_product_is_sum_in_db(w, p1, p2):
    a = RationalTF.from_zpk([], [p1], 1.0)
    b = RationalTF.from_zpk([], [p2], 1.0)
    ab = bode_magnitude(a * b, [w])[0].mag_db
    assert ab == pytest.approx(bode_magnitude(a, [w])[0].mag_db + bode_magnitude(b, [w])[0].mag_db, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-12, 1e12))
def test_db_round_trip(m):
    assert from_db(db(m)) == pytest.approx(m, rel=1e-12)


# -- step metrics ------------------------------------------------------------


def _critical_settling(band: float) -> float:
    # solve (1 + x) e^-x = band by bisection on x > 1
    lo, hi = 1.0, 50.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if (1.0 + mid) * math.exp(-mid) > band:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_critically_damped_step():
    w0 = 100.0
    t = np.linspace(0.0, 0.2, 200001)
    y = 1.0 - (1.0 + w0 * t) * np.exp(-w0 * t)
    m = step_metrics(t, y, 1.0)
    assert m.overshoot == 0.0
    assert m.settled
    assert m.settling_time_2pct == pytest.approx(_critical_settling(0.02) / w0, abs=2e-6)
    assert m.steady_state_error < 1e-6


def test_underdamped_overshoot():
    zeta, wn = 0.5, 10.0
    wd = wn * math.sqrt(1 - zeta**2)
    t = np.linspace(0.0, 3.0, 30001)
    y = 1 - np.exp(-zeta * wn * t) * (np.cos(wd * t) + zeta / math.sqrt(1 - zeta**2) * np.sin(wd * t))
    m = step_metrics(t, y, 1.0)
    assert m.overshoot == pytest.approx(math.exp(-math.pi * zeta / math.sqrt(1 - zeta**2)), rel=1e-6)


def test_constant_trace_at_target():
    t = np.linspace(0.0, 1.0, 11)
    m = step_metrics(t, np.full(11, 2.0), 2.0)
    assert (m.overshoot, m.settling_time_2pct, m.steady_state_error, m.settled) == (0.0, 0.0, 0.0, True)


def test_never_settling_is_flagged():
    t = np.linspace(0.0, 1.0, 101)
    m = step_metrics(t, np.sin(20 * t), 1.0, y0=0.0)
    assert not m.settled
    assert math.isnan(m.settling_time_2pct)


def test_trace_step_metrics_uses_records():
    from hybridmotion.simcore import Mode, TraceRecord

    recs = [TraceRecord(0.1 * k, 1.0, min(1.0, 0.1 * k), 0.0, 0.0, 0.0, 0.0, Mode.STIFF, False) for k in range(30)]
    m = trace_step_metrics(recs, 1.0, t_step=0.5)
    assert m.overshoot == 0.0
    assert m.settled


# -- identification ----------------------------------------------------------


OMEGA = np.logspace(0, 3, 30)


def test_identify_noiseless():
    K, tau, res = identify_first_order_integrator(synthetic_frf(OMEGA, 0.0408, 0.00668))
    assert K == pytest.approx(0.0408, rel=1e-6)
    assert tau == pytest.approx(0.00668, rel=1e-6)
    assert res < 1e-8


def test_identify_pure_integrator():
    K, tau, _ = identify_first_order_integrator(synthetic_frf(OMEGA, 2.0, 0.0))
    assert K == pytest.approx(2.0, rel=1e-6)
    assert tau < 1.0 / (100.0 * OMEGA.max())


@pytest.mark.parametrize("K", [1e-3, 10.0])
@pytest.mark.parametrize("tau", [1e-4, 0.1])
def test_identify_parameter_box_corners(K, tau):
    Kh, tauh, _ = identify_first_order_integrator(synthetic_frf(OMEGA, K, tau))
    assert Kh == pytest.approx(K, rel=1e-4)
    assert tauh == pytest.approx(tau, rel=1e-3)


def test_identify_with_noise_is_close():
    rng = np.random.default_rng(3)
    K, tau, res = identify_first_order_integrator(synthetic_frf(OMEGA, 0.0408, 0.00668, noise=0.02, rng=rng))
    assert K == pytest.approx(0.0408, rel=0.05)
    assert tau == pytest.approx(0.00668, rel=0.1)
    assert 0.005 < res < 0.05


def test_identify_needs_three_samples():
    with pytest.raises(ValueError, match="3 samples"):
        identify_first_order_integrator(synthetic_frf([1.0, 100.0], 1.0, 0.01))


def test_identify_needs_one_decade():
    with pytest.raises(ValueError, match="decade"):
        identify_first_order_integrator(synthetic_frf(np.linspace(1.0, 5.0, 10), 1.0, 0.01))


def test_magnitude_model_matches_transfer_function():
    tf = RationalTF([0.0408], [0.0, 1.0, 0.00668])
    w = np.logspace(-1, 4, 17)
    direct = [abs(tf.freqresp(x)) for x in w]
    np.testing.assert_allclose(integrator_lag_magnitude(w, 0.0408, 0.00668), direct, rtol=1e-13)
