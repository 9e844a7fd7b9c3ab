import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridmotion.ratfun import (
    ImproperError,
    PoleEvaluationError,
    Polynomial,
    RationalTF,
    RootFindingError,
    StateSpaceModel,
    TransferFunctionError,
    discretize_tustin,
    format_tf,
    parse_tf,
    poly_roots,
    ss_to_tf,
    tf_add,
    tf_evaluate,
    tf_feedback,
    tf_invert,
    tf_is_stable,
    tf_multiply,
    tf_to_state_space,
)
from hybridmotion.synthesis import nominal_plant, soft_branch

GRID = np.logspace(-2, 5, 60)


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.abs(b)))


# -- Polynomial --------------------------------------------------------------


def test_polynomial_trims_trailing_zeros():
    p = Polynomial([1.0, 2.0, 0.0, 0.0])
    assert p.degree == 1
    assert p.coeffs.tolist() == [1.0, 2.0]


def test_polynomial_zero():
    assert Polynomial([0.0, 0.0]).is_zero
    assert Polynomial([0.0]).degree == 0


def test_polynomial_rejects_empty_and_nan():
    with pytest.raises(ValueError):
        Polynomial([])
    with pytest.raises(ValueError):
        Polynomial([1.0, float("nan")])


def test_polynomial_arithmetic():
    p = Polynomial([1.0, 1.0])
    q = Polynomial([-1.0, 1.0])
    assert (p * q).coeffs.tolist() == [-1.0, 0.0, 1.0]
    assert (p + q).coeffs.tolist() == [0.0, 2.0]
    assert (p - p).is_zero


def test_polynomial_deflate_keeps_origin_roots():
    # s^2 (s + 3)(s + 5) / (s + 3) -> s^2 (s + 5)
    p = Polynomial([0.0, 0.0, 15.0, 8.0, 1.0])
    q = p.deflate(Polynomial([3.0, 1.0]))
    assert q.coeffs.tolist() == [0.0, 0.0, 5.0, 1.0]


def test_shift_down_requires_exact_zeros():
    assert Polynomial([0.0, 0.0, 2.0]).shift_down(2).coeffs.tolist() == [2.0]
    with pytest.raises(ValueError):
        Polynomial([1.0, 2.0]).shift_down(1)


# -- roots -------------------------------------------------------------------


def test_roots_factorable_quadratic():
    r = poly_roots(Polynomial([2.0, 3.0, 1.0]))
    np.testing.assert_allclose(np.sort(r.real), [-2.0, -1.0], atol=1e-12)
    assert np.all(r.imag == 0.0)


def test_roots_critically_damped_square():
    r = poly_roots(Polynomial([1e4, 200.0, 1.0]))
    np.testing.assert_allclose(r.real, [-100.0, -100.0], rtol=1e-6)
    assert np.all(np.abs(r.imag) < 1e-4)


def test_roots_cubic():
    r = poly_roots(Polynomial([-6.0, 11.0, -6.0, 1.0]))
    np.testing.assert_allclose(np.sort(r.real), [1.0, 2.0, 3.0], atol=1e-10)


def test_roots_complex_pairs_are_conjugate():
    r = poly_roots(Polynomial.from_roots([-1 + 2j, -1 - 2j, -3.0]))
    upper = r[r.imag > 0]
    lower = r[r.imag < 0]
    assert upper.size == lower.size == 1
    assert upper[0] == np.conj(lower[0])
    np.testing.assert_allclose(upper[0], -1 + 2j, atol=1e-12)


def test_roots_residual_meets_tolerance():
    p = Polynomial([3.0, -7.0, 0.5, 2.0, 1.0])
    tol = 1e-9
    coeff_norm = np.sum(np.abs(p.coeffs))
    for r in poly_roots(p, tol):
        scale = np.sum(np.abs(p.coeffs) * np.abs(r) ** np.arange(p.coeffs.size))
        assert abs(p(r)) <= tol * max(scale, coeff_norm)


def test_roots_zero_roots_exact():
    r = poly_roots(Polynomial([0.0, 0.0, 1.0, 1.0]))
    assert sorted(r.real.tolist()) == [-1.0, 0.0, 0.0]


def test_roots_need_degree_one():
    with pytest.raises(ValueError):
        poly_roots(Polynomial([3.0]))


def test_roots_failure_names_polynomial():
    # an absurd tolerance cannot be met by either method
    with pytest.raises(RootFindingError, match="Polynomial"):
        poly_roots(Polynomial([1.0, 3.3, 1.7, 0.9]), tol=0.0)


@settings(max_examples=150, deadline=None)
@given(
    st.lists(
        st.floats(min_value=-10.0, max_value=10.0, allow_nan=False),
        min_size=1,
        max_size=6,
    )
)
def test_roots_from_roots_round_trip(raw):
    roots = sorted(raw)
    # well separated only
    if any(b - a < 0.5 for a, b in zip(roots, roots[1:])):
        return
    found = np.sort(poly_roots(Polynomial.from_roots(roots)).real)
    assert np.max(np.abs(found - np.array(roots))) <= 1e-6


# -- canonical form ----------------------------------------------------------


def test_canonical_monic_denominator():
    tf = RationalTF([2.0, 4.0], [4.0, 2.0])
    assert tf.den.leading == 1.0
    assert tf.num.coeffs.tolist() == [1.0, 2.0]
    assert tf.den.coeffs.tolist() == [2.0, 1.0]


def test_canonical_zero_function():
    tf = RationalTF([0.0], [1.0, 5.0])
    assert tf.is_zero
    assert tf.den.coeffs.tolist() == [1.0]


def test_zero_denominator_rejected():
    with pytest.raises(TransferFunctionError):
        RationalTF([1.0], [0.0])


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(-100, 100, allow_nan=False), min_size=1, max_size=4),
    st.lists(st.floats(-100, 100, allow_nan=False), min_size=2, max_size=5).filter(lambda c: abs(c[-1]) > 1e-3),
)
def test_canonicalization_idempotent(num, den):
    a = RationalTF(num, den)
    b = RationalTF(a.num, a.den)
    assert np.array_equal(a.num.coeffs, b.num.coeffs)
    assert np.array_equal(a.den.coeffs, b.den.coeffs)


def test_relative_degree_and_properness():
    G = nominal_plant()
    assert G.relative_degree == 2
    assert G.is_proper
    assert not G.inv().is_proper


# -- interconnection ---------------------------------------------------------


def test_feedback_constant():
    H = tf_feedback(RationalTF.constant(1.0))
    assert H.num.coeffs.tolist() == [0.5]
    assert H.den.coeffs.tolist() == [1.0]


def test_feedback_critically_damped_pair():
    w0 = 100.0
    H = tf_feedback(RationalTF([w0**2], [0.0, 2 * w0, 1.0]))
    assert H.equivalent(RationalTF([w0**2], [w0**2, 2 * w0, 1.0]), rtol=1e-15)


def test_feedback_zero():
    assert tf_feedback(RationalTF.constant(0.0)).is_zero


def test_feedback_degenerate():
    with pytest.raises(TransferFunctionError):
        tf_feedback(RationalTF.constant(-1.0))


def test_feedback_keeps_unstable_common_factor():
    # L = (s - 1)/((s - 1)(s + 2)): the unstable factor must stay visible
    L = RationalTF(Polynomial.from_roots([1.0]), Polynomial.from_roots([1.0, -2.0]))
    H = tf_feedback(L)
    assert H.den.degree == 2
    assert not tf_is_stable(H)


def test_multiply_integrator_by_s():
    one = tf_multiply(RationalTF([1.0], [0.0, 1.0]), RationalTF.s())
    assert one.cancel_origin().equivalent(RationalTF.constant(1.0))
    np.testing.assert_allclose(abs(one.freqresp(3.0)), 1.0)


def test_invert_plant():
    K, tau = 0.0408, 0.00668
    inv = tf_invert(nominal_plant(K, tau))
    np.testing.assert_allclose(inv.num.coeffs, [0.0, 1.0 / K, tau / K], rtol=1e-15)
    assert inv.den.coeffs.tolist() == [1.0]


def test_invert_zero_fails():
    with pytest.raises(TransferFunctionError):
        tf_invert(RationalTF.constant(0.0))


def test_add_equal_denominators():
    a = RationalTF([1.0], [1.0, 1.0])
    s = tf_add(a, a)
    assert s.num.coeffs.tolist() == [2.0]
    assert s.den.coeffs.tolist() == [1.0, 1.0]


def test_stable_common_factor_cancelled():
    a = RationalTF([1.0], [2.0, 1.0])
    b = RationalTF([2.0, 1.0], [3.0, 1.0])
    p = tf_multiply(a, b)
    assert p.den.degree == 1
    np.testing.assert_allclose(p.den.coeffs, [3.0, 1.0])


tf_strategy = st.builds(
    lambda z, p, k: RationalTF.from_zpk(z, p, k),
    st.lists(st.floats(-50, -0.1), max_size=2),
    st.lists(st.floats(-50, -0.1), min_size=1, max_size=3),
    st.floats(0.1, 10.0),
).filter(lambda tf: tf.is_proper)


@settings(max_examples=100, deadline=None)
@given(tf_strategy, tf_strategy, tf_strategy)
def test_field_axioms(a, b, c):
    w = np.array([0.3, 2.0, 17.0])
    # commutativity and distributivity, checked on the frequency response
    np.testing.assert_allclose((a * b).freqresp(w), (b * a).freqresp(w), rtol=1e-12)
    np.testing.assert_allclose((a + b).freqresp(w), (b + a).freqresp(w), rtol=1e-12)
    left = (a * (b + c)).freqresp(w)
    right = (a * b + a * c).freqresp(w)
    np.testing.assert_allclose(left, right, rtol=1e-9)


# -- evaluation --------------------------------------------------------------


def test_evaluate_integrator():
    h = tf_evaluate(RationalTF([1.0], [0.0, 1.0]), 1.0)
    assert abs(h) == pytest.approx(1.0, abs=1e-15)
    assert np.angle(h) == pytest.approx(-math.pi / 2, abs=1e-15)


def test_evaluate_dashpot_sensitivity():
    h = tf_evaluate(RationalTF([1.0], [0.0, 100.0]), 1.0)
    assert abs(h) == pytest.approx(0.01, rel=1e-15)
    assert 20 * math.log10(abs(h)) == pytest.approx(-40.0, abs=1e-12)


def test_evaluate_two_pole_low_frequency_limit():
    G = RationalTF.from_zpk([], [-10.0, -1000.0], 1e4)
    assert abs(tf_evaluate(G, 1e-6)) == pytest.approx(1.0, abs=1e-6)


def test_evaluate_at_pole_names_omega():
    with pytest.raises(PoleEvaluationError, match="omega = 0.0"):
        RationalTF([1.0], [0.0, 1.0]).freqresp(np.array([1.0, 0.0]))
    with pytest.raises(PoleEvaluationError, match="omega = 2.0"):
        RationalTF([1.0], [4.0, 0.0, 1.0]).freqresp(2.0)


def test_static_gain():
    assert RationalTF([3.0], [2.0, 1.0]).static_gain() == 1.5
    assert RationalTF([1.0], [0.0, 1.0]).static_gain() == math.inf
    assert RationalTF([0.0, 2.0], [0.0, 4.0, 1.0]).static_gain() == 0.5


# -- stability ---------------------------------------------------------------


def test_stability_examples():
    assert tf_is_stable(RationalTF([1.0], [1.0, 1.0]))
    assert not tf_is_stable(RationalTF([1.0], [-1.0, 1.0]))
    assert tf_is_stable(RationalTF([1e4], [1e4, 200.0, 1.0]))


def test_stability_margin_excludes_origin():
    assert not tf_is_stable(RationalTF([1.0], [0.0, 1.0]))


def test_discrete_stability():
    assert tf_is_stable(RationalTF([1.0], [-0.5, 1.0]), discrete=True)
    assert not tf_is_stable(RationalTF([1.0], [-1.0, 1.0]), discrete=True)


# -- realization -------------------------------------------------------------


def test_realize_constant():
    ss = tf_to_state_space(RationalTF.constant(4.0))
    assert ss.order == 0
    assert ss.D[0, 0] == 4.0


def test_realize_first_order():
    a = 7.0
    ss = tf_to_state_space(RationalTF([1.0], [a, 1.0]))
    assert ss.A.tolist() == [[-a]]
    assert ss.B.tolist() == [[1.0]]
    assert ss.C.tolist() == [[1.0]]
    assert ss.D.tolist() == [[0.0]]


def test_realize_soft_branch_round_trip():
    tf = soft_branch(2000.0)
    ss = tf_to_state_space(tf)
    assert ss.order == tf.den.degree
    assert rel_err(ss.freqresp(GRID), tf.freqresp(GRID)) <= 1e-9
    assert ss_to_tf(ss).equivalent(tf, rtol=1e-9)


def test_realize_improper_advises_filter():
    with pytest.raises(ImproperError, match="low-pass"):
        tf_to_state_space(RationalTF([0.0, 0.0, 1.0], [1.0, 1.0]))


@settings(max_examples=100, deadline=None)
@given(tf_strategy)
def test_realization_round_trip(tf):
    ss = tf_to_state_space(tf)
    assert rel_err(ss.freqresp(GRID), tf.freqresp(GRID)) <= 1e-9


def test_state_space_dimension_check():
    with pytest.raises(ValueError):
        StateSpaceModel(np.eye(2), np.ones((3, 1)), np.ones((1, 2)), [[0.0]])


# -- Tustin ------------------------------------------------------------------


def test_tustin_integrator():
    Ts = 1e-3
    ssd = discretize_tustin(tf_to_state_space(RationalTF([1.0], [0.0, 1.0])), Ts)
    expected = RationalTF([Ts / 2, Ts / 2], [-1.0, 1.0])
    assert ss_to_tf(ssd).equivalent(expected, rtol=1e-12)


def test_tustin_constant():
    ssd = discretize_tustin(tf_to_state_space(RationalTF.constant(3.0)), 1e-4)
    assert ssd.is_discrete
    assert ssd.D[0, 0] == 3.0


def test_tustin_first_order_lag_matches_substitution():
    tau, Ts = 0.00668, 1e-4
    ssd = discretize_tustin(tf_to_state_space(RationalTF([1.0], [1.0, tau])), Ts)
    # s = (2/Ts)(z - 1)/(z + 1) in 1/(tau s + 1)
    q = 2.0 * tau / Ts
    expected = RationalTF([1.0, 1.0], [1.0 - q, 1.0 + q])
    assert ss_to_tf(ssd).equivalent(expected, rtol=1e-12)


def test_tustin_singular():
    Ts = 1e-3
    ss = tf_to_state_space(RationalTF([1.0], [-2.0 / Ts, 1.0]))
    with pytest.raises(np.linalg.LinAlgError):
        discretize_tustin(ss, Ts)


def test_tustin_rejects_discrete_input():
    ssd = discretize_tustin(tf_to_state_space(RationalTF([1.0], [1.0, 1.0])), 0.1)
    with pytest.raises(ValueError):
        discretize_tustin(ssd, 0.1)


@settings(max_examples=100, deadline=None)
@given(tf_strategy, st.sampled_from([1e-4, 1e-3, 1e-2]))
def test_tustin_preserves_dc_gain(tf, Ts):
    ssd = discretize_tustin(tf_to_state_space(tf), Ts)
    assert abs(ssd.dc_gain() - tf.static_gain()) <= 1e-9 * max(1.0, abs(tf.static_gain()))


# -- text format -------------------------------------------------------------


def test_text_round_trip():
    tf = RationalTF([0.1, 1 / 3], [2.0, 7.0, 1.0])
    text = format_tf(tf)
    assert text.startswith("num: ")
    back = parse_tf(text)
    assert np.array_equal(back.num.coeffs, tf.num.coeffs)
    assert np.array_equal(back.den.coeffs, tf.den.coeffs)


def test_parse_accepts_spacing():
    tf = parse_tf("  num: 1   / den: 0 1  ")
    assert tf.relative_degree == 1


@pytest.mark.parametrize("bad", ["1 / 2", "num: / den: 1", "num: a / den: 1", "num: 1 den: 1"])
def test_parse_rejects(bad):
    with pytest.raises(TransferFunctionError):
        parse_tf(bad)
