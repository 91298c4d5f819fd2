import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_dressing
from transducer.classification import classify, rank2
from transducer.errors import AlreadyMatched, DegenerateStrengths, Uncorrectable, ZeroTransmissionPath
from transducer.interference import (
    HOMODYNE_FEEDFORWARD,
    INJECT_SQUEEZING,
    READ_OUT,
    WRITE_IN,
    correct,
    finish,
    homodyne_sigma,
    matching_gain,
    six_pass_composite,
    six_pass_gains,
    six_pass_swap,
    sqnd_dagger,
)
from transducer.symplectic import SWAP, amplify, beam_splitter, block, gate, local, qnd, sqnd, two_mode_squeezer

strength = st.floats(0.05, 5.0).flatmap(lambda x: st.sampled_from([x, -x]))


def rapid_bs_expected(theta):
    c, t = 1 / math.tan(theta), math.tan(theta)
    eta = 1 - t * t
    E = np.zeros((4, 4))
    E[0, 0], E[0, 2], E[2, 0] = eta * c * c, c, -c
    E[1, 3], E[3, 1], E[3, 3] = t, -t, eta
    return E


def test_matching_gain_examples():
    th = 0.3
    bs = np.array([[math.cos(th), math.sin(th)], [-math.sin(th), math.cos(th)]])
    assert matching_gain(bs, bs) == pytest.approx(1 / math.tan(th) ** 2, rel=1e-14)
    r = 0.7
    ch, sh = math.cosh(r), math.sinh(r)
    tms = np.array([[ch, sh], [sh, ch]])
    assert matching_gain(tms, tms) == pytest.approx(-1 / math.tanh(r) ** 2, rel=1e-14)


def test_matching_gain_signals():
    with pytest.raises(AlreadyMatched):
        matching_gain([[1, 0.5], [0, 0]], [[1, 0], [0.5, 1]])
    with pytest.raises(ZeroTransmissionPath):
        matching_gain([[1, 0], [0, 1]], [[1, 0], [0.5, 1]])


@pytest.mark.parametrize("theta", [math.pi / 20, math.pi / 10, math.pi / 6, math.pi / 4])
def test_rapid_bs_composite(theta):
    plan = correct(beam_splitter(theta), beam_splitter(theta))
    assert plan.gamma == pytest.approx(1 / math.tan(theta) ** 2, rel=1e-13)
    assert np.max(np.abs(plan.composite - rapid_bs_expected(theta))) < 1e-12
    assert plan.eta == pytest.approx(abs(1 - math.tan(theta) ** 2), abs=1e-12)


def test_rapid_bs_quarter_turn_is_swap_class():
    plan = correct(beam_splitter(math.pi / 4), beam_splitter(math.pi / 4))
    assert plan.resulting_class.key == (2, 0)


def test_two_tms_standard_sqnd():
    r = 0.7
    plan = correct(two_mode_squeezer(r), two_mode_squeezer(r))
    assert plan.gamma == pytest.approx(-1 / math.tanh(r) ** 2, rel=1e-13)
    G = local(amplify(-math.tanh(r)))
    assert np.allclose(G @ plan.composite @ G, sqnd(1 + math.tanh(r) ** 2), atol=1e-12)


def _random_correctable(rng):
    kind = rng.choice(["qnd", "qnd_p", "bs", "tms", "swapped_tms"])
    p = rng.uniform(0.2, 1.3) * rng.choice([-1, 1])
    return random_dressing(rng, gate(kind, p))


def test_random_pairs_reach_swap_classes(rng):
    for _ in range(300):
        plan = correct(_random_correctable(rng), _random_correctable(rng))
        assert plan.resulting_class.key in ((2, 1), (2, 0))
        assert rank2(block(plan.composite, 2, 2), 1e-9) <= 1


def test_composite_is_product_of_dressed_passes(rng):
    A, B = _random_correctable(rng), _random_correctable(rng)
    plan = correct(A, B)
    fI, fIII = plan.form_I, plan.form_III
    dressed_I = local(fI.L_out_1, fI.L_out_2) @ A @ local(fI.L_in_1, fI.L_in_2)
    dressed_III = local(fIII.L_out_1, fIII.L_out_2) @ B @ local(fIII.L_in_1, fIII.L_in_2)
    assert np.allclose(dressed_III @ local(amplify(plan.gamma)) @ dressed_I, plan.composite, atol=1e-12)


def test_identity_class_is_uncorrectable():
    with pytest.raises(Uncorrectable):
        correct(np.eye(4), beam_splitter(0.3))


def test_passthrough_for_sqnd_input(rng):
    plan = correct(random_dressing(rng, sqnd(0.4)), beam_splitter(0.3))
    assert plan.passthrough and plan.form_III is None
    assert plan.resulting_class.key == (2, 1)


def test_direction_picks_finishing():
    a = correct(beam_splitter(0.2), beam_splitter(0.2), WRITE_IN, epsilon=0.1)
    b = correct(beam_splitter(0.2), beam_splitter(0.2), READ_OUT, r=1.0)
    assert a.finishing.tag == HOMODYNE_FEEDFORWARD
    assert a.finishing.residual_sigma == pytest.approx(a.eta * math.sqrt(0.1))
    assert b.finishing.tag == INJECT_SQUEEZING
    assert b.finishing.residual_sigma == pytest.approx(b.eta * math.exp(-1.0))
    with pytest.raises(ValueError):
        correct(beam_splitter(0.2), beam_splitter(0.2), "sideways")


def test_finish_examples():
    plan = correct(beam_splitter(0.2), beam_splitter(0.2), READ_OUT)
    assert finish(plan).residual_sigma == 0.0
    assert finish(plan, r=50.0).residual_sigma < 1e-20
    assert finish(plan, epsilon=0.0, eta_D=plan.eta).residual_sigma == pytest.approx(0, abs=1e-15)
    sigma, eta_D = homodyne_sigma(1.0, 0.1)
    assert sigma == pytest.approx(0.31622776601683794, abs=1e-15)
    assert eta_D == pytest.approx(math.sqrt(0.9))
    with pytest.raises(ValueError):
        finish(plan, r=1.0, epsilon=0.1)


def test_finish_monotone():
    plan = correct(beam_splitter(0.2), beam_splitter(0.2))
    rs = [finish(plan, r=r).residual_sigma for r in np.linspace(0, 5, 11)]
    assert all(a > b for a, b in zip(rs, rs[1:]))
    es = [finish(plan, epsilon=e).residual_sigma for e in np.linspace(0, 1, 11)]
    assert all(a < b for a, b in zip(es, es[1:]))


def test_optimal_eta_D_minimizes_sigma():
    eta, eps = 0.8, 0.3
    best, eta_D = homodyne_sigma(eta, eps)
    for d in np.linspace(0, 1.5, 61):
        assert homodyne_sigma(eta, eps, d)[0] >= best - 1e-15


@settings(max_examples=100, deadline=None)
@given(eta=strength, gamma=strength)
def test_gain_sandwich(eta, gamma):
    G = local(amplify(gamma))
    Gd = local(amplify(1 / gamma))
    assert np.allclose(Gd @ qnd(eta) @ G, qnd(eta / gamma), atol=1e-12 * (1 + abs(eta / gamma)))


def test_dagger_is_inverse():
    for eta in (0.3, -1.7):
        assert np.allclose(sqnd_dagger(eta) @ sqnd(eta), np.eye(4), atol=1e-15)


def test_six_pass_examples():
    res = six_pass_swap(1.0, 1.0, 1.0)
    assert (res.gamma1, res.gamma2) == (0.5, 0.5)
    assert np.max(np.abs(res.composite - SWAP)) < 1e-12
    res = six_pass_swap(1.0, 2.0, 1.0)
    assert (res.gamma1, res.gamma2) == (1.0, 1.0)
    assert np.max(np.abs(res.composite - SWAP)) < 1e-10


def test_six_pass_merged_strength():
    e1, e2, e3, g1, g2 = 0.7, 2.0, 0.4, 1.0, 1.0
    M = six_pass_composite(e1, e2, e3, g1, g2)
    assert np.allclose(M, sqnd((g2 * e3 - e2 + g1 * e1) / (g1 * g2)), atol=1e-14)


def test_six_pass_gain_fallbacks():
    assert six_pass_gains(2.0, 3.0, 1.0) == (1.0, 1.0)
    assert six_pass_gains(1.0, 3.0, 3.0) == (1.0, 2.0 / 3.0)
    with pytest.raises(DegenerateStrengths):
        six_pass_gains(0.0, 1.0, 1.0)


@settings(max_examples=300, deadline=None)
@given(strength, strength, strength)
def test_six_pass_property(e1, e2, e3):
    g1, g2 = six_pass_gains(e1, e2, e3)
    assert g1 != 0 and g2 != 0
    assert g1 * e1 + g2 * e3 == pytest.approx(e2, rel=1e-12, abs=1e-12)
    assert np.max(np.abs(six_pass_swap(e1, e2, e3).composite - SWAP)) < 1e-10


def test_correction_composite_class_matches_classifier():
    plan = correct(beam_splitter(0.3), two_mode_squeezer(0.4))
    assert plan.resulting_class == classify(plan.composite)
