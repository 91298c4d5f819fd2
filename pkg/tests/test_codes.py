import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transducer.codes import (
    CatCode,
    DisplacementNoiseChannel,
    SqueezedCatCode,
    apply_channel,
    average_fidelity,
    bloch_grid,
    cat_basis,
    coherent,
    displacement_operator,
    fidelity,
    hermite_functions,
    min_truncation,
    qsp_average_fidelity,
    qsp_fidelity,
    qsp_operators,
    squeezed_cat_basis,
)
from transducer.errors import TruncationTooSmall

SQ = math.log(0.5)  # e^r = 1/2
SIGMAS = np.round(np.arange(0.0, 1.01, 0.1), 10)


def quadratures(n):
    a = np.diag(np.sqrt(np.arange(1, n)), 1)
    return (a + a.T) / math.sqrt(2), (a - a.T) / (1j * math.sqrt(2))


# -- analytic oracle: cat states as pairs of coherent states -------------------


def _coh_overlap(a, b):
    return np.exp(-abs(a) ** 2 / 2 - abs(b) ** 2 / 2 + np.conj(a) * b)


def _noisy_amplitude(theta, phi, p, alpha):
    c0, c1 = math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)
    Np = math.sqrt(2 * (1 + math.exp(-2 * alpha**2)))
    Nm = math.sqrt(2 * (1 - math.exp(-2 * alpha**2)))
    coef = {1j * alpha: c0 / Np + c1 / Nm, -1j * alpha: c0 / Np - c1 / Nm}
    b = 1j * p / math.sqrt(2)  # e^{ipq} = D(ip/sqrt2)
    tot = 0
    for g, cg in coef.items():
        for h, ch in coef.items():
            tot += np.conj(cg) * ch * np.exp(1j * np.imag(b * np.conj(h))) * _coh_overlap(g, b + h)
    return tot


def trapezoid_oracle(theta, phi, sigma, alpha, points=20001):
    ps = np.linspace(-8 * sigma, 8 * sigma, points)
    wts = np.exp(-((ps / sigma) ** 2)) / (sigma * math.sqrt(math.pi))
    vals = np.array([abs(_noisy_amplitude(theta, phi, p, alpha)) ** 2 for p in ps])
    return np.trapezoid(wts * vals, ps)


# -- bases ---------------------------------------------------------------------


def test_cat_basis_orthonormal_and_parity():
    zero, one = cat_basis(2.0, 40)
    z, o = zero.amplitudes, one.amplitudes
    assert abs(np.vdot(z, o)) < 1e-10
    assert np.linalg.norm(z) == pytest.approx(1, abs=1e-12)
    assert zero.norm_deficit < 1e-10
    assert np.max(np.abs(z[1::2])) == 0 and np.max(np.abs(o[0::2])) == 0


def test_cat_basis_matches_coherent_pair():
    zero, _ = cat_basis(1.5, 60)
    plus, _ = coherent(1.5j, 60)
    minus, _ = coherent(-1.5j, 60)
    ref = (plus + minus) / math.sqrt(2 * (1 + math.exp(-2 * 1.5**2)))
    assert np.allclose(zero.amplitudes, ref, atol=1e-12)


def test_truncation_too_small():
    with pytest.raises(TruncationTooSmall) as exc:
        cat_basis(2.0, 20)
    assert exc.value.suggested == min_truncation(2.0) == 36
    with pytest.raises(ValueError):
        cat_basis(0.0)


def test_squeezed_direct_basis():
    zero, one = squeezed_cat_basis(2.0, SQ, 200)
    assert abs(np.vdot(zero.amplitudes, one.amplitudes)) < 1e-10
    _, p = quadratures(200)
    pz = np.vdot(zero.amplitudes, p @ p @ zero.amplitudes).real
    c, _ = cat_basis(2.0, 200)
    pc = np.vdot(c.amplitudes, p @ p @ c.amplitudes).real
    # S(r) scales p by e^-r
    assert pz == pytest.approx(pc * math.exp(-2 * SQ), rel=1e-8)


# -- channel -------------------------------------------------------------------


def test_displacement_shifts_p():
    n = 80
    q, p = quadratures(n)
    vac = np.zeros(n, complex)
    vac[0] = 1
    D = displacement_operator(0.7, n)
    v = D @ vac
    assert np.vdot(v, p @ v).real == pytest.approx(0.7, abs=1e-10)
    assert np.allclose(D.conj().T @ D, np.eye(n), atol=1e-12)


@pytest.mark.parametrize("sigma", [0.1, 0.5, 1.0])
def test_channel_moments_and_trace(sigma):
    n = 60
    vac = np.zeros(n, complex)
    vac[0] = 1
    rho = apply_channel(vac, DisplacementNoiseChannel(sigma))
    q, p = quadratures(n)
    assert np.trace(rho).real == pytest.approx(1, abs=1e-8)
    assert abs(np.trace(rho @ q)) < 1e-12
    assert abs(np.trace(rho @ p)) < 1e-12
    assert np.trace(rho @ p @ p).real == pytest.approx(0.5 + sigma**2 / 2, abs=1e-8)
    assert np.allclose(rho, rho.conj().T, atol=1e-14)
    assert np.min(np.linalg.eigvalsh(rho)) > -1e-10


def test_channel_identity_at_zero():
    zero, _ = cat_basis(2.0)
    rho = apply_channel(zero, DisplacementNoiseChannel(0.0))
    assert np.allclose(rho, np.outer(zero.amplitudes, zero.amplitudes.conj()), atol=1e-10)
    with pytest.raises(ValueError):
        DisplacementNoiseChannel(-0.1)


def test_fidelity_matches_density_matrix_path():
    code = CatCode(2.0)
    zero, one = cat_basis(2.0)
    th, ph, s = 1.1, 0.4, 0.3
    psi = math.cos(th / 2) * zero.amplitudes + np.exp(1j * ph) * math.sin(th / 2) * one.amplitudes
    rho = apply_channel(psi, DisplacementNoiseChannel(s))
    assert fidelity(th, ph, s, code) == pytest.approx(np.vdot(psi, rho @ psi).real, abs=1e-12)


# -- fidelities ----------------------------------------------------------------


def test_fidelity_vs_trapezoid_oracle():
    assert fidelity(0.0, 0.0, 0.5, CatCode(2.0)) == pytest.approx(trapezoid_oracle(0.0, 0.0, 0.5, 2.0), abs=1e-6)


@settings(max_examples=15, deadline=None)
@given(st.floats(0, math.pi), st.floats(0, 2 * math.pi), st.floats(0.05, 1.0))
def test_fidelity_vs_analytic_oracle(theta, phi, sigma):
    ref = trapezoid_oracle(theta, phi, sigma, 2.0, points=4001)
    assert fidelity(theta, phi, sigma, CatCode(2.0)) == pytest.approx(ref, abs=1e-6)


def test_fidelity_at_zero_noise():
    for code in (CatCode(2.0), SqueezedCatCode(2.0, SQ), CatCode(3.0)):
        assert fidelity(0.8, 1.9, 0.0, code) == pytest.approx(1, abs=1e-8)
        assert average_fidelity(0.0, code) == pytest.approx(1, abs=1e-8)


@pytest.mark.parametrize("sigma", [0.1, 0.5, 1.0])
def test_squeezed_reduction_identity(sigma):
    s = average_fidelity(sigma, SqueezedCatCode(2.0, SQ))
    assert s == pytest.approx(average_fidelity(sigma * 0.5, CatCode(2.0)), abs=1e-12)


@pytest.mark.parametrize("sigma", [0.3, 0.8])
def test_squeezed_direct_matches_reduction(sigma):
    direct = SqueezedCatCode(2.0, SQ, method="direct")
    reduced = SqueezedCatCode(2.0, SQ)
    assert fidelity(0.7, 0.3, sigma, direct) == pytest.approx(fidelity(0.7, 0.3, sigma, reduced), abs=1e-6)


def test_frozen_averages():
    # values from the coherent-state oracle averaged on the same Bloch grid
    assert average_fidelity(0.5, CatCode(2.0)) == pytest.approx(0.94281, abs=1e-5)
    assert average_fidelity(1.0, CatCode(2.0)) == pytest.approx(0.81650, abs=1e-5)
    assert qsp_average_fidelity(0.5, 2.0) == pytest.approx(0.96474, abs=1e-5)


def test_average_matches_oracle_average():
    W, T, P, _ = bloch_grid(8)
    ref = sum(w * trapezoid_oracle(t, p, 0.5, 2.0, points=2001) for w, t, p in zip(W, T, P))
    assert average_fidelity(0.5, CatCode(2.0), bloch_order=8) == pytest.approx(ref, abs=1e-6)


def test_bloch_grid_integrates_exactly():
    W, T, P, _ = bloch_grid()
    assert W.sum() == pytest.approx(1, abs=1e-14)
    assert np.sum(W * np.cos(T) ** 2) == pytest.approx(1 / 3, abs=1e-14)
    assert np.sum(W * (np.sin(T) * np.cos(P)) ** 2) == pytest.approx(1 / 3, abs=1e-14)


def test_monotone_and_ordered():
    cat = [average_fidelity(s, CatCode(2.0)) for s in SIGMAS]
    sq = [average_fidelity(s, SqueezedCatCode(2.0, SQ)) for s in SIGMAS]
    qsp = [qsp_average_fidelity(s, 2.0) for s in SIGMAS]
    for col in (cat, sq, qsp):
        assert all(b <= a + 1e-12 for a, b in zip(col, col[1:]))
    for c, s, q in zip(cat[1:], sq[1:], qsp[1:]):
        assert s >= c and q >= c


# -- QSP -----------------------------------------------------------------------


def test_hermite_functions_orthonormal():
    x = np.linspace(-15, 15, 6001)
    h = hermite_functions(30, x)
    G = (h * (x[1] - x[0])) @ h.T
    assert np.allclose(G, np.eye(30), atol=1e-10)


def test_qsp_operator_structure():
    ops = qsp_operators(60)
    X, Y, Z = ops.X, ops.Y, ops.Z
    assert np.allclose(X, X.conj().T, atol=1e-14)
    assert np.allclose(Y, Y.conj().T, atol=1e-14)
    assert np.max(np.abs(X.real)) == 0
    m = np.arange(60)
    assert np.all(X[(m[:, None] - m[None, :]) % 2 == 0] == 0)
    assert np.allclose(Z, np.diag((-1.0) ** m))
    assert np.max(np.abs(X @ Z + Z @ X)) < 1e-8


def test_qsp_sign_idempotent_on_converged_states():
    X = qsp_operators(60).X
    for beta in (3.0, 3.5):
        for b in (1j * beta, -1j * beta):
            v, _ = coherent(b, 60)
            v = v / np.linalg.norm(v)
            assert np.linalg.norm(X @ X @ v - v) < 1e-4
            assert np.vdot(v, X @ v).real == pytest.approx(1 if b.imag > 0 else -1, abs=1e-4)


def test_qsp_zero_parity():
    zero, _ = cat_basis(2.0)
    Z = qsp_operators(60).Z
    assert np.vdot(zero.amplitudes, Z @ zero.amplitudes).real == 1.0


def test_qsp_noiseless():
    assert qsp_fidelity(0.0, 0.0, 0.0, 2.0) == pytest.approx(1, abs=1e-12)
    f = qsp_average_fidelity(0.0, 2.0)
    # cat states leak slightly to p < 0, so sign(p) is not exactly +-1 on them
    assert f == pytest.approx(1, abs=1e-3)
    assert f >= average_fidelity(0.0, CatCode(2.0)) - 1e-3


def test_qsp_pointwise_matches_average():
    W, T, P, _ = bloch_grid(6)
    ref = sum(w * qsp_fidelity(t, p, 0.4, 2.0) for w, t, p in zip(W, T, P))
    assert qsp_average_fidelity(0.4, 2.0, bloch_order=6) == pytest.approx(ref, abs=1e-12)


@pytest.mark.slow
@pytest.mark.parametrize("alpha,sigma", [(2.0, 0.5), (2.0, 1.0), (3.0, 1.5)])
def test_convergence_under_doubling(alpha, sigma):
    base = [
        average_fidelity(sigma, CatCode(alpha)),
        average_fidelity(sigma, SqueezedCatCode(alpha, SQ)),
        qsp_average_fidelity(sigma, alpha),
    ]
    big = [
        average_fidelity(sigma, CatCode(alpha, 120), order=82, bloch_order=32),
        average_fidelity(sigma, SqueezedCatCode(alpha, SQ, 120), order=82, bloch_order=32),
        qsp_average_fidelity(sigma, alpha, n_trunc=120, order=82, bloch_order=32),
    ]
    assert np.max(np.abs(np.subtract(base, big))) < 1e-6
