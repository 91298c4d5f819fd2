"""Logical fidelity of bosonic qubit codes under p-displacement noise.

The noise channel is the Gaussian mixture

    rho -> int dp exp(-(p/sigma)^2) / (sigma sqrt(pi)) e^{i p q} rho e^{-i p q}

evaluated by Gauss-Hermite quadrature in a truncated Fock basis. Codes:

* cat code, ``|0/1_L> ~ |i alpha> +- |-i alpha>``;
* squeezed cat code, the cat basis acted on by ``S(r)``; its fidelity equals
  the cat fidelity at ``sigma * e^r``;
* QSP readout of a noisy cat state, using photon-number parity and
  ``sign(p)`` as logical operators.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal, expm
from scipy.special import gammaln, roots_hermite, roots_legendre

from .errors import TruncationTooSmall

DEFAULT_NTRUNC = 60
DEFAULT_ORDER = 41
BLOCH_ORDER = 16
NORM_DEFICIT_TOL = 1e-6


@dataclass(frozen=True)
class FockVector:
    """Normalized Fock amplitudes and the weight lost to truncation."""

    amplitudes: np.ndarray
    norm_deficit: float

    @property
    def n_trunc(self):
        return self.amplitudes.shape[0]


@dataclass(frozen=True)
class DisplacementNoiseChannel:
    sigma: float
    order: int = DEFAULT_ORDER

    def __post_init__(self):
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be finite and nonnegative, got {self.sigma!r}")
        if self.order < 1:
            raise ValueError("quadrature order must be positive")

    def nodes(self):
        """Displacements ``p_j`` and weights ``w_j`` summing to 1."""
        if self.sigma == 0:
            return np.zeros(1), np.ones(1)
        x, w = roots_hermite(self.order)
        return self.sigma * x, w / math.sqrt(math.pi)


@dataclass(frozen=True)
class QspOperators:
    X: np.ndarray
    Y: np.ndarray
    Z: np.ndarray


@dataclass(frozen=True)
class CatCode:
    alpha: float
    n_trunc: int = DEFAULT_NTRUNC


@dataclass(frozen=True)
class SqueezedCatCode:
    """Cat code squeezed by ``S(r)``; ``r < 0`` amplifies p.

    ``method="reduction"`` uses the rescaled noise width; ``"direct"``
    builds the squeezed states explicitly in a ``direct_n_trunc`` basis.
    """

    alpha: float
    r: float
    n_trunc: int = DEFAULT_NTRUNC
    method: str = "reduction"
    direct_n_trunc: int = 200


# -- Fock-space primitives ---------------------------------------------------


def min_truncation(alpha):
    return int(math.ceil(alpha**2 + 8 * alpha + 16))


def coherent(beta, n_trunc):
    """Truncated coherent state ``|beta>`` (unnormalized) and its norm deficit."""
    n = np.arange(n_trunc)
    if beta == 0:
        amps = np.zeros(n_trunc, dtype=complex)
        amps[0] = 1.0
        return amps, 0.0
    mag = np.exp(-0.5 * abs(beta) ** 2 + n * math.log(abs(beta)) - 0.5 * gammaln(n + 1))
    amps = mag * np.exp(1j * n * np.angle(beta))
    return amps, float(max(0.0, 1.0 - np.sum(mag**2)))


def position_eigensystem(n_trunc):
    """Eigenvalues and eigenvectors of the truncated ``q = (a + a^dag)/sqrt(2)``."""
    off = np.sqrt(np.arange(1, n_trunc) / 2.0)
    return eigh_tridiagonal(np.zeros(n_trunc), off)


@lru_cache(maxsize=8)
def _position_cached(n_trunc):
    x, V = position_eigensystem(n_trunc)
    x.flags.writeable = False
    V.flags.writeable = False
    return x, V


def displace_p(vecs, p):
    """Apply ``exp(i p q)`` to a state vector or to the columns of a matrix."""
    vecs = np.asarray(vecs, dtype=complex)
    x, V = _position_cached(vecs.shape[0])
    phase = np.exp(1j * p * x)
    if vecs.ndim == 1:
        return V @ (phase * (V.T @ vecs))
    return V @ (phase[:, None] * (V.T @ vecs))


def displacement_operator(p, n_trunc):
    """Dense ``exp(i p q)`` in the truncated basis."""
    x, V = _position_cached(n_trunc)
    return (V * np.exp(1j * p * x)) @ V.T


# -- code bases ----------------------------------------------------------------


def cat_basis(alpha, n_trunc=DEFAULT_NTRUNC):
    """Even and odd cat states ``(|i alpha> +- |-i alpha>) / N_pm``."""
    if not (alpha > 0 and math.isfinite(alpha)):
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    need = min_truncation(alpha)
    if n_trunc < need:
        raise TruncationTooSmall(f"n_trunc={n_trunc} is below {need} for alpha={alpha}", suggested=need)
    plus, deficit = coherent(1j * alpha, n_trunc)
    parity = (-1.0) ** np.arange(n_trunc)
    minus = plus * parity
    if deficit > NORM_DEFICIT_TOL:
        raise TruncationTooSmall(
            f"coherent-state norm deficit {deficit:.2e} exceeds {NORM_DEFICIT_TOL}", suggested=2 * n_trunc
        )
    out = []
    for s in (1.0, -1.0):
        v = plus + s * minus
        v = v / np.linalg.norm(v)
        out.append(FockVector(v, deficit))
    return tuple(out)


def squeeze_operator(r, n_trunc):
    """``exp(-r/2 (a^2 - a^dag^2))``, which scales p by ``e^-r`` in the Heisenberg picture."""
    a = np.diag(np.sqrt(np.arange(1, n_trunc)), 1)
    return expm(-0.5 * r * (a @ a - a.T @ a.T))


def squeezed_cat_basis(alpha, r, n_trunc=200):
    need = min_truncation(alpha * math.exp(abs(r))) + 20
    if n_trunc < need:
        raise TruncationTooSmall(f"n_trunc={n_trunc} too small for alpha={alpha}, r={r}", suggested=need)
    zero, one = cat_basis(alpha, n_trunc)
    S = squeeze_operator(r, n_trunc)
    out = []
    for v in (zero, one):
        w = S @ v.amplitudes
        # weight in the top tenth of the basis estimates truncation leakage
        tail = float(np.sum(np.abs(w[-n_trunc // 10:]) ** 2))
        if tail > NORM_DEFICIT_TOL:
            raise TruncationTooSmall(f"squeezed state leaks {tail:.2e} into the cutoff", suggested=2 * n_trunc)
        out.append(FockVector(w / np.linalg.norm(w), max(v.norm_deficit, tail)))
    return tuple(out)


def basis_matrix(code):
    """``n_trunc x 2`` matrix whose columns are the logical basis states."""
    if isinstance(code, CatCode):
        zero, one = cat_basis(code.alpha, code.n_trunc)
    elif isinstance(code, SqueezedCatCode) and code.method == "direct":
        zero, one = squeezed_cat_basis(code.alpha, code.r, code.direct_n_trunc)
    elif isinstance(code, SqueezedCatCode):
        zero, one = cat_basis(code.alpha, code.n_trunc)
    else:
        raise TypeError(f"unsupported code {code!r}")
    return np.column_stack([zero.amplitudes, one.amplitudes])


def _effective_sigma(sigma, code):
    if isinstance(code, SqueezedCatCode):
        if code.method not in ("reduction", "direct"):
            raise ValueError(f"unknown method {code.method!r}")
        if code.method == "reduction":
            return sigma * math.exp(code.r)
    return sigma


def logical_state(theta, phi):
    return np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])


# -- channel -----------------------------------------------------------------


def apply_channel(state, channel):
    """Density matrix after the displacement-noise channel.

    ``state`` is a ``FockVector``, a state vector or a density matrix.
    """
    if isinstance(state, FockVector):
        state = state.amplitudes
    state = np.asarray(state, dtype=complex)
    rho = np.outer(state, state.conj()) if state.ndim == 1 else state
    p, w = channel.nodes()
    out = np.zeros_like(rho)
    for pj, wj in zip(p, w):
        D = displacement_operator(pj, rho.shape[0])
        out += wj * (D @ rho @ D.conj().T)
    return out


def _logical_displacements(B, channel):
    """Weights and the 2x2 blocks ``B^dag e^{i p_j q} B``."""
    p, w = channel.nodes()
    x, V = _position_cached(B.shape[0])
    C = V.T @ B
    phases = np.exp(1j * np.outer(p, x))
    M = np.einsum("ka,jk,kb->jab", C.conj(), phases, C)
    return w, M


def fidelity(theta, phi, sigma, code, order=DEFAULT_ORDER):
    """Fidelity of the noisy logical state ``|theta, phi>`` with the ideal one."""
    channel = DisplacementNoiseChannel(_effective_sigma(sigma, code), order)
    w, M = _logical_displacements(basis_matrix(code), channel)
    c = logical_state(theta, phi)
    amp = np.einsum("a,jab,b->j", c.conj(), M, c)
    return float(np.sum(w * np.abs(amp) ** 2))


def bloch_grid(order=BLOCH_ORDER):
    """Unit-sum weights and logical states for a sphere average."""
    u, wu = roots_legendre(order)
    theta = np.arccos(u)
    phi = 2 * np.pi * np.arange(order) / order
    T, P = np.meshgrid(theta, phi, indexing="ij")
    W = np.repeat(wu[:, None] / (2.0 * order), order, axis=1)
    states = np.stack(
        [np.cos(T / 2).astype(complex), np.exp(1j * P) * np.sin(T / 2)], axis=-1
    ).reshape(-1, 2)
    return W.ravel(), T.ravel(), P.ravel(), states


def average_fidelity(sigma, code, order=DEFAULT_ORDER, bloch_order=BLOCH_ORDER):
    """Bloch-sphere average of ``fidelity``."""
    channel = DisplacementNoiseChannel(_effective_sigma(sigma, code), order)
    w, M = _logical_displacements(basis_matrix(code), channel)
    W, _, _, c = bloch_grid(bloch_order)
    amp = np.einsum("sa,jab,sb->sj", c.conj(), M, c)
    return float(np.sum(W * (np.abs(amp) ** 2 @ w)))


# -- QSP ---------------------------------------------------------------------


def hermite_functions(n_max, x):
    """Normalized Hermite functions ``h_0..h_{n_max-1}`` at points ``x``."""
    x = np.asarray(x, dtype=float)
    h = np.empty((n_max, x.size))
    h[0] = math.pi**-0.25 * np.exp(-0.5 * x**2)
    if n_max > 1:
        h[1] = math.sqrt(2.0) * x * h[0]
    for n in range(1, n_max - 1):
        h[n + 1] = math.sqrt(2.0 / (n + 1)) * x * h[n] - math.sqrt(n / (n + 1)) * h[n - 1]
    return h


@lru_cache(maxsize=8)
def _qsp_cached(n_trunc):
    L = math.sqrt(2 * n_trunc + 1) + 12.0
    xg, wg = roots_legendre(4 * n_trunc + 200)
    x = 0.5 * L * (xg + 1.0)
    w = 0.5 * L * wg
    h = hermite_functions(n_trunc, x)
    S = 2.0 * (h * w) @ h.T
    m = np.arange(n_trunc)
    diff = m[:, None] - m[None, :]
    # momentum wavefunction of |n> is (-i)^n h_n(p)
    X = (1j ** (diff % 4)) * S
    X[diff % 2 == 0] = 0.0
    X[np.abs(X) < 1e-12] = 0.0
    Z = np.diag((-1.0) ** m).astype(complex)
    Y = 1j * X @ Z
    for A in (X, Y, Z):
        A.flags.writeable = False
    return QspOperators(X, Y, Z)


def qsp_operators(n_trunc=DEFAULT_NTRUNC):
    """``sign(p)``, parity and ``i X Z`` in the truncated Fock basis.

    ``X`` is Hermitian with purely imaginary entries, nonzero only between
    Fock states of opposite parity.
    """
    return _qsp_cached(int(n_trunc))


def _qsp_blocks(alpha, sigma, n_trunc, order):
    """Noise-averaged ``B^dag e^{-ipq} O e^{ipq} B`` for ``O = X, Y, Z``."""
    B = basis_matrix(CatCode(alpha, n_trunc))
    ops = qsp_operators(n_trunc)
    p, w = DisplacementNoiseChannel(sigma, order).nodes()
    x, V = _position_cached(n_trunc)
    C = V.T @ B
    out = []
    for O in (ops.X, ops.Y, ops.Z):
        Oe = V.T @ O @ V
        acc = np.zeros((2, 2), dtype=complex)
        for pj, wj in zip(p, w):
            Dc = np.exp(1j * pj * x)[:, None] * C
            acc += wj * (Dc.conj().T @ Oe @ Dc)
        out.append(acc)
    return out


def qsp_fidelity(theta, phi, sigma, alpha, n_trunc=DEFAULT_NTRUNC, order=DEFAULT_ORDER):
    """QSP logical fidelity ``(1 + n . <X, Y, Z>) / 2`` of a noisy cat state."""
    AX, AY, AZ = _qsp_blocks(alpha, sigma, n_trunc, order)
    c = logical_state(theta, phi)
    ev = [float(np.real(c.conj() @ A @ c)) for A in (AX, AY, AZ)]
    n = (math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta))
    return 0.5 * (1.0 + sum(a * b for a, b in zip(n, ev)))


def qsp_average_fidelity(sigma, alpha, n_trunc=DEFAULT_NTRUNC, order=DEFAULT_ORDER, bloch_order=BLOCH_ORDER):
    blocks = _qsp_blocks(alpha, sigma, n_trunc, order)
    W, T, P, c = bloch_grid(bloch_order)
    ev = [np.real(np.einsum("sa,ab,sb->s", c.conj(), A, c)) for A in blocks]
    n = (np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T))
    F = 0.5 * (1.0 + n[0] * ev[0] + n[1] * ev[1] + n[2] * ev[2])
    return float(np.sum(W * F))
