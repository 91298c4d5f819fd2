"""Lossy beam-splitter dynamics, bath dilation and noise/capacity metrics.

Mode 1 (the processor) decays at rate ``kappa`` into a vacuum bath while it
exchanges excitations with the lossless mode 2 (the memory) at rate ``g``.
Every transform here is quadrature-diagonal, so q and p amplitudes are
tracked as separate real arrays.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AlreadyMatched,
    ConsistencyError,
    GainDetected,
    OverdampedUnsupported,
    ZeroTransmissionPath,
)

VACUUM = 0.5
INTERFERENCE = "interference"
STANDARD = "standard"
MODES = (INTERFERENCE, STANDARD)

# |1 - tau_C| below this is treated as a perfect-transmissivity channel
_TAU_ONE_TOL = 1e-10
# noise products below this count as noiseless at tau_C = 1
_NOISELESS_TOL = 1e-20


@dataclass(frozen=True)
class LossySystemMatrix:
    """Closed-form system amplitudes ``T`` of one lossy beam splitter."""

    T: np.ndarray
    g: float
    kappa: float
    t: float

    @property
    def theta(self):
        return self.g * self.t

    @property
    def Gamma(self):
        return math.asin(self.kappa / (4.0 * self.g))


@dataclass(frozen=True)
class ProtocolTransform:
    """Two-pass lossy protocol as 2x6 q and p amplitude arrays.

    Rows are the system outputs 1 and 2; columns are the system inputs 1, 2,
    the first-pass bath modes 3, 4 and the second-pass bath modes 5, 6.
    """

    Tqq: np.ndarray
    Tpp: np.ndarray
    gamma: float
    g: float
    kappa: float
    tau: float

    def commutation_residual(self):
        return float(np.max(np.abs(self.Tqq @ self.Tpp.T - np.eye(2))))


@dataclass(frozen=True)
class NoiseReport:
    """Added noise (quanta) and single-use channel parameters of a transfer.

    ``Nbar`` is the added noise with no input pre-amplification and
    ``Nbar_min`` the optimum over the pre-amplification ``gamma0_opt``.
    """

    Nq: float
    Np: float
    Nbar: float
    Nbar_min: float
    gamma0_opt: float
    etaD_opt: float
    tau_C: float
    n_C: float
    Q: float
    gamma: float
    mode: str
    direction: str


def lossy_bs(g, kappa, t):
    """System matrix of the lossy beam splitter after time ``t``.

    Parameters
    ----------
    g : float
        Coupling rate, > 0.
    kappa : float
        Mode-1 loss rate, ``0 <= kappa < 4 g``.
    t : float
        Duration, >= 0.
    """
    if not (g > 0 and math.isfinite(g)):
        raise ValueError(f"g must be positive and finite, got {g!r}")
    if not (kappa >= 0 and math.isfinite(kappa)):
        raise ValueError(f"kappa must be nonnegative and finite, got {kappa!r}")
    if not (t >= 0 and math.isfinite(t)):
        raise ValueError(f"t must be nonnegative and finite, got {t!r}")
    if kappa >= 4.0 * g:
        raise OverdampedUnsupported(f"kappa/g = {kappa / g:.6g} >= 4 is overdamped")
    s = kappa / (4.0 * g)
    c = math.sqrt(1.0 - s * s)
    G = math.asin(s)
    th = g * t
    pref = math.exp(-th * s) / c
    a = th * c
    T = pref * np.array([[math.cos(a + G), math.sin(a)], [-math.sin(a), math.cos(a - G)]])
    return LossySystemMatrix(T, float(g), float(kappa), float(t))


def dilate(T):
    """System rows of the four-mode unitary that contains ``T``.

    Returns a 2x4 array ``[T | U diag(sqrt(1 - lam^2))]`` where
    ``T = U diag(lam) W`` is the SVD. Rows are orthonormal.
    """
    if isinstance(T, LossySystemMatrix):
        T = T.T
    T = np.asarray(T, dtype=float)
    U, lam, _ = np.linalg.svd(T)
    if np.any(lam > 1.0 + 1e-9):
        raise GainDetected(f"singular values {lam} exceed 1; the evolution has gain")
    bath = U @ np.diag(np.sqrt(np.clip(1.0 - lam**2, 0.0, None)))
    return np.hstack([T, bath])


def protocol(g, kappa, tau, gamma):
    """Two lossy passes of duration ``tau/2`` with gain ``gamma`` on mode 1 between them."""
    if gamma == 0 or not math.isfinite(gamma):
        raise ValueError(f"gamma must be finite and nonzero, got {gamma!r}")
    D = dilate(lossy_bs(g, kappa, tau / 2.0).T)
    T1 = D[:, :2]
    # second pass rows times first pass columns; mode-1 path carries the gain
    left_q = T1 * np.array([gamma, 1.0])
    left_p = T1 * np.array([1.0 / gamma, 1.0])
    Tqq = np.hstack([left_q @ D, D[:, 2:]])
    Tpp = np.hstack([left_p @ D, D[:, 2:]])
    return ProtocolTransform(Tqq, Tpp, float(gamma), float(g), float(kappa), float(tau))


def impedance_gain(g, kappa, tau, tol=1e-12):
    """Gain that cancels the q-reflection of mode 2: ``-T22^2 / (T21 T12)``."""
    T = lossy_bs(g, kappa, tau / 2.0).T
    den = T[1, 0] * T[0, 1]
    if abs(den) <= tol:
        raise ZeroTransmissionPath("no transmission between the modes for this duration")
    gamma = -T[1, 1] ** 2 / den
    if abs(gamma) <= tol:
        raise AlreadyMatched("reflection already vanishes; the matching gain is zero")
    return float(gamma)


def readout_gain(g, kappa, tau, tol=1e-12):
    """Gain that cancels the p-reflection of mode 1: ``-T11^2 / (T12 T21)``."""
    T = lossy_bs(g, kappa, tau / 2.0).T
    den = T[0, 1] * T[1, 0]
    if abs(den) <= tol:
        raise ZeroTransmissionPath("no transmission between the modes for this duration")
    gamma = -T[0, 0] ** 2 / den
    if abs(gamma) <= tol:
        raise AlreadyMatched("reflection already vanishes; the matching gain is zero")
    return float(gamma)


# -- capacity -----------------------------------------------------------------


def g_entropy(n):
    """``(n+1) log2(n+1) - n log2(n)`` with ``g_entropy(0) = 0``."""
    if n <= 0:
        return 0.0
    return float((n + 1) * math.log2(n + 1) - n * math.log2(n))


def channel_parameters(tau_C, Sq, Sp):
    """Noise number ``n_C`` and capacity ``Q`` from transmissivity and noise sums.

    ``Sq`` and ``Sp`` are the variance-weighted noise sums of each quadrature.
    At ``tau_C = 1`` the closed form is 0/0; the limit is taken instead:
    ``Q = inf`` for a noiseless channel and ``-log2(e sqrt(Sq Sp))`` for a
    purely additive one.
    """
    noise = math.sqrt(max(Sq, 0.0) * max(Sp, 0.0))
    gap = abs(1.0 - tau_C)
    if gap < _TAU_ONE_TOL:
        if noise < math.sqrt(_NOISELESS_TOL):
            return 0.0, math.inf
        return math.inf, max(0.0, -math.log2(math.e * noise))
    n_C = noise / gap - 0.5
    if n_C < 0:
        if n_C < -1e-9:
            raise ConsistencyError(f"noise number n_C={n_C:.3e} is below the physical bound")
        n_C = 0.0
    if tau_C <= 0.5:
        return n_C, 0.0
    Q = math.log2(abs(tau_C / (1.0 - tau_C))) - g_entropy(n_C)
    return n_C, max(0.0, Q)


def optimal_eta_D(Tpp, v=VACUUM):
    """Feedforward strength minimizing the p added noise.

    The noise is the ratio ``sum_k (a_k - eta b_k)^2 v_k / (a_1 - eta b_1)^2``
    over ``k >= 2``, with ``a`` the mode-2 row and ``b`` the mode-1 row. Its
    stationarity condition is linear in ``eta``.
    """
    Tpp = np.asarray(Tpp, dtype=float)
    a, b = Tpp[1], Tpp[0]
    A = float(np.sum(v * a[1:] ** 2))
    B = float(np.sum(v * a[1:] * b[1:]))
    C = float(np.sum(v * b[1:] ** 2))
    den = C * a[0] - B * b[0]
    if den == 0.0:
        return 0.0
    return float((B * a[0] - A * b[0]) / den)


def _added(row, v):
    return float(0.5 * np.sum(row[1:] ** 2 * v) / row[0] ** 2)


def _pre_amplified(Nq, Np):
    Nbar_min = 2.0 * math.sqrt(Nq * Np)
    gamma0 = (Nq / Np) ** 0.25 if Np > 0 and Nq > 0 else 1.0
    return float(Nbar_min), float(gamma0)


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def writein_metrics(g, kappa, tau, mode=INTERFERENCE, v=VACUUM, eta_D=None):
    """Added noise and capacity for transfer from mode 1 to mode 2.

    ``interference`` matches the q-reflection with the mid-protocol gain and
    applies homodyne feedforward with the optimal (or given) ``eta_D``.
    ``standard`` is a single uninterrupted beam splitter of duration ``tau``
    with no feedforward.
    """
    _check_mode(mode)
    if mode == INTERFERENCE:
        gamma = impedance_gain(g, kappa, tau)
    else:
        gamma = 1.0
    P = protocol(g, kappa, tau, gamma)
    if mode == INTERFERENCE:
        if eta_D is None:
            eta_D = optimal_eta_D(P.Tpp, v)
    else:
        eta_D = 0.0
    q = P.Tqq[1]
    p = P.Tpp[1] - eta_D * P.Tpp[0]
    Nq, Np = _added(q, v), _added(p, v)
    Nbar_min, gamma0 = _pre_amplified(Nq, Np)
    tau_C = float(q[0] * p[0])
    Sq = float(np.sum(q[1:] ** 2 * v))
    Sp = float(np.sum(p[1:] ** 2 * v))
    n_C, Q = channel_parameters(tau_C, Sq, Sp)
    return NoiseReport(
        Nq, Np, Nq + Np, Nbar_min, gamma0, float(eta_D), tau_C, n_C, Q, gamma, mode, "writein"
    )


def readout_metrics(g, kappa, tau, mode=INTERFERENCE, v=VACUUM):
    """Added noise and capacity for transfer from mode 2 to mode 1.

    ``interference`` matches the p-reflection of mode 1 and injects infinite
    q-squeezing at input 1, which removes the reflected q noise. ``standard``
    is a single beam splitter with a vacuum input on mode 1.
    """
    _check_mode(mode)
    gamma = readout_gain(g, kappa, tau) if mode == INTERFERENCE else 1.0
    P = protocol(g, kappa, tau, gamma)
    # transmitted input first, then the noise sources; in interference mode
    # the squeezed q1 input is noiseless and the p1 reflection is matched out
    noise = [2, 3, 4, 5] if mode == INTERFERENCE else [0, 2, 3, 4, 5]
    cols_q = cols_p = [1] + noise
    q = P.Tqq[0, cols_q]
    p = P.Tpp[0, cols_p]
    Nq, Np = _added(q, v), _added(p, v)
    Nbar_min, gamma0 = _pre_amplified(Nq, Np)
    tau_C = float(q[0] * p[0])
    Sq = float(np.sum(q[1:] ** 2 * v))
    Sp = float(np.sum(p[1:] ** 2 * v))
    n_C, Q = channel_parameters(tau_C, Sq, Sp)
    return NoiseReport(Nq, Np, Nq + Np, Nbar_min, gamma0, 0.0, tau_C, n_C, Q, gamma, mode, "readout")
