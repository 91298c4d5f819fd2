"""Interference-based correction of incomplete transducers.

Two imperfect passes separated by a phase-sensitive gain on mode 1 interfere
so that the q-reflection at mode 2 cancels. The composite is an sQND-like
class [[2,1]] (or [[2,0]]) transform that a finishing step (squeezing
injection or homodyne feedforward) turns into a SWAP up to a random
displacement of width ``sigma``. A six-pass arrangement of sQND gates gives a
SWAP with no finishing step at all.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .classification import DEFAULT_TOL, Classification, classify
from .diagonalization import (
    P_TRANSMITTED,
    Q_TRANSMITTED,
    ConstrainedForm,
    diagonalize_constrained,
)
from .errors import (
    AlreadyMatched,
    DegenerateStrengths,
    NoTransmission,
    Uncorrectable,
    ZeroTransmissionPath,
)
from .symplectic import OMEGA, amplify, block, local, sqnd

WRITE_IN = "1->2"
READ_OUT = "2->1"
DIRECTIONS = (WRITE_IN, READ_OUT)

INJECT_SQUEEZING = "InjectSqueezing"
HOMODYNE_FEEDFORWARD = "HomodyneFeedforward"


@dataclass(frozen=True)
class FinishingStep:
    """Symbolic last step of a one-way transfer and the noise it leaves.

    ``residual_sigma`` is the standard deviation of the random
    p-displacement that remains on the transferred state.
    """

    tag: str
    eta: float
    residual_sigma: float
    r: float | None = None
    eta_D: float | None = None
    epsilon: float | None = None

    def describe(self):
        if self.tag == INJECT_SQUEEZING:
            return f"{self.tag}(r={self.r:.12g}): sigma = eta*exp(-r) = {self.residual_sigma:.12g}"
        return (
            f"{self.tag}(eta_D={self.eta_D:.12g}, epsilon={self.epsilon:.12g}): "
            f"sigma = sqrt(eta^2 + eta_D^2 - 2 eta eta_D sqrt(1-epsilon)) = {self.residual_sigma:.12g}"
        )


@dataclass(frozen=True)
class CorrectionPlan:
    """Locals, matching gain and composite of a two-pass correction.

    ``composite = T_III' @ G1(gamma) @ T_I'`` where the primed transforms are
    the inputs dressed by their constrained locals. For a passthrough plan
    (input already in class [[2,1]] or [[2,0]]) ``form_III`` is ``None``.
    """

    form_I: ConstrainedForm
    form_III: ConstrainedForm | None
    gamma: float
    composite: np.ndarray
    resulting_class: Classification
    direction: str
    finishing: FinishingStep
    passthrough: bool = False

    @property
    def eta(self):
        return self.finishing.eta


def matching_gain(Tqq_I, Tqq_III, tol=1e-12):
    """Gain on mode 1 that cancels the q-reflection of mode 2.

    Parameters
    ----------
    Tqq_I, Tqq_III : (2, 2) array_like
        q-sector scattering matrices of the first and second pass.
    tol : float
        Entries with magnitude at or below ``tol`` count as zero.

    Returns
    -------
    float
        ``gamma = -T22^III T22^I / (T21^III T12^I)``.

    Raises
    ------
    ZeroTransmissionPath
        If either transmission amplitude in the denominator vanishes.
    AlreadyMatched
        If either reflection already vanishes, so no gain is needed.
    """
    A = np.asarray(Tqq_I, dtype=float)
    B = np.asarray(Tqq_III, dtype=float)
    den = B[1, 0] * A[0, 1]
    if abs(B[1, 0]) <= tol or abs(A[0, 1]) <= tol:
        raise ZeroTransmissionPath(
            f"transmission amplitudes T21^III={B[1, 0]:.3e}, T12^I={A[0, 1]:.3e} must be nonzero"
        )
    if abs(B[1, 1]) <= tol or abs(A[1, 1]) <= tol:
        raise AlreadyMatched("a q-reflection is already zero; no matching gain is needed")
    return float(-B[1, 1] * A[1, 1] / den)


def residual_eta(T):
    """Strength of the remaining QND coupling: largest singular value of ``T22``."""
    return float(np.linalg.svd(block(T, 2, 2), compute_uv=False)[0])


def squeezing_sigma(eta, r):
    return float(abs(eta) * math.exp(-r)) if math.isfinite(r) else 0.0


def homodyne_sigma(eta, epsilon, eta_D=None):
    """Residual spread after homodyne detection with inefficiency ``epsilon``.

    ``eta_D`` defaults to the optimum ``eta*sqrt(1-epsilon)``.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon!r}")
    if eta_D is None:
        eta_D = eta * math.sqrt(1.0 - epsilon)
    var = eta**2 + eta_D**2 - 2.0 * eta * eta_D * math.sqrt(1.0 - epsilon)
    return math.sqrt(max(var, 0.0)), float(eta_D)


def _finishing(direction, eta, r=math.inf, epsilon=0.0, eta_D=None):
    if direction == READ_OUT:
        if r < 0:
            raise ValueError("squeezing resource r must be nonnegative")
        return FinishingStep(INJECT_SQUEEZING, eta, squeezing_sigma(eta, r), r=float(r))
    sigma, eta_D = homodyne_sigma(eta, epsilon, eta_D)
    return FinishingStep(HOMODYNE_FEEDFORWARD, eta, sigma, eta_D=eta_D, epsilon=float(epsilon))


def finish(plan, r=None, epsilon=None, eta_D=None):
    """Finishing step of ``plan`` for a given resource.

    Pass ``r`` (squeezing of the injected state) for the squeezing path or
    ``epsilon`` (homodyne inefficiency, optionally with an ``eta_D``
    override) for the feedforward path. With no resource the path follows
    ``plan.direction`` and the resource is ideal.
    """
    if plan.resulting_class.key not in ((2, 1), (2, 0)):
        raise Uncorrectable(f"composite class {plan.resulting_class.label} cannot be finished")
    if r is not None and (epsilon is not None or eta_D is not None):
        raise ValueError("give either a squeezing resource or a homodyne resource, not both")
    if r is not None:
        return _finishing(READ_OUT, plan.eta, r=r)
    if epsilon is not None or eta_D is not None:
        return _finishing(WRITE_IN, plan.eta, epsilon=epsilon or 0.0, eta_D=eta_D)
    return _finishing(plan.direction, plan.eta)


def _check_direction(direction):
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")


def correct(T_I, T_III, direction=WRITE_IN, tol=DEFAULT_TOL, r=math.inf, epsilon=0.0):
    """Build the two-pass interference correction of a pair of transducers.

    Parameters
    ----------
    T_I, T_III : (4, 4) array_like
        First and second pass, each in class [[1,2]] or [[2,2]].
    direction : {"1->2", "2->1"}
        Write-in finishes with homodyne feedforward on mode 1, readout with
        squeezing injection on mode 1.
    r, epsilon : float
        Finishing resources; the defaults are ideal.

    Returns
    -------
    CorrectionPlan

    Notes
    -----
    An input already in class [[2,1]] or [[2,0]] needs no interference and
    yields a passthrough plan built from ``T_I`` (or ``T_III`` if only that
    one qualifies) with ``gamma = 1``.
    """
    _check_direction(direction)
    T_I = np.asarray(T_I, dtype=float)
    T_III = np.asarray(T_III, dtype=float)
    c_I, c_III = classify(T_I, tol), classify(T_III, tol)
    for c in (c_I, c_III):
        if c.key == (0, 2):
            raise Uncorrectable("class [[0,2]] has no transmission and cannot be corrected")

    done = ((2, 1), (2, 0))
    if c_I.key in done or c_III.key in done:
        T = T_I if c_I.key in done else T_III
        form = diagonalize_constrained(T, Q_TRANSMITTED, tol)
        comp = form.transformed
        cls = classify(comp, tol)
        fin = _finishing(direction, residual_eta(comp), r=r, epsilon=epsilon)
        return CorrectionPlan(form, None, 1.0, comp, cls, direction, fin, passthrough=True)

    try:
        form_I = diagonalize_constrained(T_I, Q_TRANSMITTED, tol)
        form_III = diagonalize_constrained(T_III, P_TRANSMITTED, tol)
    except NoTransmission as exc:
        raise Uncorrectable(str(exc)) from exc
    gamma = matching_gain(form_I.Tqq, form_III.Tqq)
    comp = form_III.transformed @ local(amplify(gamma)) @ form_I.transformed
    cls = classify(comp, tol)
    fin = _finishing(direction, residual_eta(comp), r=r, epsilon=epsilon)
    return CorrectionPlan(form_I, form_III, gamma, comp, cls, direction, fin)


# -- six-pass SWAP -------------------------------------------------------------

# rotation(pi/2) is exactly OMEGA; the literal avoids cos(pi/2) round-off
_QUARTER = np.kron(np.eye(2), OMEGA)
_QUARTER_INV = np.kron(np.eye(2), OMEGA.T)


def sqnd_dagger(eta):
    """Inverse sQND realized by quarter rotations of both modes around the gate."""
    return _QUARTER_INV @ sqnd(eta) @ _QUARTER


def _gain1(gamma):
    return local(amplify(gamma))


def _gain1_dagger(gamma):
    return local(amplify(1.0 / gamma))


def six_pass_composite(eta1, eta2, eta3, gamma1, gamma2):
    """Explicit product of the six-pass arrangement.

    Gates act in the order ``G^dag(g2), sQND(eta1), G(g1), sQND^dag(eta2),
    G(g2), sQND(eta3), G^dag(g1)``, all gains on mode 1. The result is
    ``sQND((g1 eta1 - eta2 + g2 eta3) / (g1 g2))``.
    """
    return (
        _gain1_dagger(gamma1)
        @ sqnd(eta3)
        @ _gain1(gamma2)
        @ sqnd_dagger(eta2)
        @ _gain1(gamma1)
        @ sqnd(eta1)
        @ _gain1_dagger(gamma2)
    )


class SixPassResult(NamedTuple):
    gamma1: float
    gamma2: float
    composite: np.ndarray


def six_pass_gains(eta1, eta2, eta3):
    """Nonzero ``(gamma1, gamma2)`` with ``eta2 = gamma1 eta1 + gamma2 eta3``.

    Tries ``gamma2 = 1`` first, then ``gamma1 = 1``, then equal gains
    ``eta2 / (eta1 + eta3)``.
    """
    etas = (eta1, eta2, eta3)
    if any(e == 0 or not math.isfinite(e) for e in etas):
        raise DegenerateStrengths(f"all strengths must be finite and nonzero, got {etas}")
    candidates = (
        ((eta2 - eta3) / eta1, 1.0),
        (1.0, (eta2 - eta1) / eta3),
    )
    if eta1 + eta3 != 0:
        g = eta2 / (eta1 + eta3)
        candidates += ((g, g),)
    # gains at round-off level would blow up the dagger gains
    tiny = 1e-9
    for g1, g2 in candidates:
        if abs(g1) > tiny and abs(g2) > tiny and math.isfinite(g1) and math.isfinite(g2):
            return float(g1), float(g2)
    raise DegenerateStrengths(f"no nonzero gains solve eta2 = g1*eta1 + g2*eta3 for {etas}")


def six_pass_swap(eta1, eta2, eta3):
    """Squeezing-free SWAP from three sQND gates and gains on mode 1."""
    g1, g2 = six_pass_gains(eta1, eta2, eta3)
    return SixPassResult(g1, g2, six_pass_composite(eta1, eta2, eta3, g1, g2))
