"""Local transformations that bring a transducer to quadrature-diagonal form.

``diagonalize`` finds symplectic locals on both modes so that every block
``L_out_i T_ij L_in_j`` is diagonal and the result equals the
canonical gate of the class. ``diagonalize_constrained`` restricts the
mode-2 locals to rotations (mode 2 cannot be squeezed); it still closes the
q-sector so that output q's depend only on input q's, which is all the
interference protocol needs.
"""

from dataclasses import dataclass, field

import numpy as np

from .classification import DEFAULT_TOL, Classification, classify
from .errors import NoTransmission
from .symplectic import (
    PARITY,
    PAULI_Z,
    block,
    dress,
    gate,
    rot_svd,
)

Q_TRANSMITTED = "q-transmitted"
P_TRANSMITTED = "p-transmitted"
_PREFER = (Q_TRANSMITTED, P_TRANSMITTED)

# kind strings accepted by symplectic.gate, keyed by canonical tag
_GATE_KIND = {
    "Identity": "identity",
    "QND": "qnd",
    "QND_p": "qnd_p",
    "TMS": "tms",
    "BS": "bs",
    "SwappedTMS": "swapped_tms",
    "SQND": "sqnd",
    "SQND_p": "sqnd_p",
    "SWAP": "swap",
}


@dataclass(frozen=True)
class CanonicalGate:
    """Canonical gate identification: a gate tag plus its parameter (``None`` if none).

    ``QND_p``/``SQND_p`` are the same gates with q and p exchanged.
    """

    tag: str
    parameter: float | None = None

    @property
    def family(self):
        return self.tag.removesuffix("_p")

    def matrix(self):
        return gate(_GATE_KIND[self.tag], self.parameter)

    def __str__(self):
        if self.parameter is None:
            return self.tag
        name = {"BS": "theta", "TMS": "r", "SwappedTMS": "r"}.get(self.family, "eta")
        return f"{self.tag} {name}={self.parameter:.12g}"


@dataclass(frozen=True)
class DiagonalForm:
    L_in_1: np.ndarray
    L_out_1: np.ndarray
    L_in_2: np.ndarray
    L_out_2: np.ndarray
    canonical: CanonicalGate
    classification: Classification
    transformed: np.ndarray
    residual: float
    near_degenerate: bool = False

    @property
    def lam(self):
        """``lam[i-1, j-1] = (Lambda_q, Lambda_p)`` of block ``ij``."""
        out = np.empty((2, 2, 2))
        for i in (1, 2):
            for j in (1, 2):
                out[i - 1, j - 1] = np.diag(block(self.transformed, i, j))
        return out


@dataclass(frozen=True)
class ConstrainedForm:
    L_in_1: np.ndarray
    L_out_1: np.ndarray
    L_in_2: np.ndarray
    L_out_2: np.ndarray
    Tqq: np.ndarray
    transformed: np.ndarray
    classification: Classification
    prefer: str
    xi: float | None = None
    near_degenerate: bool = field(default=False)


def _diag(a, b):
    return np.diag([a, b])


def _ql(U):
    """``U = R @ J`` with ``R`` a rotation and ``J`` lower triangular, ``J[0,0] >= 0``.

    Computed from the QR factorization of the exchange-conjugated matrix.
    """
    E = np.array([[0.0, 1.0], [1.0, 0.0]])
    Q, Rr = np.linalg.qr(E @ U @ E)
    R = E @ Q @ E
    J = E @ Rr @ E
    if np.linalg.det(R) < 0:
        # move the reflection onto the lower row of J
        R = R @ PAULI_Z
        J = PAULI_Z @ J
    if J[0, 0] < 0:
        R = -R
        J = -J
    return R, J


def _positive_rank1(svd, slot):
    """Return an SVD whose nonzero singular value sits in ``slot`` and is positive."""
    if slot == 1:
        svd = svd.swapped()
    k = slot
    if svd.d[k] < 0:
        # -I is a rotation, so flipping V and d keeps the factorization valid
        svd = type(svd)(-svd.V, -svd.d, svd.W)
    return svd


def _near_degenerate(cls, tol):
    return cls.margin < 10 * tol


# -- per-class recipes --------------------------------------------------------
# Each returns (L_in_1, L_out_1, L_in_2, L_out_2, CanonicalGate).


def _identity_class(T):
    return (
        np.eye(2),
        np.linalg.inv(block(T, 1, 1)),
        np.eye(2),
        np.linalg.inv(block(T, 2, 2)),
        CanonicalGate("Identity"),
    )


def _swap_class(T):
    return (
        np.linalg.inv(block(T, 2, 1)),
        np.linalg.inv(block(T, 1, 2)),
        np.eye(2),
        np.eye(2),
        CanonicalGate("SWAP"),
    )


def _qnd_mode1(T, prefer):
    slot = 0 if prefer == Q_TRANSMITTED else 1
    svd = _positive_rank1(rot_svd(block(T, 1, 2)), slot)
    eta = float(svd.d[slot])
    L_out_1 = svd.V.T
    L_in_2 = svd.W.T
    L_in_1 = np.linalg.inv(L_out_1 @ block(T, 1, 1))
    return L_in_1, L_out_1, L_in_2, eta


def _qnd_class(T, prefer):
    L_in_1, L_out_1, L_in_2, eta = _qnd_mode1(T, prefer)
    U = block(T, 2, 2) @ L_in_2 @ PARITY
    L_out_2 = PARITY @ np.linalg.inv(U)
    tag = "QND" if prefer == Q_TRANSMITTED else "QND_p"
    return L_in_1, L_out_1, L_in_2, L_out_2, CanonicalGate(tag, eta)


def _two_two_mode2(T, chi):
    svd = rot_svd(block(T, 2, 2))
    L_in_2 = svd.W.T
    L_out_2 = svd.V.T
    A = L_out_2 @ block(T, 2, 1)
    if chi < 0:
        L_in_1 = np.sqrt(-chi) * np.linalg.inv(A) @ PAULI_Z
    elif chi < 1:
        L_in_1 = np.sqrt(chi) * PARITY @ np.linalg.inv(A)
    else:
        L_in_1 = np.sqrt(chi) * np.linalg.inv(A)
    return svd, L_in_1, L_in_2, L_out_2


def _two_two_mode1(T, chi, L_in_2):
    B = block(T, 1, 2) @ L_in_2
    if chi < 0:
        U = B @ PAULI_Z / np.sqrt(-chi)
    else:
        U = B / np.sqrt(chi)
    return np.linalg.inv(U)


def _two_two_class(T, chi):
    svd, L_in_1, _, L_out_2 = _two_two_mode2(T, chi)
    if chi < 0:
        r = float(np.arcsinh(np.sqrt(-chi)))
        L_in_2 = np.cosh(r) * np.linalg.inv(svd.D @ svd.W)
        canon = CanonicalGate("TMS", r)
    elif chi < 1:
        theta = float(np.arcsin(np.sqrt(chi)))
        L_in_2 = np.cos(theta) * np.linalg.inv(svd.D @ svd.W)
        canon = CanonicalGate("BS", theta)
    else:
        r = float(np.arccosh(np.sqrt(chi)))
        L_in_2 = np.sinh(r) * np.linalg.inv(PAULI_Z @ svd.D @ svd.W)
        canon = CanonicalGate("SwappedTMS", r)
    L_out_1 = _two_two_mode1(T, chi, L_in_2)
    return L_in_1, L_out_1, L_in_2, L_out_2, canon


def _sqnd_class(T, prefer):
    # q-transmitted: zero singular value of T22 in the upper slot
    slot = 1 if prefer == Q_TRANSMITTED else 0
    svd = _positive_rank1(rot_svd(block(T, 2, 2)), slot)
    eta = float(svd.d[slot])
    L_out_2 = svd.V.T
    L_in_2 = svd.W.T
    L_in_1 = np.linalg.inv(L_out_2 @ block(T, 2, 1))
    U = -block(T, 1, 2) @ L_in_2
    L_out_1 = PARITY @ np.linalg.inv(U)
    tag = "SQND" if prefer == Q_TRANSMITTED else "SQND_p"
    return L_in_1, L_out_1, L_in_2, L_out_2, CanonicalGate(tag, eta)


def _check_prefer(prefer):
    if prefer not in _PREFER:
        raise ValueError(f"prefer must be one of {_PREFER}, got {prefer!r}")


def diagonalize(T, tol=DEFAULT_TOL, prefer=Q_TRANSMITTED):
    """Fully quadrature-diagonalize ``T`` and identify its canonical gate.

    ``prefer`` picks between the two equivalent conventions for classes
    [[1,2]] and [[2,1]]; other classes ignore it.
    """
    _check_prefer(prefer)
    T = np.asarray(T, dtype=float)
    cls = classify(T, tol)
    key = cls.key
    if key == (0, 2):
        parts = _identity_class(T)
    elif key == (2, 0):
        parts = _swap_class(T)
    elif key == (1, 2):
        parts = _qnd_class(T, prefer)
    elif key == (2, 1):
        parts = _sqnd_class(T, prefer)
    else:
        parts = _two_two_class(T, cls.chi)
    L_in_1, L_out_1, L_in_2, L_out_2, canon = parts
    out = dress(T, L_in_1, L_in_2, L_out_1, L_out_2)
    residual = float(np.max(np.abs(out - canon.matrix())))
    return DiagonalForm(
        L_in_1, L_out_1, L_in_2, L_out_2, canon, cls, out, residual,
        near_degenerate=_near_degenerate(cls, tol),
    )


def canonical_name(T, tol=DEFAULT_TOL):
    """Canonical equivalent operation of ``T`` (tag and parameter only)."""
    return diagonalize(T, tol).canonical


def diagonalize_constrained(T, prefer=Q_TRANSMITTED, tol=DEFAULT_TOL):
    """Close the q-sector of ``T`` using rotations only on mode 2.

    Returns the 2x2 matrix ``Tqq`` mapping (q1_in, q2_in) to
    (q1_out, q2_out) together with the locals that produce it. Output mode 1
    ends fully diagonal; ``q2_out`` is diagonal while ``p2_out`` may still
    mix quadratures. Raises ``NoTransmission`` for class [[0,2]].
    """
    _check_prefer(prefer)
    T = np.asarray(T, dtype=float)
    cls = classify(T, tol)
    key = cls.key
    xi = None
    if key == (0, 2):
        raise NoTransmission("class [[0,2]] has no transmission between the modes")
    if key == (2, 0):
        L_in_1, L_out_1, L_in_2, L_out_2, _ = _swap_class(T)
    elif key == (2, 1):
        L_in_1, L_out_1, L_in_2, L_out_2, _ = _sqnd_class(T, prefer)
    elif key == (1, 2):
        L_in_1, L_out_1, L_in_2, _ = _qnd_mode1(T, prefer)
        U = -block(T, 2, 2) @ L_in_2
        R, J = _ql(U)
        L_out_2 = R.T
        xi = float(J[0, 0])
    else:
        _, L_in_1, L_in_2, L_out_2 = _two_two_mode2(T, cls.chi)
        L_out_1 = _two_two_mode1(T, cls.chi, L_in_2)
    out = dress(T, L_in_1, L_in_2, L_out_1, L_out_2)
    Tqq = out[np.ix_([0, 2], [0, 2])].copy()
    return ConstrainedForm(
        L_in_1, L_out_1, L_in_2, L_out_2, Tqq, out, cls, prefer, xi,
        near_degenerate=_near_degenerate(cls, tol),
    )


def local_squeezing(form):
    """Largest single-mode squeeze parameter ``r`` used by the locals of ``form``."""
    mats = (form.L_in_1, form.L_out_1, form.L_in_2, form.L_out_2)
    return max(float(np.log(np.linalg.svd(L, compute_uv=False)[0])) for L in mats)
