"""Five-class taxonomy of two-mode Gaussian unitaries.

A transducer is labelled by the ranks of its transmission block ``T21`` and
reflection block ``T22``. Inside class [[2,2]] the determinant of ``T21``
further separates two-mode squeezers, beam splitters and swapped squeezers.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BoundaryClassWarning, NotSymplectic
from .symplectic import block, symplectic_residual

DEFAULT_TOL = 1e-9

ALLOWED_CLASSES = ((0, 2), (1, 2), (2, 2), (2, 1), (2, 0))

_NAMES = {
    (0, 2): "Identity",
    (1, 2): "QND gate",
    (2, 1): "Swapped QND gate",
    (2, 0): "SWAP",
}
_SUBCLASS_NAMES = {
    "TMS": "Two-mode squeezing",
    "BS": "Beam splitter",
    "SwappedTMS": "Swapped two-mode squeezing",
}


@dataclass(frozen=True)
class Classification:
    n_T: int
    n_R: int
    chi: float
    subclass: str | None
    canonical_name: str
    margin: float

    @property
    def label(self):
        return f"[[{self.n_T},{self.n_R}]]"

    @property
    def key(self):
        return (self.n_T, self.n_R)

    def __str__(self):
        tag = f" {self.subclass}" if self.subclass else ""
        return f"{self.label}{tag} chi={self.chi:.12g}"


def _threshold(s, tol):
    return tol * max(float(s[0]), 1.0)


def rank2(M, tol=DEFAULT_TOL):
    """Numerical rank of a 2x2 matrix.

    Counts singular values above ``tol * max(sigma_max, 1)``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    s = np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)
    return int(np.sum(s > _threshold(s, tol)))


def _rank_and_margin(M, tol):
    s = np.linalg.svd(M, compute_uv=False)
    thr = _threshold(s, tol)
    return int(np.sum(s > thr)), float(np.min(np.abs(s - thr)))


def classify(T, tol=DEFAULT_TOL, symplectic_tol=1e-10):
    """Assign a 4x4 symplectic transform to one of the five classes.

    Verifies the commutation constraints (rank(T_ij) = rank(T_{i'j'}) and
    det(T_i1) + det(T_i2) = 1) and raises ``NotSymplectic`` when they fail.
    A ``BoundaryClassWarning`` is issued when a [[2,2]] input has ``chi``
    within ``tol`` of 0 or 1.
    """
    T = np.asarray(T, dtype=float)
    if T.shape != (4, 4) or not np.all(np.isfinite(T)):
        raise NotSymplectic("expected a finite 4x4 matrix")
    scale = max(1.0, float(np.max(np.abs(T))) ** 2)
    res = symplectic_residual(T)
    if res > symplectic_tol * scale:
        raise NotSymplectic(f"commutation residual {res:.3e} exceeds tolerance", residual=res)

    n_T, m_T = _rank_and_margin(block(T, 2, 1), tol)
    n_R, m_R = _rank_and_margin(block(T, 2, 2), tol)
    n_T2 = rank2(block(T, 1, 2), tol)
    n_R2 = rank2(block(T, 1, 1), tol)
    if (n_T, n_R) != (n_T2, n_R2):
        raise NotSymplectic(
            f"rank mismatch: rank(T21)={n_T}, rank(T12)={n_T2}, rank(T22)={n_R}, rank(T11)={n_R2}",
            residual=res,
        )
    dets = [np.linalg.det(block(T, i, j)) for i in (1, 2) for j in (1, 2)]
    det_res = max(abs(dets[0] + dets[1] - 1.0), abs(dets[2] + dets[3] - 1.0))
    if det_res > symplectic_tol * scale:
        raise NotSymplectic(f"determinant sum rule violated by {det_res:.3e}", residual=det_res)
    if (n_T, n_R) not in ALLOWED_CLASSES:
        raise NotSymplectic(f"ranks ({n_T},{n_R}) are not a valid class", residual=res)

    chi_raw = float(dets[2])
    subclass = None
    if n_T < 2:
        chi = 0.0
    elif n_R < 2:
        chi = 1.0
    else:
        chi = chi_raw
        if abs(chi) <= tol or abs(chi - 1.0) <= tol:
            warnings.warn(
                f"[[2,2]] transducer with chi={chi:.3e} is within tolerance of a class boundary",
                BoundaryClassWarning,
                stacklevel=2,
            )
        if chi < 0:
            subclass = "TMS"
        elif chi < 1:
            subclass = "BS"
        else:
            subclass = "SwappedTMS"
    name = _SUBCLASS_NAMES[subclass] if subclass else _NAMES[(n_T, n_R)]
    return Classification(n_T, n_R, chi, subclass, name, min(m_T, m_R))
