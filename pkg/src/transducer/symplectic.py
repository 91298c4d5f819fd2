"""Single-mode symplectic generators and two-mode gate constructors.

Quadrature ordering is (q1, p1, q2, p2) throughout. A 2x2 "quad matrix"
acts on one mode's (q, p) pair; a two-mode transform is a 4x4 real matrix
``T`` mapping input quadratures to output quadratures, ``x_out = T @ x_in``.
All functions are pure and return fresh arrays.
"""

from dataclasses import dataclass

import numpy as np

from .errors import RankDeficient

OMEGA = np.array([[0.0, 1.0], [-1.0, 0.0]])
OMEGA4 = np.kron(np.eye(2), OMEGA)
PARITY = -np.eye(2)
PAULI_Z = np.diag([1.0, -1.0])
SWAP = np.block([[np.zeros((2, 2)), np.eye(2)], [np.eye(2), np.zeros((2, 2))]])

SYMPLECTIC_TOL = 1e-12


def rotation(theta):
    """Phase-space rotation ``[[cos, sin], [-sin, cos]]``."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


def squeeze(r):
    """Single-mode squeezer ``diag(e^r, e^-r)``."""
    return np.diag([np.exp(r), np.exp(-r)])


def amplify(gamma):
    """Generalized amplifier ``diag(gamma, 1/gamma)`` for any nonzero real gain.

    Negative gains combine squeezing with a parity flip.
    """
    if gamma == 0 or not np.isfinite(gamma):
        raise ValueError(f"amplification gain must be finite and nonzero, got {gamma!r}")
    return np.diag([gamma, 1.0 / gamma])


def symplectic_residual(M):
    """Max-abs deviation of ``M Omega M^T`` from ``Omega`` (any even size)."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0] // 2
    om = np.kron(np.eye(n), OMEGA)
    return float(np.max(np.abs(M @ om @ M.T - om)))


def is_symplectic(M, tol=SYMPLECTIC_TOL):
    """True when ``M`` preserves the symplectic form to ``tol``.

    The tolerance scales with ``||M||^2`` for large-norm inputs.
    """
    M = np.asarray(M, dtype=float)
    scale = max(1.0, float(np.max(np.abs(M))) ** 2)
    return symplectic_residual(M) <= tol * scale


@dataclass(frozen=True)
class RotSVD:
    """``M = V @ diag(d) @ W`` with ``V``, ``W`` proper rotations.

    The diagonal entries are signed: a reflection that a plain SVD would put
    in one of the orthogonal factors is absorbed into the sign of ``d``.
    """

    V: np.ndarray
    d: np.ndarray
    W: np.ndarray

    @property
    def D(self):
        return np.diag(self.d)

    def reconstruct(self):
        return self.V @ np.diag(self.d) @ self.W

    def swapped(self):
        """Equivalent decomposition with the two diagonal slots exchanged.

        Uses ``V' = V Omega`` and ``W' = Omega^T W``, both still rotations.
        """
        return RotSVD(self.V @ OMEGA, self.d[::-1].copy(), OMEGA.T @ self.W)


def rot_svd(M):
    """Rotation-constrained SVD of a real 2x2 matrix.

    ``|d|`` are the singular values in decreasing order. When the singular
    values coincide the factorization is not unique; ``W`` is then fixed to
    the identity so the result is reproducible.
    """
    M = np.asarray(M, dtype=float)
    U, s, Vt = np.linalg.svd(M)
    if s[0] == 0.0:
        return RotSVD(np.eye(2), np.zeros(2), np.eye(2))
    if s[0] - s[1] <= 8 * np.finfo(float).eps * s[0]:
        O = U @ Vt
        if np.linalg.det(O) > 0:
            return RotSVD(O, s.copy(), np.eye(2))
        return RotSVD(O @ PAULI_Z, np.array([s[0], -s[1]]), np.eye(2))
    d = s.copy()
    u_bad = np.linalg.det(U) < 0
    w_bad = np.linalg.det(Vt) < 0
    if u_bad and w_bad:
        # flip both factors; the sign lands on both diagonal entries
        U = U @ PAULI_Z
        Vt = -PAULI_Z @ Vt
        d = -d
    elif u_bad:
        U = U @ PAULI_Z
        d[1] = -d[1]
    elif w_bad:
        Vt = PAULI_Z @ Vt
        d[1] = -d[1]
    return RotSVD(U, d, Vt)


def symplectic_from_fullrank(M, side="right"):
    """Symplectic matrix built from the inverse of a full-rank 2x2 matrix.

    For ``det M > 0`` returns ``sqrt(det M) M^-1``. For ``det M < 0`` a Pauli
    Z restores the orientation, on the right (``M^-1 Z``) or left
    (``Z M^-1``) as selected by ``side``.
    """
    M = np.asarray(M, dtype=float)
    det = np.linalg.det(M)
    scale = max(1.0, float(np.max(np.abs(M))) ** 2)
    if abs(det) <= 1e-14 * scale:
        raise RankDeficient(f"matrix is singular (det={det:.3e})")
    inv = np.linalg.inv(M)
    if det > 0:
        return np.sqrt(det) * inv
    if side == "right":
        return np.sqrt(-det) * inv @ PAULI_Z
    if side == "left":
        return np.sqrt(-det) * PAULI_Z @ inv
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


# -- two-mode transforms -----------------------------------------------------


def block(T, i, j):
    """Sub-block ``T_ij`` (modes numbered 1 and 2)."""
    return np.asarray(T)[2 * (i - 1):2 * i, 2 * (j - 1):2 * j]


def local(L1=None, L2=None):
    """Block-diagonal local transform ``L1 (+) L2``; ``None`` means identity."""
    out = np.eye(4)
    if L1 is not None:
        out[:2, :2] = L1
    if L2 is not None:
        out[2:, 2:] = L2
    return out


def dress(T, L_in_1=None, L_in_2=None, L_out_1=None, L_out_2=None):
    """Apply local pre- and post-transforms: ``L_out T L_in``."""
    return local(L_out_1, L_out_2) @ np.asarray(T, dtype=float) @ local(L_in_1, L_in_2)


def _from_blocks(T11, T12, T21, T22):
    return np.block([[T11, T12], [T21, T22]]).astype(float)


def beam_splitter(theta):
    c, s = np.cos(theta), np.sin(theta)
    I = np.eye(2)
    return _from_blocks(c * I, s * I, -s * I, c * I)


def two_mode_squeezer(r):
    ch, sh = np.cosh(r), np.sinh(r)
    return _from_blocks(ch * np.eye(2), sh * PAULI_Z, sh * PAULI_Z, ch * np.eye(2))


def swapped_two_mode_squeezer(r):
    ch, sh = np.cosh(r), np.sinh(r)
    return _from_blocks(sh * PAULI_Z, ch * np.eye(2), ch * np.eye(2), sh * PAULI_Z)


def qnd(eta):
    """QND gate ``exp(-i eta p1 q2)``: q1 += eta q2, p2 -= eta p1."""
    T = np.eye(4)
    T[0, 2] = eta
    T[3, 1] = -eta
    return T


def qnd_p(eta):
    """QND gate ``exp(i eta q1 p2)``: q2 -= eta q1, p1 += eta p2."""
    T = np.eye(4)
    T[2, 0] = -eta
    T[1, 3] = eta
    return T


def sqnd(eta):
    """Swapped QND: q1 = -eta q1 + q2, q2 = q1, p1 = p2, p2 = p1 + eta p2."""
    T = SWAP.copy()
    T[0, 0] = -eta
    T[3, 3] = eta
    return T


def sqnd_p(eta):
    """Swapped QND with the roles of q and p exchanged.

    q1 = q2, p1 = -eta p1 + p2, q2 = q1 + eta q2, p2 = p1.
    """
    T = SWAP.copy()
    T[1, 1] = -eta
    T[2, 2] = eta
    return T


_GATES = {
    "identity": lambda _=None: np.eye(4),
    "swap": lambda _=None: SWAP.copy(),
    "bs": beam_splitter,
    "tms": two_mode_squeezer,
    "swapped_tms": swapped_two_mode_squeezer,
    "qnd": qnd,
    "qnd_p": qnd_p,
    "sqnd": sqnd,
    "sqnd_p": sqnd_p,
}

GATE_KINDS = tuple(_GATES)


def gate(kind, parameter=None):
    """Construct a canonical two-mode gate by name.

    ``kind`` is one of ``GATE_KINDS``; ``identity`` and ``swap`` take no
    parameter.
    """
    try:
        ctor = _GATES[kind]
    except KeyError:
        raise ValueError(f"unknown gate kind {kind!r}; expected one of {GATE_KINDS}") from None
    if kind not in ("identity", "swap"):
        if parameter is None or not np.isfinite(parameter):
            raise ValueError(f"gate {kind!r} needs a finite parameter")
    return ctor(parameter)
