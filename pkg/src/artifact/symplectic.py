"""Linear symplectic algebra on the standard space R^{2n}.

Coordinates are fixed once: ``omega(x, y) = x^T Omega y`` with
``Omega = [[0, I], [-I, 0]]``.  The first ``n`` coordinates are the
``e`` directions, the last ``n`` the ``f`` directions, so the standard
basis satisfies ``omega(e_a, f_b) = delta_ab``.

Darboux frames ``(E, F)`` follow the convention ``omega(F, E) = I``,
``omega(E, E) = omega(F, F) = 0``.  The canonical such frame is therefore
``E = (f_1..f_n)``, ``F = (e_1..e_n)``; see :func:`canonical_darboux`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.linalg import expm

from .errors import InputError
from .jets import MatrixJet

DEFAULT_RANK_TOL = 1e-9

Frame = Union[np.ndarray, MatrixJet]


def omega_matrix(n: int) -> np.ndarray:
    """The standard symplectic matrix of half dimension ``n``."""
    I = np.eye(n)
    Z = np.zeros((n, n))
    return np.block([[Z, I], [-I, Z]])


def omega(x: np.ndarray, y: np.ndarray) -> float:
    """Symplectic form of two vectors."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if x.shape != y.shape or x.shape[0] % 2:
        raise InputError("omega needs two vectors of the same even dimension")
    n = x.shape[0] // 2
    return float(x[:n] @ y[n:] - x[n:] @ y[:n])


def _apply_omega(V: np.ndarray) -> np.ndarray:
    """``Omega @ V`` for arrays whose second-to-last axis has size 2n."""
    n = V.shape[-2] // 2
    return np.concatenate([V[..., n:, :], -V[..., :n, :]], axis=-2)


def omega_pairing(V1: Frame, V2: Frame) -> Frame:
    """Matrix of pairings ``omega(v1_i, v2_j)`` between two tuples of columns.

    Works for plain arrays (``2n x k``) and for matrix jets, in which case
    the result is a matrix jet of the common order.
    """
    if isinstance(V1, MatrixJet) or isinstance(V2, MatrixJet):
        if not isinstance(V1, MatrixJet):
            V1 = MatrixJet.constant(V1, V2.order, V2.center)
        if not isinstance(V2, MatrixJet):
            V2 = MatrixJet.constant(V2, V1.order, V1.center)
        if V1.rows != V2.rows or V1.rows % 2:
            raise InputError(f"dimension mismatch: {V1.rows} vs {V2.rows}")
        OV2 = MatrixJet(_apply_omega(V2.coeffs), V2.center)
        return V1.T @ OV2
    V1 = np.atleast_2d(np.asarray(V1, float))
    V2 = np.atleast_2d(np.asarray(V2, float))
    if V1.shape[0] != V2.shape[0] or V1.shape[0] % 2:
        raise InputError(f"dimension mismatch: {V1.shape[0]} vs {V2.shape[0]}")
    return V1.T @ _apply_omega(V2)


def canonical_darboux(n: int) -> tuple[np.ndarray, np.ndarray]:
    """The canonical Darboux frame ``(E, F) = (f-block, e-block)``."""
    I = np.eye(2 * n)
    return I[:, n:], I[:, :n]


# subspaces --------------------------------------------------------------------

def numeric_rank(M: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def orth(M: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the column space, rank decided relative to the top singular value."""
    M = np.asarray(M, float)
    if M.size == 0 or M.shape[1] == 0:
        return np.zeros((M.shape[0], 0))
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s[0] == 0.0:
        return np.zeros((M.shape[0], 0))
    return U[:, s > tol * s[0]]


def null_space(M: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the right null space."""
    M = np.asarray(M, float)
    q = M.shape[1]
    if M.size == 0:
        return np.eye(q)
    _, s, Vt = np.linalg.svd(M)
    rank = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    return Vt[rank:].T


@dataclass(frozen=True)
class Subspace:
    """Column span of ``basis`` inside R^{2n}.

    The stored basis is orthonormal; ``rank_tol`` is the relative singular
    value threshold used to decide dimensions.
    """

    basis: np.ndarray
    rank_tol: float = DEFAULT_RANK_TOL

    def __post_init__(self):
        B = np.asarray(self.basis, float)
        if B.ndim != 2:
            raise InputError("subspace basis must be a matrix")
        object.__setattr__(self, "basis", orth(B, self.rank_tol))
        object.__setattr__(self, "_ambient", B.shape[0])

    @classmethod
    def span(cls, *vectors, rank_tol: float = DEFAULT_RANK_TOL) -> "Subspace":
        return cls(np.column_stack(vectors), rank_tol)

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(np.zeros((ambient_dim, 0)))

    @property
    def ambient_dim(self) -> int:
        return self._ambient

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def contains(self, v: np.ndarray, tol: float = 1e-8) -> bool:
        v = np.atleast_2d(np.asarray(v, float))
        if v.shape[0] != self.ambient_dim:
            v = v.T
        resid = v - self.basis @ (self.basis.T @ v)
        scale = max(1.0, float(np.linalg.norm(v)))
        return bool(np.linalg.norm(resid) <= tol * scale)

    def equals(self, other: "Subspace", tol: float = 1e-8) -> bool:
        return (
            self.ambient_dim == other.ambient_dim
            and self.dim == other.dim
            and self.contains(other.basis, tol)
        )

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T


def skew_complement(L: Subspace) -> Subspace:
    """``L^angle = {v : omega(v, l) = 0 for all l in L}``."""
    m = L.ambient_dim
    if L.dim == 0:
        return Subspace(np.eye(m), L.rank_tol)
    # omega(v, l) = (Omega l)^T v
    M = _apply_omega(L.basis).T
    return Subspace(null_space(M, L.rank_tol), L.rank_tol)


def orthogonal_complement(L: Subspace) -> Subspace:
    m = L.ambient_dim
    if L.dim == 0:
        return Subspace(np.eye(m), L.rank_tol)
    return Subspace(null_space(L.basis.T, L.rank_tol), L.rank_tol)


def subspace_ops(A: Subspace, B: Subspace, op: str) -> Subspace:
    """Sum or intersection of two subspaces.

    The intersection is computed by duality,
    ``A ∩ B = (A^⊥ + B^⊥)^⊥``.
    """
    if A.ambient_dim != B.ambient_dim:
        raise InputError("subspaces live in different ambient spaces")
    tol = max(A.rank_tol, B.rank_tol)
    if op == "sum":
        return Subspace(np.hstack([A.basis, B.basis]), tol)
    if op == "intersection":
        s = subspace_ops(orthogonal_complement(A), orthogonal_complement(B), "sum")
        return orthogonal_complement(s)
    raise InputError(f"unknown subspace op {op!r}")


def is_isotropic(V: Frame, tol: float = 1e-10) -> bool:
    P = omega_pairing(V, V)
    val = P.max_abs() if isinstance(P, MatrixJet) else float(np.max(np.abs(P), initial=0.0))
    return val <= tol


def darboux_defect(E: Frame, F: Frame) -> float:
    """Largest deviation from the Darboux identities (over all jet orders)."""
    if isinstance(E, MatrixJet) or isinstance(F, MatrixJet):
        if E.cols != F.cols:
            raise InputError("E and F must have the same number of columns")
        k = E.cols
        ee = omega_pairing(E, E).max_abs()
        ff = omega_pairing(F, F).max_abs()
        fe = omega_pairing(F, E)
        ident = MatrixJet.identity(k, fe.order, fe.center)
        return max(ee, ff, (fe - ident).max_abs())
    E = np.atleast_2d(E)
    F = np.atleast_2d(F)
    if E.shape[1] != F.shape[1]:
        raise InputError("E and F must have the same number of columns")
    k = E.shape[1]
    return float(
        max(
            np.max(np.abs(omega_pairing(E, E)), initial=0.0),
            np.max(np.abs(omega_pairing(F, F)), initial=0.0),
            np.max(np.abs(omega_pairing(F, E) - np.eye(k)), initial=0.0),
        )
    )


def is_darboux(E: Frame, F: Frame, tol: float = 1e-10) -> bool:
    """True iff ``omega(E,E) = omega(F,F) = 0`` and ``omega(F,E) = I`` within ``tol``.

    For jets every retained coefficient is checked.
    """
    rows = E.rows if isinstance(E, MatrixJet) else np.atleast_2d(E).shape[0]
    cols = E.cols if isinstance(E, MatrixJet) else np.atleast_2d(E).shape[1]
    if 2 * cols != rows:
        raise InputError(f"a Darboux frame needs n = {rows // 2} columns per half, got {cols}")
    return darboux_defect(E, F) <= tol


def velocity_form(frame: MatrixJet, tol: float = 1e-8) -> MatrixJet:
    """Matrix ``omega(X', X)`` of the velocity quadratic form in the frame columns."""
    iso = omega_pairing(frame, frame)
    scale = max(1.0, frame.max_abs() ** 2)
    if iso.max_abs() > tol * scale:
        raise InputError("frame does not span a Lagrangian subspace")
    Q = omega_pairing(frame.derive(), frame)
    if Q.antisym().max_abs() > 1e-6 * max(1.0, Q.max_abs()):
        raise InputError("velocity form is not symmetric: frame is not Lagrangian to jet order")
    return Q.sym()


def random_hamiltonian(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random ``A`` with ``Omega A`` symmetric, i.e. ``A = Omega^{-1} S``."""
    S = rng.standard_normal((2 * n, 2 * n)) * scale
    S = 0.5 * (S + S.T)
    return -omega_matrix(n) @ S


def random_symplectic(n: int, seed: int | None = None, factors: int = 3, scale: float = 0.4) -> np.ndarray:
    """Random symplectic matrix built as a product of exponentials of Hamiltonian matrices.

    Entries of each generator are scaled by ``scale / sqrt(n)`` so that the
    condition number stays moderate in every dimension.
    """
    rng = np.random.default_rng(seed)
    S = np.eye(2 * n)
    for _ in range(factors):
        S = S @ expm(random_hamiltonian(n, rng, scale / np.sqrt(n)))
    return S


def symplectic_defect(S: np.ndarray) -> float:
    n = S.shape[0] // 2
    Om = omega_matrix(n)
    return float(np.max(np.abs(S.T @ Om @ S - Om)))


def symplectic_basis(V: np.ndarray, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Split a basis of a symplectic subspace into ``(U, W)`` with
    ``omega(U, W) = I`` and ``omega(U, U) = omega(W, W) = 0``.
    """
    vecs = [v for v in np.asarray(V, float).T]
    us, ws = [], []
    while vecs:
        u = vecs.pop(0)
        pair = [abs(omega(u, w)) for w in vecs]
        if not pair or max(pair) <= tol:
            raise InputError("restriction of omega is degenerate")
        j = int(np.argmax(pair))
        w = vecs.pop(j)
        w = w / omega(u, w)
        rest = []
        for x in vecs:
            # remove components along u and w
            x = x - omega(x, w) * u + omega(x, u) * w
            rest.append(x)
        vecs = rest
        us.append(u)
        ws.append(w)
    return np.column_stack(us), np.column_stack(ws)
