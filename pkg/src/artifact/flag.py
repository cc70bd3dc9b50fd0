"""Flag analysis of a curve of Lagrangian subspaces given as a jet.

The curve is represented by a ``2n x n`` matrix jet whose columns span
``Lambda(t)``.  Extensions are spans of derivatives, contractions are
nested kernels of the velocity.  Both are returned as matrix jets of
constant column rank.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .diagram import ReducedDiagram, YoungDiagram, reduce_diagram
from .errors import AnalyzabilityError, InputError, JetOrderError, RankError
from .jets import MatrixJet, hstack, vstack
from .symplectic import (
    DEFAULT_RANK_TOL,
    omega_pairing,
    orth,
    null_space,
    numeric_rank,
    skew_complement,
    Subspace,
    symplectic_basis,
    velocity_form,
)

# relative size of a jet residual that still counts as zero
RESIDUAL_TOL = 1e-7


@dataclass
class CurveJet:
    """A curve ``t -> Lambda(t)`` in the Lagrange Grassmannian of ``R^{2n}``.

    Attributes
    ----------
    frame : MatrixJet
        ``2n x n`` jet whose columns span ``Lambda(t)``.
    truth : object, optional
        Ground truth attached by generators (e.g. the curvature spec).
    """

    frame: MatrixJet
    truth: Optional[object] = None
    check: bool = True

    def __post_init__(self):
        F = self.frame
        if not isinstance(F, MatrixJet):
            raise InputError("frame must be a MatrixJet")
        if F.rows != 2 * F.cols:
            raise InputError(f"frame must be 2n x n, got {F.shape}")
        if self.check:
            if numeric_rank(F.value) != F.cols:
                raise InputError("frame columns are dependent at the center")
            iso = omega_pairing(F, F)
            scale = max(1.0, F.max_abs() ** 2)
            if iso.max_abs() > 1e-8 * scale:
                raise InputError(
                    f"frame is not Lagrangian to jet order (defect {iso.max_abs():.3e})"
                )

    @property
    def n(self) -> int:
        return self.frame.cols

    @property
    def center(self) -> float:
        return self.frame.center

    @property
    def order(self) -> int:
        return self.frame.order

    def transformed(self, S: np.ndarray) -> "CurveJet":
        """Image of the curve under a linear map (symplectic for a valid result)."""
        return CurveJet(S @ self.frame, self.truth)

    def reparametrized_basis(self, P: MatrixJet) -> "CurveJet":
        """Same curve, frame multiplied on the right by an invertible jet."""
        return CurveJet(self.frame @ P, self.truth)

    def reversed(self) -> "CurveJet":
        """The curve ``t -> Lambda(-t)``."""
        return CurveJet(self.frame.reverse_time(), self.truth)

    def recentered(self, t: float) -> "CurveJet":
        return CurveJet(self.frame.recenter(t), self.truth, check=False)

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "half_dim": self.n,
            "center": self.center,
            "order": self.order,
            "frame": self.frame.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CurveJet":
        try:
            if obj.get("schema_version", 1) != 1:
                raise InputError(f"unsupported schema_version {obj['schema_version']}")
            n = int(obj["half_dim"])
            center = float(obj.get("center", 0.0))
            F = MatrixJet.from_json(obj["frame"], 2 * n, n, center)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"malformed curve file: {exc}") from exc
        if "order" in obj and int(obj["order"]) != F.order:
            raise InputError(f"declared order {obj['order']} but coefficients give {F.order}")
        return cls(F)


# constant-rank jet linear algebra ----------------------------------------------

def _scale(M: MatrixJet) -> float:
    return max(1.0, M.max_abs())


def jet_column_space(M: MatrixJet, tol: float = DEFAULT_RANK_TOL, stage: str = "flag") -> MatrixJet:
    """Jet basis of the column span of ``M``, assuming the rank is constant.

    With ``M0 = U S V^T`` the basis is ``M V_1 S_1^{-1}``, orthonormal at the
    center.  The remaining combinations ``M V_2`` vanish at the center and
    must stay in the span as jets, otherwise the rank jumps away from the
    center and :class:`RankError` is raised.  Singular vectors keep the
    series well conditioned where plain pivot columns do not.
    """
    M0 = M.value
    k = numeric_rank(M0, tol)
    if k == 0:
        if M.max_abs() > RESIDUAL_TOL * _scale(M):
            raise RankError("rank jumps away from the center", stage)
        return MatrixJet.zeros(M.rows, 0, M.order, M.center)
    _, s, Vt = np.linalg.svd(M0)
    B = M @ (Vt[:k].T / s[:k])
    if k < M.cols:
        Rm = M @ Vt[k:].T
        X = (B.T @ B).inverse() @ (B.T @ Rm)
        resid = Rm - B @ X
        if resid.max_abs() > RESIDUAL_TOL * _scale(M):
            raise RankError(
                f"rank is not constant near the center (residual {resid.max_abs():.2e})", stage
            )
    return B


def jet_kernel(M: MatrixJet, tol: float = DEFAULT_RANK_TOL, stage: str = "flag") -> MatrixJet:
    """Jet basis ``K(t)`` of the right kernel of ``M(t)`` with constant rank.

    With ``M0 = U S V^T`` the rotated jet ``U^T M V`` is split into blocks
    ``[[A, B], [C, D]]`` with ``A(t0)`` invertible; the kernel is
    ``V [-A^{-1} B; I]`` provided the Schur complement ``D - C A^{-1} B``
    vanishes.
    """
    m, q = M.shape
    M0 = M.value
    U, s, Vt = np.linalg.svd(M0)
    k = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    if k == q:
        return MatrixJet.zeros(q, 0, M.order, M.center)
    Mr = U.T @ M @ Vt.T
    if k == 0:
        if M.max_abs() > RESIDUAL_TOL * _scale(M):
            raise RankError("kernel dimension drops away from the center", stage)
        return MatrixJet.constant(np.eye(q), M.order, M.center)
    A = Mr[:k, :k]
    B = Mr[:k, k:]
    C = Mr[k:, :k]
    D = Mr[k:, k:]
    AiB = A.inverse() @ B
    schur = D - C @ AiB
    if schur.max_abs() > RESIDUAL_TOL * _scale(M):
        raise RankError(
            f"kernel dimension is not constant near the center (defect {schur.max_abs():.2e})",
            stage,
        )

    top = -AiB
    K = vstack([top, MatrixJet.identity(q - k, top.order, M.center)])
    return Vt.T @ K


def subspace_extension(B: MatrixJet, i: int = 1, stage: str = "flag") -> MatrixJet:
    """Span of ``B, B', ..., B^{(i)}`` as a constant-rank jet basis."""
    if i == 0:
        return B
    if B.order < i:
        raise JetOrderError(i, B.order, stage)
    parts = [B.derive(k).truncate(B.order - i) for k in range(i + 1)]
    return jet_column_space(hstack(parts), stage=stage)


def subspace_contraction1(B: MatrixJet, stage: str = "flag") -> MatrixJet:
    """First contraction ``{B c : B' c in span B}`` of a subspace curve."""
    k = B.cols
    if k == 0:
        return B
    if B.order < 1:
        raise JetOrderError(1, B.order, stage)
    Bd = B.derive()
    M = hstack([Bd, -B.truncate(Bd.order)])
    K = jet_kernel(M, stage=stage)
    top = K[:k, :]
    return B.truncate(top.order) @ top


def extension(curve: CurveJet, i: int) -> MatrixJet:
    """Jet basis of ``Lambda^{(i)}``."""
    if i < 0:
        raise InputError("extension index must be nonnegative")
    return subspace_extension(curve.frame, i)


def contraction(curve: CurveJet, i: int) -> MatrixJet:
    """Jet basis of ``Lambda_{(i)}``, computed as iterated kernels of the velocity."""
    if i < 0:
        raise InputError("contraction index must be nonnegative")
    B = curve.frame
    for _ in range(i):
        B = subspace_contraction1(B)
    return B


def duality_residual(curve: CurveJet, i: int) -> float:
    """Largest ``|omega(v, w)|`` over orthonormal bases of ``Lambda_{(i)}`` and ``Lambda^{(i)}`` at the center."""
    lo = orth(contraction(curve, i).value)
    hi = orth(extension(curve, i).value)
    if lo.shape[1] == 0 or hi.shape[1] == 0:
        return 0.0
    return float(np.max(np.abs(omega_pairing(lo, hi))))


# Young diagram ------------------------------------------------------------------

@dataclass
class FlagReport:
    young_diagram: YoungDiagram
    reduced: ReducedDiagram
    ext_dims: List[int]
    con_dims: List[int]
    monotonicity: str
    conditionG: bool
    inertia: List[Tuple[int, int]]
    g_ranks: List[int] = field(default_factory=list)
    trust_radius: float = 0.0

    @property
    def p1(self) -> int:
        return self.reduced.p[0]

    def to_json(self) -> dict:
        return {
            "diagram": self.young_diagram.to_json(),
            "reduced": self.reduced.to_json(),
            "extension_dims": self.ext_dims,
            "contraction_dims": self.con_dims,
            "monotonicity": self.monotonicity,
            "conditionG": self.conditionG,
            "inertia": [list(x) for x in self.inertia],
        }


def extension_dims(curve: CurveJet) -> List[int]:
    """``dim Lambda^{(i)}`` for ``i = 0, 1, ...`` until it stabilizes."""
    dims = [curve.n]
    B = curve.frame
    while True:
        if B.order < 1:
            raise JetOrderError(len(dims) + 1, curve.order, "flag")
        nxt = subspace_extension(B, 1)
        dims.append(nxt.cols)
        if dims[-1] == dims[-2]:
            dims.pop()
            return dims
        B = nxt


def _monotonicity(curve: CurveJet, tol: float = 1e-9) -> Tuple[str, float]:
    Q = velocity_form(curve.frame)
    Q0 = Q.value
    q0 = float(np.max(np.abs(Q0)))
    if q0 <= 1e-12 * max(1.0, curve.frame.max_abs() ** 2):
        raise AnalyzabilityError("zero velocity at the center", "flag")
    radii = [1.0]
    for k in range(1, Q.order + 1):
        qk = float(np.max(np.abs(Q.coeffs[k])))
        if qk > 0:
            radii.append(0.5 * (q0 / qk) ** (1.0 / k))
    rho = min(radii)
    signs = set()
    for t in [curve.center] + list(curve.center + np.linspace(-rho, rho, 5)):
        ev = np.linalg.eigvalsh(Q(t))
        thr = tol * max(1.0, float(np.max(np.abs(ev))))
        if np.all(ev >= -thr):
            signs.add(1)
        elif np.all(ev <= thr):
            signs.add(-1)
        else:
            signs.add(0)
    if signs == {1}:
        return "nondecreasing", rho
    if signs == {-1}:
        return "nonincreasing", rho
    return "indefinite", rho


def _inertia_of(S: np.ndarray, tol: float = 1e-8) -> Tuple[int, int, int]:
    ev = np.linalg.eigvalsh(0.5 * (S + S.T))
    thr = tol * max(1.0, float(np.max(np.abs(ev), initial=0.0)))
    return int(np.sum(ev > thr)), int(np.sum(ev < -thr)), int(np.sum(np.abs(ev) > thr))


def condition_g(curve: CurveJet, delta: ReducedDiagram) -> Tuple[bool, List[Tuple[int, int]], List[int]]:
    """Check the rank condition and compute per-level inertia indices.

    For each level ``i`` the velocity form at the center is restricted to
    ``(Lambda_{(p_i - 1)})^{(p_i - 1)}``; its rank must be
    ``r_1 + ... + r_i``.
    """
    Q0 = velocity_form(curve.frame).value
    X0 = curve.frame.value
    ok = True
    gammas = [(0, 0)]
    ranks = []
    for i, (p, r) in enumerate(delta.levels):
        S = subspace_extension(contraction(curve, p - 1), p - 1, stage="conditionG").value
        c, *_ = np.linalg.lstsq(X0, S, rcond=None)
        pos, neg, rank = _inertia_of(c.T @ Q0 @ c)
        ranks.append(rank)
        if rank != sum(delta.r[: i + 1]):
            ok = False
        gammas.append((pos, neg))
    inertia = [
        (gammas[i + 1][0] - gammas[i][0], gammas[i + 1][1] - gammas[i][1])
        for i in range(delta.d)
    ]
    if any(a < 0 or b < 0 for a, b in inertia):
        ok = False
    return ok, inertia, ranks


def young_diagram(curve: CurveJet, tol: float = 1e-9) -> FlagReport:
    """Compute the Young diagram and the flag data of a curve.

    Raises
    ------
    AnalyzabilityError
        If the extensions stabilize below the whole space; use
        :func:`reduce_ambient` first in that case.
    """
    dims = extension_dims(curve)
    if dims[-1] != 2 * curve.n:
        raise AnalyzabilityError(
            f"extensions stabilize at dimension {dims[-1]} < {2 * curve.n}; reduce the ambient space",
            "flag",
        )
    cols = [b - a for a, b in zip(dims, dims[1:])]
    if not cols:
        raise AnalyzabilityError("zero velocity at the center", "flag")
    if any(a < b for a, b in zip(cols, cols[1:])):
        raise AnalyzabilityError(f"extension increments are not nonincreasing: {cols}", "flag")
    D = YoungDiagram.from_columns(cols)
    delta = reduce_diagram(D)
    con = [curve.n]
    B = curve.frame
    for _ in range(len(cols)):
        B = subspace_contraction1(B)
        con.append(B.cols)
    mono, rho = _monotonicity(curve, tol)
    okG, inertia, ranks = condition_g(curve, delta)
    return FlagReport(D, delta, dims, con, mono, okG, inertia, ranks, rho)


def reduce_ambient(curve: CurveJet) -> Tuple[CurveJet, dict]:
    """Pass to the quotient ``V / V^angle`` when the extensions stabilize at ``V``.

    Returns the quotient curve and a dict with the basis data used
    (``U``, ``W`` spanning a symplectic complement of ``V^angle`` in ``V``).
    """
    dims = extension_dims(curve)
    n = curve.n
    if dims[-1] == 2 * n:
        return curve, {"identity": True}
    p = len(dims) - 1
    Vj = subspace_extension(curve.frame, p)
    V0 = orth(Vj.value)
    # V must be constant: its derivative stays inside it
    if Vj.order >= 1:
        dV = Vj.derive().value
        resid = dV - V0 @ (V0.T @ dV)
        if np.max(np.abs(resid), initial=0.0) > RESIDUAL_TOL * _scale(Vj):
            raise AnalyzabilityError("stable extension is not constant in t", "reduce")
    Vs = Subspace(V0)
    K = skew_complement(Vs)
    # Euclidean complement of K inside V
    Kp = null_space(K.basis.T)
    C = orth(V0 @ (V0.T @ Kp))
    Ub, Wb = symplectic_basis(C)
    X = curve.frame
    alpha = omega_pairing(X, Wb).T
    beta = omega_pairing(Ub, X)

    image = vstack([alpha, beta])
    frame = jet_column_space(image, stage="reduce")
    return CurveJet(frame, curve.truth), {"identity": False, "U": Ub, "W": Wb, "dim_V": V0.shape[1]}
