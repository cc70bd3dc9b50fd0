"""Curvature invariants of a normal frame organized as a quiver representation.

The vertices are the levels of the reduced diagram, each carrying ``R^{r_i}``
with the form ``J_i = diag(I_{r+}, -I_{r-})``.  For every essential pair
``(a, b)`` the curvature map ``rho(a, b) = R(a, b) J_{level(a)}`` sends the
vertex of ``a`` to the vertex of ``b``.  A change of normal frame acts by
``rho -> U_j^{-1} rho U_i`` with constant ``U_i`` in ``O(r_i^+, r_i^-)``,
so traces of products along closed walks are invariants.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Tuple

import numpy as np

from .diagram import Pair, ReducedDiagram, Superbox, essential_pairs
from .errors import AnalyzabilityError, InputError
from .jets import MatrixJet, hstack
from .normal_frame import NormalFrameResult, signature_matrix
from .symplectic import numeric_rank, omega_pairing


@dataclass
class QuiverRep:
    delta: ReducedDiagram
    signatures: List[Tuple[int, int]]
    arrows: Dict[Pair, MatrixJet]

    @property
    def levels(self) -> List[Tuple[int, Tuple[int, int]]]:
        return [(r, s) for r, s in zip(self.delta.r, self.signatures)]

    def J(self, level: int) -> np.ndarray:
        return signature_matrix(*self.signatures[level - 1])

    def rho(self, a: Superbox, b: Superbox) -> MatrixJet:
        """Curvature map ``R(a, b) J_{level(a)}``."""
        return self.arrows[(a, b)] @ self.J(a.level)

    def adjoint_defect(self) -> float:
        """Largest deviation from ``rho(a, b)^* = rho(b, a)`` and antisymmetry of neighbour maps."""
        worst = 0.0
        for (a, b), _ in self.arrows.items():
            if (b, a) not in self.arrows:
                continue
            X = self.rho(a, b)
            adj = (self.J(a.level) @ X.T) @ self.J(b.level)
            worst = max(worst, (adj - self.rho(b, a)).max_abs())
            if a.level == b.level and b.col == a.col + 1:
                M = self.arrows[(a, b)]
                worst = max(worst, M.sym().max_abs())
        return worst

    def to_json(self) -> List[dict]:
        out = []
        for (a, b), M in sorted(self.arrows.items()):
            out.append(
                {
                    "a": list(a),
                    "b": list(b),
                    "jet": {"center": M.center, "rows": M.rows, "cols": M.cols, "coeffs": M.to_json()},
                }
            )
        return out


def extract_quiver(res: NormalFrameResult, tol: float = 1e-7) -> QuiverRep:
    """Essential curvature blocks of a normal frame.

    Raises
    ------
    AnalyzabilityError
        If a nonessential block is not zero within ``tol`` (relative to the
        size of the mapping).
    """
    delta = res.delta
    ess = essential_pairs(delta)
    scale = max([1.0] + [M.max_abs() for M in res.R.values()])
    arrows = {}
    for pair, M in res.R.items():
        if pair in ess:
            arrows[pair] = M
        elif M.max_abs() > tol * scale:
            raise AnalyzabilityError(
                f"nonessential block {pair} is nonzero ({M.max_abs():.2e})", "quiver"
            )
    return QuiverRep(delta, list(res.inertia), arrows)


@dataclass
class SplittingResult:
    V: Dict[Superbox, MatrixJet]
    complement: MatrixJet
    direct_sum_rank: int
    complement_isotropy: float
    splitting_rank: int


def splitting_and_complement(res: NormalFrameResult) -> SplittingResult:
    """Canonical splitting ``Lambda = ⊕ V_a`` and the complementary curve ``span F``."""
    delta = res.delta
    V = {a: res.E_of(a) for a in delta.superboxes()}
    E0 = res.E.value
    whole = np.hstack([E0, res.F.value])
    iso = omega_pairing(res.F, res.F).max_abs()
    return SplittingResult(V, res.F, numeric_rank(E0), iso, numeric_rank(whole))


def span_distance(A: np.ndarray, B: np.ndarray) -> float:
    """Distance between the column spans of two matrices (largest principal angle sine)."""
    Qa, _ = np.linalg.qr(A)
    Qb, _ = np.linalg.qr(B)
    if Qa.shape[1] != Qb.shape[1]:
        return float("inf")
    return float(np.linalg.norm(Qb - Qa @ (Qa.T @ Qb), 2))


# invariants ---------------------------------------------------------------------

def fingerprints(q: QuiverRep, max_coeff: int = 3) -> Dict[str, float]:
    """Gauge-invariant scalars of a curvature quiver.

    Each jet coefficient of ``rho`` transforms by the same constant
    conjugation, so for coefficients ``k, l`` the following are invariant:

    * ``tr rho_k(a, b)^m`` for loops at a vertex, ``m <= r``;
    * ``tr rho_k(a, b) rho_l(c, d)`` for every pair of arrows forming a closed walk;
    * eigenvalues of ``rho_0`` on loops.
    """
    K = min(max_coeff, min((M.order for M in q.arrows.values()), default=0))
    rhos = {pair: q.rho(*pair).coeffs[: K + 1] for pair in q.arrows}
    out: Dict[str, float] = {}
    keys = sorted(rhos)
    for (a, b) in keys:
        X = rhos[(a, b)]
        if a.level == b.level:
            r = X.shape[1]
            for k in range(K + 1):
                P = np.eye(r)
                for m in range(1, r + 1):
                    P = P @ X[k]
                    out[f"tr{m}[{a}{b}]_{k}"] = float(np.trace(P))
            ev = np.sort_complex(np.linalg.eigvals(X[0]))
            for m, z in enumerate(ev):
                out[f"eig[{a}{b}]_{m}"] = float(z.real)
    for (a, b), (c, d) in product(keys, keys):
        if (a, b) > (c, d):
            continue
        if b.level != c.level or d.level != a.level:
            continue
        X, Y = rhos[(a, b)], rhos[(c, d)]
        for k, l in product(range(K + 1), range(K + 1)):
            out[f"tr[{a}{b}]_{k}[{c}{d}]_{l}"] = float(np.trace(Y[l] @ X[k]))
    return out


@dataclass
class Comparison:
    isomorphic: bool
    max_diff: float
    worst: str = ""
    details: Dict[str, float] = field(default_factory=dict)


def compare_invariants(q1: QuiverRep, q2: QuiverRep, tol: float = 1e-6) -> Comparison:
    """Compare two quivers through their fingerprints.

    Equal fingerprints are necessary for isomorphism; they are treated as
    sufficient here, so distinct quivers with colliding fingerprints would
    be reported as isomorphic.
    """
    if q1.delta != q2.delta:
        raise InputError(f"diagram mismatch: {q1.delta.levels} vs {q2.delta.levels}")
    if q1.signatures != q2.signatures:
        return Comparison(False, float("inf"), "signature")
    # compare only the jet coefficients both quivers carry
    depth = min([3] + [M.order for M in q1.arrows.values()] + [M.order for M in q2.arrows.values()])
    f1, f2 = fingerprints(q1, depth), fingerprints(q2, depth)
    worst, wkey = 0.0, ""
    details = {}
    for k in f1.keys() | f2.keys():
        if k not in f1 or k not in f2:
            details[k] = float("inf")
            worst, wkey = float("inf"), k
            continue
        d = abs(f1[k] - f2[k]) / max(1.0, abs(f1[k]))
        details[k] = d
        if d > worst:
            worst, wkey = d, k
    return Comparison(worst <= tol, worst, wkey, details)
