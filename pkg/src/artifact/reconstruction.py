"""Curves with prescribed diagram, inertia and curvature mapping.

The structural equation is linear in the frame ``Y = [E | F]``::

    Y' = Y C(t)

with ``C`` assembled from ``R`` and the diagram, so a curve with a given
normal mapping is obtained by a single series solve from the canonical
Darboux frame at the center.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .diagram import (
    CompatibleMapping,
    Pair,
    ReducedDiagram,
    Superbox,
    YoungDiagram,
    check_shapes,
    complete_mapping,
    essential_pairs,
    reduce_diagram,
    validate_mapping,
)
from .errors import InputError
from .flag import CurveJet
from .jets import MatrixJet, jet_ode_solve
from .normal_frame import NormalFrameResult, signature_matrix
from .symplectic import canonical_darboux


@dataclass
class CurvatureSpec:
    """Young diagram, per-level inertia ``(r+, r-)`` and curvature blocks.

    ``arrows[(a, b)]`` is the ``size(b) x size(a)`` block ``R(a, b)``, either a
    constant array or a :class:`MatrixJet`.  Missing transposes and
    nonessential pairs are filled in by :meth:`mapping`.
    """

    diagram: YoungDiagram
    inertia: List[Tuple[int, int]]
    arrows: Dict[Pair, Union[np.ndarray, MatrixJet]] = field(default_factory=dict)

    def __post_init__(self):
        self.inertia = [tuple(int(x) for x in pr) for pr in self.inertia]
        delta = self.reduced
        if len(self.inertia) != delta.d:
            raise InputError(f"need inertia for {delta.d} levels, got {len(self.inertia)}")
        for (pos, neg), r in zip(self.inertia, delta.r):
            if pos < 0 or neg < 0 or pos + neg != r:
                raise InputError(f"inertia {(pos, neg)} does not add up to level size {r}")

    @property
    def reduced(self) -> ReducedDiagram:
        return reduce_diagram(self.diagram)

    def mapping(self, order: int, center: float = 0.0) -> CompatibleMapping:
        """Full compatible mapping with jets of the given order."""
        arrows = {}
        for pair, M in self.arrows.items():
            if isinstance(M, MatrixJet):
                if M.center != center:
                    raise InputError(f"arrow {pair} centered at {M.center}, expected {center}")
                if M.order < order:
                    c = np.zeros((order + 1,) + M.shape)
                    c[: M.order + 1] = M.coeffs
                    M = MatrixJet(c, center)
                arrows[pair] = M.truncate(order)
            else:
                arrows[pair] = MatrixJet.constant(np.atleast_2d(np.asarray(M, float)), order, center)
        delta = self.reduced
        check_shapes(arrows, delta)
        return complete_mapping(arrows, delta, order, center)

    def validate(self, order: int = 0, center: float = 0.0, tol: float = 1e-10):
        return validate_mapping(self.mapping(order, center), self.reduced, "normal", tol)

    def to_json(self) -> dict:
        arrows = []
        for (a, b), M in sorted(self.arrows.items()):
            if isinstance(M, MatrixJet):
                jet = {"center": M.center, "rows": M.rows, "cols": M.cols, "coeffs": M.to_json()}
            else:
                M = np.atleast_2d(np.asarray(M, float))
                jet = {"rows": M.shape[0], "cols": M.shape[1], "coeffs": [[float(x)] for x in M.ravel()]}
            arrows.append({"a": list(a), "b": list(b), "jet": jet})
        return {
            "diagram": self.diagram.to_json(),
            "inertia": [list(x) for x in self.inertia],
            "arrows": arrows,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CurvatureSpec":
        try:
            D = YoungDiagram.from_json(obj["diagram"])
            inertia = obj.get("inertia")
            delta = reduce_diagram(D)
            if inertia is None:
                inertia = [(r, 0) for r in delta.r]
            arrows = {}
            for item in obj.get("arrows", []):
                a = Superbox(*item["a"])
                b = Superbox(*item["b"])
                jet = item["jet"]
                rows = int(jet.get("rows", delta.size(b)))
                cols = int(jet.get("cols", delta.size(a)))
                M = MatrixJet.from_json(jet["coeffs"], rows, cols, float(jet.get("center", 0.0)))
                arrows[(a, b)] = M
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"malformed curvature spec: {exc}") from exc
        return cls(D, inertia, arrows)


def structure_matrix(
    R: CompatibleMapping, delta: ReducedDiagram, inertia: List[Tuple[int, int]], order: int, center: float
) -> MatrixJet:
    """Coefficient ``C(t)`` of the structural equation ``Y' = Y C`` with ``Y = [E | F]``."""
    n = delta.n
    off = delta.offsets()
    C = np.zeros((order + 1, 2 * n, 2 * n))
    for a in delta.superboxes():
        sa = off[a]
        fa = slice(n + sa.start, n + sa.stop)
        if a.col == 1:
            C[0, fa, sa] = signature_matrix(*inertia[a.level - 1])
        else:
            C[0, off[delta.left(a)], sa] = np.eye(delta.size(a))
        for b in delta.superboxes():
            C[:, off[b], fa] = R[(a, b)].coeffs[: order + 1]
        ra = delta.right(a)
        if ra is not None:
            sr = off[ra]
            C[0, slice(n + sr.start, n + sr.stop), fa] -= np.eye(delta.size(a))
    return MatrixJet(C, center)


def reconstruct(
    spec: CurvatureSpec, t0: float = 0.0, order: int = 12, check: bool = True
) -> Tuple[CurveJet, NormalFrameResult]:
    """Integrate the structural equation from the canonical Darboux frame at ``t0``.

    Returns the curve ``span E(t)`` and the frame with the prescribed mapping.
    """
    delta = spec.reduced
    R = spec.mapping(order - 1, t0)
    if check:
        rep = validate_mapping(R, delta, "normal", 1e-10)
        if not rep.ok:
            lines = ", ".join(f"{v.kind} at {v.pair}" for v in rep.violations[:5])
            raise InputError(f"curvature spec is not a normal mapping: {lines}")
    C = structure_matrix(R, delta, spec.inertia, order - 1, t0)
    n = delta.n
    E0, F0 = canonical_darboux(n)
    Y0 = np.hstack([E0, F0])
    Y = jet_ode_solve(C.T, Y0.T).T
    E = Y[:, :n]
    F = Y[:, n:]
    res = NormalFrameResult(delta, E, F, R, list(spec.inertia))
    return CurveJet(E, truth=spec), res


def frame_match(res_a: NormalFrameResult, res_b: NormalFrameResult) -> Tuple[np.ndarray, float]:
    """Constant ``S`` with ``S [E_a | F_a](t0) = [E_b | F_b](t0)`` and the largest jet mismatch."""
    Ya = np.hstack([res_a.E.value, res_a.F.value])
    Yb = np.hstack([res_b.E.value, res_b.F.value])
    S = Yb @ np.linalg.inv(Ya)
    from .jets import hstack

    A = hstack([res_a.E, res_a.F])
    B = hstack([res_b.E, res_b.F])
    o = min(A.order, B.order)
    diff = (S @ A.truncate(o) - B.truncate(o)).max_abs()
    return S, diff


def spec_from_result(res: NormalFrameResult, diagram: Optional[YoungDiagram] = None) -> CurvatureSpec:
    """Curvature spec holding the essential blocks of an analyzed frame."""
    delta = res.delta
    D = diagram if diagram is not None else delta.expand()
    arrows = {}
    for a, b in sorted(essential_pairs(delta)):
        if (b, a) in arrows:
            continue
        arrows[(a, b)] = res.R[(a, b)]
    return CurvatureSpec(D, list(res.inertia), arrows)


@dataclass
class RoundtripReport:
    ok: bool
    fingerprint_diff: float
    frame_mismatch: float
    arrow_diff: float
    symplectic_defect: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def roundtrip(curve: CurveJet, tol: float = 1e-6) -> RoundtripReport:
    """Analyze, reconstruct from the resulting curvatures, and analyze again."""
    from .curvature_quiver import compare_invariants, extract_quiver
    from .normal_frame import normal_frame
    from .symplectic import symplectic_defect

    res1 = normal_frame(curve)
    q1 = extract_quiver(res1)
    spec = spec_from_result(res1, res1.report.young_diagram)
    curve2, built = reconstruct(spec, curve.center, curve.order, check=False)
    res2 = normal_frame(curve2)
    q2 = extract_quiver(res2)
    cmp = compare_invariants(q1, q2, tol)
    S, mismatch = frame_match(res1, built)
    arrow = 0.0
    for key, M in res1.R.items():
        N = res2.R[key]
        o = min(M.order, N.order)
        arrow = max(arrow, min((M.truncate(o) - N.truncate(o)).max_abs(), (M.truncate(o) + N.truncate(o)).max_abs()))
    scale = max(1.0, res1.E.max_abs(), res1.F.max_abs())
    ok = cmp.isomorphic and mismatch <= tol * scale
    return RoundtripReport(ok, cmp.max_diff, mismatch, arrow, symplectic_defect(S))
