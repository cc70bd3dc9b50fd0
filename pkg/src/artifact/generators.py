"""Test curves with known ground truth."""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .diagram import Pair, Superbox, YoungDiagram, essential_pairs, reduce_diagram
from .flag import CurveJet
from .jets import MatrixJet
from scipy.linalg import expm
from .reconstruction import CurvatureSpec, reconstruct
from .symplectic import canonical_darboux, omega_matrix, random_symplectic


def flat_curve(D: YoungDiagram, t0: float = 0.0, order: int = 12) -> CurveJet:
    """Curve whose normal mapping vanishes identically."""
    delta = reduce_diagram(D)
    spec = CurvatureSpec(D, [(r, 0) for r in delta.r], {})
    curve, _ = reconstruct(spec, t0, order)
    return curve


def linear_hamiltonian_jacobi(H: np.ndarray, t0: float = 0.0, order: int = 12) -> CurveJet:
    """Jacobi curve ``exp(t Omega H)`` applied to the vertical plane, expanded at ``t0``.

    ``Omega^{-1} H`` is the Hamiltonian vector field of ``x^T H x / 2`` for
    the form ``omega(x, y) = x^T Omega y``; the curve is transported by the
    backward flow, which makes it nondecreasing for positive ``H``.
    """
    H = np.asarray(H, float)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] % 2:
        raise ValueError("H must be a square matrix of even size")
    H = 0.5 * (H + H.T)
    n = H.shape[0] // 2
    A = omega_matrix(n) @ H
    E0, _ = canonical_darboux(n)
    c = np.zeros((order + 1, 2 * n, n))
    c[0] = expm(t0 * A) @ E0
    for k in range(1, order + 1):
        c[k] = A @ c[k - 1] / k
    return CurveJet(MatrixJet(c, t0), check=False)


def random_spec(
    D: YoungDiagram,
    inertia: Optional[Sequence[Tuple[int, int]]] = None,
    seed: Optional[int] = None,
    amplitude: float = 0.5,
    jet_order: int = 2,
    center: float = 0.0,
) -> CurvatureSpec:
    """Random normal curvature mapping on the essential pairs of ``D``.

    Blocks are polynomial jets of degree ``jet_order`` with coefficients of
    size ``amplitude``; diagonal blocks are symmetric and blocks between
    neighbours in a level are antisymmetric.
    """
    rng = np.random.default_rng(seed)
    delta = reduce_diagram(D)
    if inertia is None:
        inertia = [(r, 0) for r in delta.r]
    arrows: Dict[Pair, MatrixJet] = {}
    for a, b in sorted(essential_pairs(delta)):
        if (b, a) in arrows:
            continue
        shape = (delta.size(b), delta.size(a))
        c = rng.standard_normal((jet_order + 1,) + shape) * amplitude
        c /= np.arange(1, jet_order + 2)[:, None, None]
        if a == b:
            c = 0.5 * (c + np.transpose(c, (0, 2, 1)))
        elif a.level == b.level and abs(a.col - b.col) == 1:
            c = 0.5 * (c - np.transpose(c, (0, 2, 1)))
        arrows[(a, b)] = MatrixJet(c, center)
    return CurvatureSpec(D, list(inertia), arrows)


def random_curve(
    D: YoungDiagram,
    inertia: Optional[Sequence[Tuple[int, int]]] = None,
    seed: Optional[int] = None,
    amplitude: float = 0.5,
    t0: float = 0.0,
    order: int = 12,
    conjugate: bool = True,
) -> CurveJet:
    """Curve realizing a random spec, moved by a random symplectic map.

    The curvature spec is kept in ``curve.truth``.
    """
    spec = random_spec(D, inertia, seed, amplitude, center=t0)
    curve, _ = reconstruct(spec, t0, order)
    if conjugate:
        S = random_symplectic(reduce_diagram(D).n, seed=None if seed is None else seed + 7919)
        curve = CurveJet(S @ curve.frame, truth=spec)
    return curve


def rotating_line(t0: float = 0.0, order: int = 12) -> CurveJet:
    """``cos(t) f + sin(t) e`` in the plane."""
    return linear_hamiltonian_jacobi(np.eye(2), t0, order)


def diagrams_up_to(size: int) -> List[YoungDiagram]:
    """All Young diagrams with at most ``size`` boxes."""
    out: List[YoungDiagram] = []

    def parts(n, largest):
        if n == 0:
            yield ()
            return
        for k in range(min(n, largest), 0, -1):
            for rest in parts(n - k, k):
                yield (k,) + rest

    for n in range(1, size + 1):
        for rows in parts(n, n):
            out.append(YoungDiagram(rows))
    return out
