"""Construction of the normal moving frame and the normal curvature mapping.

Pipeline, level by level of the reduced diagram:

1. canonical complements ``V_i`` and their canonical quadratic forms ``Q_i``;
2. normalization of a basis of ``V_i`` so that the canonical form reads
   ``J_i = diag(I_{r+}, -I_{r-})``, followed by the horizontal section;
3. filling the diagram by derivatives and seeding ``F`` on the first column;
4. Darboux completion and the column-by-column quasi-normal correction.

Frames are stored as ``2n x n`` matrix jets with columns in diagram order
(see :meth:`ReducedDiagram.offsets`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import expm, qr

from .diagram import (
    CompatibleMapping,
    ReducedDiagram,
    Superbox,
    ValidationReport,
    chain_pairs,
    validate_mapping,
)
from .errors import AnalyzabilityError, JetOrderError
from .flag import (
    CurveJet,
    FlagReport,
    jet_column_space,
    jet_kernel,
    subspace_contraction1,
    subspace_extension,
    young_diagram,
)
from .jets import MatrixJet, hstack, matrix_sqrt_near_identity, jet_ode_solve
from .symplectic import _apply_omega, darboux_defect, omega_pairing, orth


def signature_matrix(pos: int, neg: int) -> np.ndarray:
    return np.diag([1.0] * pos + [-1.0] * neg)


# order bookkeeping ---------------------------------------------------------------

def _complement_depth(delta: ReducedDiagram, i: int) -> int:
    """Jet orders consumed before the basis of ``V_i`` is available."""
    if i == 1:
        return delta.p[0] - 1
    return max(max(3 * delta.p[k] - 2 for k in range(i - 1)), delta.p[i - 1] - 1)


def curvature_depth(delta: ReducedDiagram) -> int:
    """Jet orders consumed by the whole pipeline before ``R`` is known."""
    dF = max(_complement_depth(delta, i + 1) + 3 * p - 1 for i, p in enumerate(delta.p))
    return dF + delta.p[0]


def required_order(delta: ReducedDiagram) -> int:
    """Minimum jet order of the input curve for a full analysis."""
    return max(4 * delta.p[0] + 2, curvature_depth(delta) + 1)


# canonical complements -------------------------------------------------------------

@dataclass
class LevelData:
    p: int
    r: int
    V: MatrixJet
    W: Optional[MatrixJet]
    Q: MatrixJet
    inertia: Tuple[int, int]


@dataclass
class CanonicalComplements:
    levels: List[LevelData]
    W_dims: List[int]


def _contractions(curve: CurveJet, upto: int) -> List[MatrixJet]:
    out = [curve.frame]
    for _ in range(upto):
        out.append(subspace_contraction1(out[-1], stage="complements"))
    return out


def canonical_form(V: MatrixJet, p: int) -> MatrixJet:
    """``omega(V^{(p)}, V^{(p-1)})`` for a basis jet ``V`` of a canonical complement."""
    Vp = V.derive(p)
    return omega_pairing(Vp, V.derive(p - 1).truncate(Vp.order))


def _inertia(S: np.ndarray, tol: float = 1e-8) -> Tuple[int, int]:
    ev = np.linalg.eigvalsh(0.5 * (S + S.T))
    thr = tol * max(1.0, float(np.max(np.abs(ev), initial=0.0)))
    if np.any(np.abs(ev) <= thr):
        raise AnalyzabilityError("canonical quadratic form is degenerate", "complements")
    return int(np.sum(ev > 0)), int(np.sum(ev < 0))


def random_basis_change(V: MatrixJet, rng: np.random.Generator, scale: float = 0.3) -> MatrixJet:
    """Multiply a basis jet by a random invertible jet (well conditioned at the center)."""
    r = V.cols
    A = rng.standard_normal((r, r))
    Q, _ = np.linalg.qr(A)
    c = rng.standard_normal((V.order + 1, r, r)) * scale
    c[0] = Q @ np.diag(rng.uniform(0.5, 2.0, r))
    return V @ MatrixJet(c, V.center)


def canonical_complements(
    curve: CurveJet, report: FlagReport, rng: Optional[np.random.Generator] = None
) -> CanonicalComplements:
    """Canonical complements ``V_i = Lambda_{(p_i-1)} ∩ W_{i-1}^angle`` with their forms."""
    if not report.conditionG:
        raise AnalyzabilityError("condition (G) fails", "complements")
    delta = report.reduced
    cons = _contractions(curve, delta.p[0] - 1)
    # building blocks of W_i
    blocks = [
        subspace_extension(cons[p - 1], 2 * p - 1, stage="complements") for p in delta.p
    ]
    levels: List[LevelData] = []
    W_dims: List[int] = []
    for i, (p, r) in enumerate(delta.levels):
        B = cons[p - 1]
        if i == 0:
            V = B
            W = None
        else:
            W = jet_column_space(hstack(blocks[:i]), stage="complements")
            P = omega_pairing(W, B.truncate(W.order) if B.order > W.order else B)
            K = jet_kernel(P, stage="complements")
            V = B.truncate(K.order) @ K
        if V.cols != r:
            raise AnalyzabilityError(
                f"canonical complement of level {i + 1} has dimension {V.cols}, expected {r}",
                "complements",
            )
        if rng is not None:
            V = random_basis_change(V, rng)
        Q = canonical_form(V, p)
        if Q.antisym().max_abs() > 1e-6 * max(1.0, Q.max_abs()):
            raise AnalyzabilityError("canonical form is not symmetric", "complements")
        Q = Q.sym()
        levels.append(LevelData(p, r, V, W, Q, _inertia(Q.value)))
        Wi = jet_column_space(hstack(blocks[: i + 1]), stage="complements")
        W_dims.append(Wi.cols)
    return CanonicalComplements(levels, W_dims)


# normalization and horizontal sections -----------------------------------------------

def _echelon_basis(V0: np.ndarray) -> np.ndarray:
    """Coefficients ``c`` with ``V0 c`` the canonical echelon basis of the span of ``V0``.

    Pivot coordinates are chosen from the orthogonal projector, so the
    result depends only on the subspace, not on the basis ``V0``.
    """
    r = V0.shape[1]
    P = orth(V0)
    P = P @ P.T
    _, _, piv = qr(P, pivoting=True)
    rows = np.sort(piv[:r])
    return np.linalg.inv(V0[rows, :])


def pseudo_gram_schmidt(Q0: np.ndarray, pos: int, neg: int, tol: float = 1e-10) -> np.ndarray:
    """Columns ``G`` with ``G^T Q0 G = diag(I_pos, -I_neg)``.

    Vectors are processed in order; when the next one is (nearly) null for
    the current form, the remaining vector with largest ``|q|`` is used as
    pivot.  Positive vectors are placed first and every column is scaled so
    that its first nonzero entry is positive.
    """
    r = Q0.shape[0]
    Q0 = 0.5 * (Q0 + Q0.T)
    scale = max(1.0, float(np.max(np.abs(Q0))))
    rest = [np.eye(r)[:, k] for k in range(r)]
    done: List[Tuple[np.ndarray, float]] = []
    while rest:
        qs = [float(v @ Q0 @ v) for v in rest]
        k = 0 if abs(qs[0]) > 1e-3 * scale else int(np.argmax(np.abs(qs)))
        v = rest.pop(k)
        q = qs[k]
        if abs(q) <= tol * scale:
            # every remaining vector is null: mix in a partner
            partner = max(range(len(rest)), key=lambda j: abs(v @ Q0 @ rest[j]), default=None)
            if partner is None or abs(v @ Q0 @ rest[partner]) <= tol * scale:
                raise AnalyzabilityError("pseudo Gram-Schmidt pivot below tolerance", "normalize")
            v = v + rest[partner]
            q = float(v @ Q0 @ v)
            if abs(q) <= tol * scale:
                v = v - 2 * rest[partner]
                q = float(v @ Q0 @ v)
        u = v / np.sqrt(abs(q))
        s = np.sign(q)
        done.append((u, s))
        rest = [w - s * (u @ Q0 @ w) * u for w in rest]
    if sum(1 for _, s in done if s > 0) != pos:
        raise AnalyzabilityError("inertia changed during normalization", "normalize")
    ordered = [u for u, s in done if s > 0] + [u for u, s in done if s < 0]
    G = np.column_stack(ordered)
    for k in range(r):
        col = G[:, k]
        nz = np.flatnonzero(np.abs(col) > 1e-12 * np.max(np.abs(col)))
        if col[nz[0]] < 0:
            G[:, k] = -col
    return G


def random_pseudo_orthogonal(pos: int, neg: int, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    """Random element of ``O(pos, neg)`` (connected component of the identity)."""
    J = signature_matrix(pos, neg)
    A = rng.standard_normal((pos + neg, pos + neg)) * scale
    A = A - A.T
    return expm(J @ A)


def normalize_basis(
    E0: MatrixJet, p: int, Q: MatrixJet, inertia: Tuple[int, int], O: Optional[np.ndarray] = None
) -> MatrixJet:
    """Rescale the basis so that its canonical form equals ``J`` identically."""
    pos, neg = inertia
    J = signature_matrix(pos, neg)
    c = _echelon_basis(E0.value)
    G0 = c @ pseudo_gram_schmidt(c.T @ Q.value @ c, pos, neg)
    if O is not None:
        G0 = G0 @ O
    Qt = (G0.T @ Q) @ G0
    M = J @ Qt
    S = matrix_sqrt_near_identity(M)
    H = S.inverse()
    return (E0.truncate(H.order) @ G0) @ H


def horizontal_section(E1: MatrixJet, p: int, J: np.ndarray) -> Tuple[MatrixJet, MatrixJet]:
    """Correct a normalized basis so that its ``p``-th derivatives span an isotropic subspace.

    Solves ``U' = -(1/2p) J A U`` with ``A = omega(E1^{(p)}, E1^{(p)})``
    and ``U(t0) = I``.  Returns ``(E1 U, U)``.
    """
    Ep = E1.derive(p)
    A = omega_pairing(Ep, Ep)
    if A.sym().max_abs() > 1e-6 * max(1.0, A.max_abs()):
        raise AnalyzabilityError("derivative pairing is not antisymmetric", "horizontal")
    A = A.antisym()
    U = jet_ode_solve((J @ A) * (-1.0 / (2 * p)), np.eye(E1.cols))
    return E1.truncate(U.order) @ U, U


# frame assembly --------------------------------------------------------------------

@dataclass
class NormalFrameResult:
    """Normal moving frame ``(E, F)`` and its curvature mapping ``R``.

    ``E`` and ``F`` are ``2n x n`` jets in diagram order; ``R[(a, b)]`` is
    the ``size(b) x size(a)`` coefficient of ``E_b`` in ``F_a'``.
    """

    delta: ReducedDiagram
    E: MatrixJet
    F: MatrixJet
    R: CompatibleMapping
    inertia: List[Tuple[int, int]]
    report: Optional[FlagReport] = None
    complements: Optional[CanonicalComplements] = None
    sections: Dict[int, MatrixJet] = field(default_factory=dict)

    def J(self, level: int) -> np.ndarray:
        return signature_matrix(*self.inertia[level - 1])

    def block(self, X: MatrixJet, a: Superbox) -> MatrixJet:
        return X[:, self.delta.offsets()[a]]

    def E_of(self, a: Superbox) -> MatrixJet:
        return self.block(self.E, a)

    def F_of(self, a: Superbox) -> MatrixJet:
        return self.block(self.F, a)

    @property
    def order(self) -> int:
        return min(M.order for M in self.R.values())

    def curve(self) -> CurveJet:
        return CurveJet(self.E)


def fill_diagram(delta: ReducedDiagram, sections: List[MatrixJet], inertia) -> Tuple[MatrixJet, Dict[Superbox, MatrixJet]]:
    """``E_{l^j(sigma_i)} = E_{sigma_i}^{(j)}`` and ``F_{a_i} = E_{a_i}' J_i``.

    Returns the assembled ``E`` jet and the first-column ``F`` blocks.
    """
    Eblocks: Dict[Superbox, MatrixJet] = {}
    F1: Dict[Superbox, MatrixJet] = {}
    for i, (p, r) in enumerate(delta.levels):
        Es = sections[i]
        J = signature_matrix(*inertia[i])
        for c in range(1, p + 1):
            Eblocks[Superbox(i + 1, c)] = Es.derive(p - c)
        F1[Superbox(i + 1, 1)] = Es.derive(p) @ J
    E = hstack([Eblocks[a] for a in delta.superboxes()])
    return E, F1


def darboux_completion(E: MatrixJet, F1: Dict[Superbox, MatrixJet], delta: ReducedDiagram) -> MatrixJet:
    """Complete ``E`` with the prescribed first-column ``F`` blocks to a Darboux frame."""
    off = delta.offsets()
    n = E.cols
    order = min([E.order] + [f.order for f in F1.values()])
    E = E.truncate(order)
    Ginv = (E.T @ E).inverse()
    G = MatrixJet(_apply_omega(E.coeffs), E.center) @ Ginv
    G = G - (E @ omega_pairing(G, G)) * 0.5
    # coefficients of the prescribed columns along E
    C = np.zeros((order + 1, n, n))
    first = np.zeros(n, bool)
    for a, Fa in F1.items():
        sl = off[a]
        T = Ginv @ (E.T @ (Fa.truncate(order) - G[:, sl]))
        C[:, :, sl] = T.coeffs
        first[sl] = True
    # symmetric S agreeing with C on the first columns; the first-by-first
    # block is symmetric up to rounding by isotropy of the seed
    Ct = np.transpose(C, (0, 2, 1))
    S = C + Ct
    idx = np.flatnonzero(first)
    S[:, idx[:, None], idx[None, :]] -= C[:, idx[:, None], idx[None, :]]
    S = 0.5 * (S + np.transpose(S, (0, 2, 1)))
    return G + E @ MatrixJet(S, E.center)


def extract_R(E: MatrixJet, F: MatrixJet, delta: ReducedDiagram) -> CompatibleMapping:
    """``R(a, b) = omega(F_b, F_a')`` for all pairs of superboxes."""
    Fd = F.derive()
    P = omega_pairing(F.truncate(Fd.order), Fd)
    off = delta.offsets()
    R: CompatibleMapping = {}
    for a in delta.superboxes():
        for b in delta.superboxes():
            R[(a, b)] = P[off[b], off[a]]
    return R


def quasi_normal_complete(
    E: MatrixJet, F: MatrixJet, delta: ReducedDiagram
) -> Tuple[MatrixJet, CompatibleMapping]:
    """Correct ``F`` column by column until the curvature mapping is quasi-normal.

    At step ``k`` the update ``F_x -> F_x + sum_y E_y Gamma(x, y)`` with a
    symmetric ``Gamma`` supported on columns ``> k`` kills the blocks
    ``R(a, b)`` forbidden for ``a`` in column ``k`` and removes the
    symmetric part of ``R(a, r(a))``.
    """
    off = delta.offsets()
    n = E.cols
    for k in range(1, delta.p[0]):
        R = extract_R(E, F, delta)
        order = min(M.order for M in R.values())
        Gam = np.zeros((order + 1, n, n))

        def put(x, y, M):
            # Gamma(x, y) is size(y) x size(x), stored at rows of y, cols of x
            Gam[:, off[y], off[x]] = M
            Gam[:, off[x], off[y]] = np.transpose(M, (0, 2, 1))

        for a in delta.column(k):
            ra = delta.right(a)
            if ra is None:
                continue
            for b in delta.superboxes():
                if b.col >= k + 2:
                    put(ra, b, -R[(a, b)].coeffs)
                elif b.col == k + 1 and b != ra and b.level < a.level:
                    put(ra, b, -R[(a, b)].coeffs)
            put(ra, ra, -R[(a, ra)].sym().coeffs)
        F = F.truncate(order) + E.truncate(order) @ MatrixJet(Gam, E.center)
    return F, extract_R(E, F, delta)


# verification ----------------------------------------------------------------------

def structural_residual(res: NormalFrameResult) -> float:
    """Largest coefficient of the structural-equation residual over all jet orders."""
    delta = res.delta
    Ed = res.E.derive()
    Fd = res.F.derive()
    worst = 0.0
    for a in delta.superboxes():
        dE = res.block(Ed, a)
        if a.col == 1:
            target = res.block(res.F, a) @ res.J(a.level)
        else:
            target = res.block(res.E, delta.left(a))
        o = min(dE.order, target.order)
        worst = max(worst, (dE.truncate(o) - target.truncate(o)).max_abs())
        dF = res.block(Fd, a)
        acc = None
        for b in delta.superboxes():
            term = res.block(res.E, b).truncate(res.R[(a, b)].order) @ res.R[(a, b)]
            acc = term if acc is None else acc + term
        ra = delta.right(a)
        if ra is not None:
            acc = acc - res.block(res.F, ra).truncate(acc.order)
        o = min(dF.order, acc.order)
        worst = max(worst, (dF.truncate(o) - acc.truncate(o)).max_abs())
    return worst


@dataclass
class NormalityReport:
    ok: bool
    darboux_defect: float
    structural_residual: float
    mapping: ValidationReport
    eq22_max: float
    chain_identity_max: float
    details: List[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "darboux_defect": self.darboux_defect,
            "structural_residual": self.structural_residual,
            "normality_violations": [v.to_json() for v in self.mapping.violations],
            "eq22_max": self.eq22_max,
            "chain_identity_max": self.chain_identity_max,
        }


def chain_identity_checks(res: NormalFrameResult) -> List[dict]:
    """Compare leading chain blocks of ``R`` with raw pairings of derivatives.

    For ``1 <= s <= p_j - p_i`` the ``s``-th chain pair satisfies
    ``R(i-box, j-box) = ± J_j omega(E_{a_j}^{(s+2)}, E_{a_i}) J_i``, where
    the signature matrices are the identity for monotone curves.  The sign
    is not fixed, so the smaller of both differences is reported.
    """
    delta = res.delta
    out = []
    for i in range(2, delta.d + 1):
        for j in range(1, i):
            gap = delta.p[j - 1] - delta.p[i - 1]
            if gap < 1:
                continue
            chain = chain_pairs(delta, i, j)
            Ej = res.E_of(Superbox(j, 1))
            Ei = res.E_of(Superbox(i, 1))
            for s in range(1, gap + 1):
                bj, bi = chain[s - 1]
                Rm = res.R[(bi, bj)]
                Wm = omega_pairing(Ej.derive(s + 2), Ei.truncate(Ej.order - s - 2))
                Wm = (res.J(j) @ Wm) @ res.J(i)
                o = min(Rm.order, Wm.order)
                Rm, Wm = Rm.truncate(o), Wm.truncate(o)
                diff = min((Rm - Wm).max_abs(), (Rm + Wm).max_abs())
                out.append({"i": i, "j": j, "s": s, "diff": diff, "scale": Rm.max_abs()})
    return out


def eq22_max(res: NormalFrameResult) -> float:
    """Largest ``|omega(E_{a_i}, E_{a_j}^{(k)})|`` for ``3 <= k <= p_j - p_i + 1``."""
    delta = res.delta
    worst = 0.0
    for i in range(2, delta.d + 1):
        for j in range(1, i):
            Ej = res.E_of(Superbox(j, 1))
            Ei = res.E_of(Superbox(i, 1))
            for k in range(3, delta.p[j - 1] - delta.p[i - 1] + 2):
                Wm = omega_pairing(Ei.truncate(Ej.order - k), Ej.derive(k))
                worst = max(worst, Wm.max_abs())
    return worst


def verify_normal(res: NormalFrameResult, curve: Optional[CurveJet] = None, tol: float = 1e-7) -> NormalityReport:
    """Check the Darboux property, the structural equation and normality of ``R``."""
    scale = max(1.0, res.E.max_abs(), res.F.max_abs())
    dd = darboux_defect(res.E, res.F)
    sr = structural_residual(res)
    mrep = validate_mapping(res.R, res.delta, "normal", tol * scale)
    e22 = eq22_max(res)
    chain = chain_identity_checks(res)
    cmax = max((c["diff"] for c in chain), default=0.0)
    ok = dd <= tol * scale and sr <= tol * scale and mrep.ok and e22 <= tol * scale and cmax <= tol * scale
    if curve is not None:
        # span of E must be the curve itself
        X = curve.frame.value
        E0 = res.E.value
        resid = E0 - X @ np.linalg.lstsq(X, E0, rcond=None)[0]
        ok = ok and float(np.max(np.abs(resid))) <= tol * scale
    return NormalityReport(ok, dd, sr, mrep, e22, cmax, chain)


# driver ----------------------------------------------------------------------------

def normal_frame(
    curve: CurveJet,
    report: Optional[FlagReport] = None,
    rng: Optional[np.random.Generator] = None,
) -> NormalFrameResult:
    """Normal moving frame and normal mapping of an analyzable curve.

    Parameters
    ----------
    curve : CurveJet
    report : FlagReport, optional
        Reused when given, otherwise computed.
    rng : numpy Generator, optional
        When given, the bases of the canonical complements and the initial
        gauge are randomized.  The result then differs from the default
        one by a constant block pseudo-orthogonal gauge.
    """
    if report is None:
        report = young_diagram(curve)
    delta = report.reduced
    need = required_order(delta)
    if curve.order < need:
        raise JetOrderError(need, curve.order, "order")
    comps = canonical_complements(curve, report, rng)
    inertia = [lv.inertia for lv in comps.levels]
    sections = []
    for lv in comps.levels:
        J = signature_matrix(*lv.inertia)
        O = random_pseudo_orthogonal(*lv.inertia, rng) if rng is not None else None
        E1 = normalize_basis(lv.V, lv.p, lv.Q, lv.inertia, O)
        Es, _ = horizontal_section(E1, lv.p, J)
        sections.append(Es)
    E, F1 = fill_diagram(delta, sections, inertia)
    F = darboux_completion(E, F1, delta)
    F, R = quasi_normal_complete(E.truncate(F.order), F, delta)
    res = NormalFrameResult(delta, E, F, R, inertia, report, comps, dict(enumerate(sections, 1)))
    return res


def gauge_between(res1: NormalFrameResult, res2: NormalFrameResult) -> Dict[int, MatrixJet]:
    """Per-level jets ``U_i`` with ``E2_a = E1_a U_i``, read from the special superboxes."""
    out = {}
    for i in range(1, res1.delta.d + 1):
        s = res1.delta.special(i)
        A = res1.E_of(s)
        B = res2.E_of(s)
        o = min(A.order, B.order)
        A, B = A.truncate(o), B.truncate(o)
        out[i] = (A.T @ A).inverse() @ (A.T @ B)
    return out
