"""Young diagrams, reduced diagrams and the combinatorics of superboxes.

A Young diagram is stored by its row lengths.  Merging equal rows gives
the reduced diagram: a list of levels ``(p_i, r_i)`` where ``p_i`` is the
number of superboxes in level ``i`` (strictly decreasing) and ``r_i`` the
size of each superbox.  Superboxes are addressed 1-based as
``Superbox(level, col)``.

Frames are assembled in a fixed total order: levels top to bottom,
columns left to right and, inside a superbox, the ``r_i`` boxes of the
underlying subcolumn top to bottom.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .errors import InputError
from .jets import MatrixJet


@dataclass(frozen=True)
class YoungDiagram:
    """Young diagram given by nonincreasing positive row lengths."""

    rows: Tuple[int, ...]

    def __post_init__(self):
        rows = tuple(int(r) for r in self.rows)
        if not rows:
            raise InputError("a Young diagram needs at least one row")
        if any(r <= 0 for r in rows):
            raise InputError(f"row lengths must be positive: {rows}")
        if any(a < b for a, b in zip(rows, rows[1:])):
            raise InputError(f"row lengths must be nonincreasing: {rows}")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_columns(cls, columns: Sequence[int]) -> "YoungDiagram":
        """Build from column heights (nonincreasing)."""
        cols = [int(c) for c in columns if c > 0]
        if any(a < b for a, b in zip(cols, cols[1:])):
            raise InputError(f"column heights must be nonincreasing: {cols}")
        if not cols:
            raise InputError("empty diagram")
        rows = [sum(1 for c in cols if c > i) for i in range(cols[0])]
        return cls(tuple(rows))

    @property
    def size(self) -> int:
        return sum(self.rows)

    @property
    def columns(self) -> Tuple[int, ...]:
        return tuple(sum(1 for r in self.rows if r > j) for j in range(self.rows[0]))

    def to_json(self) -> dict:
        return {"rows": list(self.rows)}

    @classmethod
    def from_json(cls, obj) -> "YoungDiagram":
        try:
            return cls(tuple(obj["rows"]))
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed diagram: {obj!r}") from exc


class Superbox(NamedTuple):
    level: int
    col: int

    def __repr__(self) -> str:
        return f"({self.level},{self.col})"


Pair = Tuple[Superbox, Superbox]


@dataclass(frozen=True)
class ReducedDiagram:
    """Levels ``(p_i, r_i)`` with ``p_i`` strictly decreasing and ``r_i >= 1``."""

    levels: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        levels = tuple((int(p), int(r)) for p, r in self.levels)
        if not levels:
            raise InputError("a reduced diagram needs at least one level")
        ps = [p for p, _ in levels]
        if any(p <= 0 for p in ps) or any(r <= 0 for _, r in levels):
            raise InputError(f"invalid levels {levels}")
        if any(a <= b for a, b in zip(ps, ps[1:])):
            raise InputError(f"box counts must be strictly decreasing: {ps}")
        object.__setattr__(self, "levels", levels)

    # basic data -------------------------------------------------------------
    @property
    def d(self) -> int:
        return len(self.levels)

    @property
    def p(self) -> Tuple[int, ...]:
        return tuple(p for p, _ in self.levels)

    @property
    def r(self) -> Tuple[int, ...]:
        return tuple(r for _, r in self.levels)

    @property
    def n(self) -> int:
        """Total number of boxes of the underlying diagram."""
        return sum(p * r for p, r in self.levels)

    def expand(self) -> YoungDiagram:
        rows: List[int] = []
        for p, r in self.levels:
            rows.extend([p] * r)
        return YoungDiagram(tuple(rows))

    def size(self, a: Superbox) -> int:
        self._check(a)
        return self.levels[a.level - 1][1]

    def _check(self, a: Superbox) -> None:
        if not (1 <= a.level <= self.d and 1 <= a.col <= self.levels[a.level - 1][0]):
            raise InputError(f"superbox {a} outside the diagram {self.levels}")

    def superboxes(self) -> List[Superbox]:
        """All superboxes in frame order."""
        return [Superbox(i + 1, c + 1) for i, (p, _) in enumerate(self.levels) for c in range(p)]

    def level_boxes(self, i: int) -> List[Superbox]:
        return [Superbox(i, c + 1) for c in range(self.levels[i - 1][0])]

    def column(self, k: int) -> List[Superbox]:
        return [Superbox(i + 1, k) for i, (p, _) in enumerate(self.levels) if p >= k]

    def first(self, i: int) -> Superbox:
        return Superbox(i, 1)

    def special(self, i: int) -> Superbox:
        return Superbox(i, self.levels[i - 1][0])

    def is_special(self, a: Superbox) -> bool:
        return a.col == self.levels[a.level - 1][0]

    def right(self, a: Superbox) -> Optional[Superbox]:
        return None if self.is_special(a) else Superbox(a.level, a.col + 1)

    def left(self, a: Superbox) -> Optional[Superbox]:
        return None if a.col == 1 else Superbox(a.level, a.col - 1)

    def shift(self, a: Superbox, k: int) -> Superbox:
        """``r^k(a)``."""
        b = Superbox(a.level, a.col + k)
        self._check(b)
        return b

    def higher(self, a: Superbox, b: Superbox) -> bool:
        """True if ``a`` lies in a strictly higher level than ``b``."""
        return a.level < b.level

    # frame layout -----------------------------------------------------------
    def offsets(self) -> Dict[Superbox, slice]:
        out: Dict[Superbox, slice] = {}
        k = 0
        for a in self.superboxes():
            s = self.size(a)
            out[a] = slice(k, k + s)
            k += s
        return out

    def to_json(self) -> dict:
        return {"levels": [{"p": p, "r": r} for p, r in self.levels]}


def reduce_diagram(D: YoungDiagram) -> ReducedDiagram:
    """Group equal rows of ``D`` into levels ``(p_i, r_i)``."""
    levels: List[Tuple[int, int]] = []
    for row in D.rows:
        if levels and levels[-1][0] == row:
            levels[-1] = (row, levels[-1][1] + 1)
        else:
            levels.append((row, 1))
    return ReducedDiagram(tuple(levels))


def chain_pairs(delta: ReducedDiagram, i: int, j: int) -> List[Pair]:
    """The tuple of superbox pairs attached to levels ``j < i``.

    Pairs are ``(level-j box, level-i box)``.  Starting from the first
    superboxes of both levels, the level-i box and the level-j box are
    shifted right alternately until the level-i box is special; from then
    on only the level-j box moves.  The length is ``p_j + p_i - 1``.
    """
    if not (1 <= j < i <= delta.d):
        raise InputError(f"chain_pairs needs 1 <= j < i <= d, got i={i}, j={j}")
    pj, pi = delta.p[j - 1], delta.p[i - 1]
    out: List[Pair] = [(Superbox(j, 1), Superbox(i, 1))]
    cj, ci = 1, 1
    while ci < pi:
        ci += 1
        out.append((Superbox(j, cj), Superbox(i, ci)))
        cj += 1
        out.append((Superbox(j, cj), Superbox(i, ci)))
    while cj < pj:
        cj += 1
        out.append((Superbox(j, cj), Superbox(i, ci)))
    return out


def allowed_pairs(delta: ReducedDiagram) -> set:
    """Pairs whose block may be nonzero for a quasi-normal mapping (both orientations)."""
    out = set()
    for a in delta.superboxes():
        out.add((a, a))
        b = delta.right(a)
        if b is not None:
            out.add((a, b))
            out.add((b, a))
    for i in range(2, delta.d + 1):
        for j in range(1, i):
            for x, y in chain_pairs(delta, i, j):
                out.add((x, y))
                out.add((y, x))
    return out


def zeroed_chain_pairs(delta: ReducedDiagram) -> set:
    """Leading chain pairs forced to vanish by normality (both orientations)."""
    out = set()
    for i in range(2, delta.d + 1):
        for j in range(1, i):
            m = delta.p[j - 1] - delta.p[i - 1] - 1
            for x, y in chain_pairs(delta, i, j)[:m]:
                out.add((x, y))
                out.add((y, x))
    return out


def essential_pairs(delta: ReducedDiagram) -> set:
    """Pairs whose block is not forced to vanish for a normal mapping."""
    out = set()
    for a in delta.superboxes():
        out.add((a, a))
        b = delta.right(a)
        if b is not None and delta.size(a) > 1:
            out.add((a, b))
            out.add((b, a))
    zero = zeroed_chain_pairs(delta)
    for i in range(2, delta.d + 1):
        for j in range(1, i):
            for x, y in chain_pairs(delta, i, j):
                if (x, y) not in zero:
                    out.add((x, y))
                    out.add((y, x))
    return out


def lemma_quasi_normal_zero_pairs(delta: ReducedDiagram) -> set:
    """Pairs forced to vanish by the four-condition characterisation of quasi-normality.

    The conditions are: blocks between nonspecial superboxes in columns
    that are neither equal nor adjacent vanish; between nonspecial
    superboxes in adjacent columns, the block vanishes when one lies below
    and to the left of the other; a special superbox pairs to zero with a
    nonspecial one lying to its left beyond the adjacent column.
    """
    out = set()
    boxes = delta.superboxes()
    for a in boxes:
        for b in boxes:
            sa, sb = delta.is_special(a), delta.is_special(b)
            dc = abs(a.col - b.col)
            if not sa and not sb:
                if dc >= 2:
                    out.add((a, b))
                elif dc == 1:
                    lo, hi = (a, b) if a.level > b.level else (b, a)
                    if lo.level != hi.level and lo.col < hi.col:
                        out.add((a, b))
            for s, o in ((a, b), (b, a)):
                if delta.is_special(s) and not delta.is_special(o) and o.col <= s.col - 2:
                    out.add((a, b))
    return out


# compatible mappings -----------------------------------------------------------

CompatibleMapping = Dict[Pair, MatrixJet]


@dataclass
class Violation:
    pair: Pair
    kind: str
    order: int
    magnitude: float

    def to_json(self) -> dict:
        return {
            "a": list(self.pair[0]),
            "b": list(self.pair[1]),
            "kind": self.kind,
            "order": self.order,
            "magnitude": self.magnitude,
        }


@dataclass
class ValidationReport:
    ok: bool
    violations: List[Violation] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def _first_bad_order(M: np.ndarray, tol: float) -> Tuple[int, float]:
    """Lowest jet order whose coefficient exceeds ``tol`` (or -1)."""
    for k in range(M.shape[0]):
        m = float(np.max(np.abs(M[k]), initial=0.0))
        if m > tol:
            return k, m
    return -1, 0.0


def check_shapes(R: Mapping[Pair, MatrixJet], delta: ReducedDiagram) -> None:
    for (a, b), M in R.items():
        delta._check(a)
        delta._check(b)
        want = (delta.size(b), delta.size(a))
        if M.shape != want:
            raise InputError(f"block R{(a, b)} has shape {M.shape}, expected {want}")


def validate_mapping(
    R: Mapping[Pair, MatrixJet],
    delta: ReducedDiagram,
    strictness: str = "normal",
    tol: float = 1e-8,
) -> ValidationReport:
    """Check a compatible mapping for symmetry, quasi-normality and normality.

    Missing pairs are read as zero blocks.  Shape errors raise
    :class:`InputError`; every mathematical failure is collected as a
    :class:`Violation` carrying the pair and the first offending jet order.
    """
    if strictness not in ("quasi_normal", "normal"):
        raise InputError(f"unknown strictness {strictness!r}")
    check_shapes(R, delta)
    viol: List[Violation] = []
    allowed = allowed_pairs(delta)

    def block(a, b):
        return R.get((a, b))

    # symmetry R(b, a) = R(a, b)^T
    seen = set()
    for (a, b), M in R.items():
        if (b, a) in seen:
            continue
        seen.add((a, b))
        other = block(b, a)
        if other is None:
            if a == b:
                D = M.coeffs - np.transpose(M.coeffs, (0, 2, 1))
            else:
                # missing partner reads as zero
                D = M.coeffs
        else:
            n = min(M.order, other.order)
            D = M.coeffs[: n + 1] - np.transpose(other.coeffs[: n + 1], (0, 2, 1))
        k, m = _first_bad_order(D, tol)
        if k >= 0:
            viol.append(Violation((a, b), "compatibility", k, m))

    for (a, b), M in R.items():
        if (a, b) not in allowed:
            k, m = _first_bad_order(M.coeffs, tol)
            if k >= 0:
                viol.append(Violation((a, b), "quasi_normal", k, m))
    for a in delta.superboxes():
        b = delta.right(a)
        if b is None:
            continue
        M = block(a, b)
        if M is not None:
            k, m = _first_bad_order(M.sym().coeffs, tol)
            if k >= 0:
                viol.append(Violation((a, b), "antisymmetry", k, m))
    if strictness == "normal":
        for pair in zeroed_chain_pairs(delta):
            M = block(*pair)
            if M is not None:
                k, m = _first_bad_order(M.coeffs, tol)
                if k >= 0:
                    viol.append(Violation(pair, "normal", k, m))
    viol.sort(key=lambda v: (v.kind, v.pair))
    return ValidationReport(not viol, viol)


def complete_mapping(
    arrows: Mapping[Pair, MatrixJet], delta: ReducedDiagram, order: int, center: float
) -> CompatibleMapping:
    """Fill in transposes and zero blocks so that every pair has a matrix jet."""
    out: CompatibleMapping = {}
    for (a, b), M in arrows.items():
        out[(a, b)] = M
        if (b, a) not in arrows:
            out[(b, a)] = M.T
    for a in delta.superboxes():
        for b in delta.superboxes():
            if (a, b) not in out:
                out[(a, b)] = MatrixJet.zeros(delta.size(b), delta.size(a), order, center)
    return out
