"""Truncated power series (jets) for scalars and matrices.

A jet of order ``N`` at center ``t0`` stores the Taylor coefficients
``c_0..c_N`` of ``sum_k c_k (t - t0)**k``.  Coefficients past ``N`` are
unknown, so every operation returns the largest order it can certify:
binary operations truncate to the smaller operand order and ``derive``
drops one order.

Matrix jets keep all coefficients in one array of shape ``(N + 1, rows, cols)``.
"""

from __future__ import annotations

from math import comb
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import InputError, JetOrderError

Number = Union[int, float, np.floating]


def _as_coeffs(coeffs, ndim: int) -> np.ndarray:
    c = np.array(coeffs, dtype=float)
    if c.ndim != ndim:
        raise InputError(f"expected a coefficient array with {ndim} dimensions, got {c.ndim}")
    if c.shape[0] == 0:
        raise InputError("a jet needs at least one coefficient")
    if not np.all(np.isfinite(c)):
        raise InputError("jet coefficients must be finite")
    c.setflags(write=False)
    return c


def _check_center(a: float, b: float) -> None:
    if a != b:
        raise InputError(f"center mismatch: {a} vs {b}")


def _cauchy(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    """Cauchy product of coefficient stacks truncated at ``order``."""
    if a.ndim == 1:
        return np.array([np.dot(a[: k + 1], b[k::-1]) for k in range(order + 1)])
    out = np.empty((order + 1, a.shape[1], b.shape[2]))
    for k in range(order + 1):
        out[k] = np.einsum("jab,jbc->ac", a[: k + 1], b[k::-1])
    return out


class Jet:
    """Scalar truncated power series.

    Parameters
    ----------
    coeffs : sequence of float
        Taylor coefficients ``c_0..c_N``.
    center : float
        Expansion point ``t0``.
    """

    __slots__ = ("_c", "_center")

    def __init__(self, coeffs: Sequence[Number], center: float = 0.0):
        self._c = _as_coeffs(coeffs, 1)
        self._center = float(center)

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def center(self) -> float:
        return self._center

    @property
    def order(self) -> int:
        return self._c.shape[0] - 1

    @classmethod
    def constant(cls, value: float, order: int, center: float = 0.0) -> "Jet":
        c = np.zeros(order + 1)
        c[0] = value
        return cls(c, center)

    @classmethod
    def variable(cls, order: int, center: float = 0.0) -> "Jet":
        """The jet of ``t`` itself."""
        c = np.zeros(order + 1)
        c[0] = center
        if order >= 1:
            c[1] = 1.0
        return cls(c, center)

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise JetOrderError(order, self.order)
        return Jet(self._c[: order + 1], self._center)

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            _check_center(self._center, other._center)
            return other
        if isinstance(other, (int, float, np.floating)):
            return Jet.constant(float(other), self.order, self._center)
        raise InputError(f"cannot combine Jet with {type(other).__name__}")

    def __add__(self, other):
        o = self._coerce(other)
        n = min(self.order, o.order)
        return Jet(self._c[: n + 1] + o._c[: n + 1], self._center)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        n = min(self.order, o.order)
        return Jet(self._c[: n + 1] - o._c[: n + 1], self._center)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return Jet(-self._c, self._center)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return Jet(self._c * float(other), self._center)
        o = self._coerce(other)
        n = min(self.order, o.order)
        return Jet(_cauchy(self._c, o._c, n), self._center)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return Jet(self._c / float(other), self._center)
        return self * self._coerce(other).invert()

    def derive(self) -> "Jet":
        if self.order < 1:
            raise JetOrderError(1, self.order, stage="derive")
        k = np.arange(1, self.order + 1)
        return Jet(self._c[1:] * k, self._center)

    def integrate(self, value: float = 0.0) -> "Jet":
        """Antiderivative taking ``value`` at the center; order grows by one."""
        k = np.arange(1, self.order + 2)
        return Jet(np.concatenate([[value], self._c / k]), self._center)

    def invert(self) -> "Jet":
        c = self._c
        if c[0] == 0.0:
            raise InputError("cannot invert a jet with zero constant term")
        out = np.zeros_like(c)
        out[0] = 1.0 / c[0]
        for k in range(1, c.shape[0]):
            out[k] = -np.dot(c[1 : k + 1], out[k - 1 :: -1][:k]) / c[0]
        return Jet(out, self._center)

    def sqrt(self) -> "Jet":
        c = self._c
        if not c[0] > 0.0:
            raise InputError("sqrt needs a positive constant term")
        out = np.zeros_like(c)
        out[0] = np.sqrt(c[0])
        for k in range(1, c.shape[0]):
            s = np.dot(out[1:k], out[k - 1 : 0 : -1])
            out[k] = (c[k] - s) / (2.0 * out[0])
        return Jet(out, self._center)

    def __call__(self, t: float) -> float:
        return float(np.polynomial.polynomial.polyval(t - self._center, self._c))

    def recenter(self, new_center: float) -> "Jet":
        """Re-expand the truncated polynomial at another center (same order)."""
        return Jet(_shift(self._c, new_center - self._center), new_center)

    def to_json(self) -> dict:
        return {"center": self._center, "coeffs": [float(x) for x in self._c]}

    @classmethod
    def from_json(cls, obj: dict) -> "Jet":
        try:
            return cls(obj["coeffs"], obj.get("center", 0.0))
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed jet: {obj!r}") from exc

    def __repr__(self) -> str:
        return f"Jet(center={self._center}, coeffs={self._c.tolist()})"


def _shift(c: np.ndarray, h: float) -> np.ndarray:
    """Coefficients of ``p(h + s)`` in powers of ``s`` for ``p(x) = sum c_k x^k``."""
    n = c.shape[0]
    out = np.zeros_like(c)
    for k in range(n):
        for j in range(k, n):
            out[k] = out[k] + comb(j, k) * h ** (j - k) * c[j]
    return out


class MatrixJet:
    """Matrix-valued truncated power series.

    Parameters
    ----------
    coeffs : array_like, shape (N + 1, rows, cols)
        ``coeffs[k]`` multiplies ``(t - t0)**k``.
    center : float
        Expansion point.
    """

    __slots__ = ("_c", "_center")
    __array_priority__ = 100

    def __init__(self, coeffs, center: float = 0.0):
        self._c = _as_coeffs(coeffs, 3)
        if self._c.shape[1] == 0 or self._c.shape[2] == 0:
            # empty matrices are allowed as bases of the zero subspace
            pass
        self._center = float(center)

    # construction -----------------------------------------------------------
    @classmethod
    def constant(cls, M, order: int, center: float = 0.0) -> "MatrixJet":
        M = np.atleast_2d(np.asarray(M, dtype=float))
        c = np.zeros((order + 1,) + M.shape)
        c[0] = M
        return cls(c, center)

    @classmethod
    def identity(cls, n: int, order: int, center: float = 0.0) -> "MatrixJet":
        return cls.constant(np.eye(n), order, center)

    @classmethod
    def zeros(cls, rows: int, cols: int, order: int, center: float = 0.0) -> "MatrixJet":
        return cls(np.zeros((order + 1, rows, cols)), center)

    @classmethod
    def from_entries(cls, entries: Sequence[Sequence[Jet]]) -> "MatrixJet":
        """Assemble from a grid of scalar jets sharing center and order."""
        rows = len(entries)
        cols = len(entries[0])
        center = entries[0][0].center
        order = min(j.order for row in entries for j in row)
        c = np.zeros((order + 1, rows, cols))
        for i, row in enumerate(entries):
            if len(row) != cols:
                raise InputError("ragged jet grid")
            for k, jet in enumerate(row):
                _check_center(center, jet.center)
                c[:, i, k] = jet.coeffs[: order + 1]
        return cls(c, center)

    # properties -------------------------------------------------------------
    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def center(self) -> float:
        return self._center

    @property
    def order(self) -> int:
        return self._c.shape[0] - 1

    @property
    def shape(self) -> tuple[int, int]:
        return self._c.shape[1], self._c.shape[2]

    @property
    def rows(self) -> int:
        return self._c.shape[1]

    @property
    def cols(self) -> int:
        return self._c.shape[2]

    @property
    def T(self) -> "MatrixJet":
        return MatrixJet(np.transpose(self._c, (0, 2, 1)), self._center)

    @property
    def value(self) -> np.ndarray:
        """Constant term, i.e. the value at the center."""
        return np.array(self._c[0])

    def entry(self, i: int, j: int) -> Jet:
        return Jet(self._c[:, i, j], self._center)

    def __getitem__(self, idx) -> "MatrixJet":
        if not isinstance(idx, tuple):
            idx = (idx, slice(None))
        r, c = idx
        if isinstance(r, (int, np.integer)):
            r = slice(r, r + 1)
        if isinstance(c, (int, np.integer)):
            c = slice(c, c + 1)
        return MatrixJet(self._c[:, r, c], self._center)

    def truncate(self, order: int) -> "MatrixJet":
        if order > self.order:
            raise JetOrderError(order, self.order)
        if order == self.order:
            return self
        return MatrixJet(self._c[: order + 1], self._center)

    # arithmetic -------------------------------------------------------------
    def _coerce(self, other) -> "MatrixJet":
        if isinstance(other, MatrixJet):
            _check_center(self._center, other._center)
            return other
        raise InputError(f"cannot combine MatrixJet with {type(other).__name__}")

    def _same_shape(self, o: "MatrixJet") -> None:
        if self.shape != o.shape:
            raise InputError(f"shape mismatch: {self.shape} vs {o.shape}")

    def __add__(self, other):
        o = self._coerce(other)
        self._same_shape(o)
        n = min(self.order, o.order)
        return MatrixJet(self._c[: n + 1] + o._c[: n + 1], self._center)

    def __sub__(self, other):
        o = self._coerce(other)
        self._same_shape(o)
        n = min(self.order, o.order)
        return MatrixJet(self._c[: n + 1] - o._c[: n + 1], self._center)

    def __neg__(self):
        return MatrixJet(-self._c, self._center)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return MatrixJet(self._c * float(other), self._center)
        if isinstance(other, Jet):
            _check_center(self._center, other.center)
            n = min(self.order, other.order)
            out = np.empty((n + 1,) + self.shape)
            for k in range(n + 1):
                out[k] = np.tensordot(other.coeffs[k::-1], self._c[: k + 1], axes=(0, 0))
            return MatrixJet(out, self._center)
        raise InputError(f"cannot scale MatrixJet by {type(other).__name__}")

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, np.ndarray):
            M = np.atleast_2d(other)
            if self.cols != M.shape[0]:
                raise InputError(f"shape mismatch: {self.shape} @ {M.shape}")
            return MatrixJet(self._c @ M, self._center)
        o = self._coerce(other)
        if self.cols != o.rows:
            raise InputError(f"shape mismatch: {self.shape} @ {o.shape}")
        n = min(self.order, o.order)
        return MatrixJet(_cauchy(self._c, o._c, n), self._center)

    def __rmatmul__(self, other):
        if isinstance(other, np.ndarray):
            M = np.atleast_2d(other)
            if M.shape[1] != self.rows:
                raise InputError(f"shape mismatch: {M.shape} @ {self.shape}")
            return MatrixJet(np.einsum("ab,kbc->kac", M, self._c), self._center)
        return NotImplemented

    # calculus ---------------------------------------------------------------
    def derive(self, times: int = 1) -> "MatrixJet":
        out = self
        for _ in range(times):
            if out.order < 1:
                raise JetOrderError(1, out.order, stage="derive")
            k = np.arange(1, out.order + 1)[:, None, None]
            out = MatrixJet(out._c[1:] * k, self._center)
        return out

    def integrate(self, value=None) -> "MatrixJet":
        k = np.arange(1, self.order + 2)[:, None, None]
        c0 = np.zeros((1,) + self.shape) if value is None else np.asarray(value, float)[None]
        return MatrixJet(np.concatenate([c0, self._c / k]), self._center)

    def derivative_value(self, j: int) -> np.ndarray:
        """The j-th derivative evaluated at the center, ``j! c_j``."""
        if j > self.order:
            raise JetOrderError(j, self.order)
        return self._c[j] * float(np.prod(np.arange(1, j + 1)))

    def __call__(self, t: float) -> np.ndarray:
        h = t - self._center
        out = np.zeros(self.shape)
        for c in self._c[::-1]:
            out = out * h + c
        return out

    def recenter(self, new_center: float) -> "MatrixJet":
        h = new_center - self._center
        n = self.order + 1
        out = np.zeros_like(self._c)
        for k in range(n):
            w = np.array([comb(j, k) * h ** (j - k) for j in range(k, n)])
            out[k] = np.tensordot(w, self._c[k:], axes=(0, 0))
        return MatrixJet(out, new_center)

    def reverse_time(self) -> "MatrixJet":
        """Jet of ``t -> M(-t)`` centred at ``-t0``."""
        sign = (-1.0) ** np.arange(self.order + 1)
        return MatrixJet(self._c * sign[:, None, None], -self._center)

    def inverse(self) -> "MatrixJet":
        """Series inverse of a square matrix jet with invertible constant term."""
        if self.rows != self.cols:
            raise InputError("inverse needs a square matrix jet")
        A = self._c
        try:
            A0inv = np.linalg.inv(A[0])
        except np.linalg.LinAlgError as exc:
            raise InputError("constant term is singular") from exc
        out = np.empty_like(A)
        out[0] = A0inv
        for k in range(1, A.shape[0]):
            s = np.einsum("jab,jbc->ac", A[1 : k + 1], out[k - 1 :: -1][:k])
            out[k] = -A0inv @ s
        return MatrixJet(out, self._center)

    def sym(self) -> "MatrixJet":
        return MatrixJet(0.5 * (self._c + np.transpose(self._c, (0, 2, 1))), self._center)

    def antisym(self) -> "MatrixJet":
        return MatrixJet(0.5 * (self._c - np.transpose(self._c, (0, 2, 1))), self._center)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self._c))) if self._c.size else 0.0

    def allclose(self, other: "MatrixJet", atol: float = 1e-10) -> bool:
        o = self._coerce(other)
        if self.shape != o.shape:
            return False
        n = min(self.order, o.order)
        return bool(np.all(np.abs(self._c[: n + 1] - o._c[: n + 1]) <= atol))

    def to_json(self) -> list:
        """Row-major list of coefficient lists, one per entry."""
        r, c = self.shape
        return [[float(x) for x in self._c[:, i, j]] for i in range(r) for j in range(c)]

    @classmethod
    def from_json(cls, entries: list, rows: int, cols: int, center: float = 0.0) -> "MatrixJet":
        if len(entries) != rows * cols:
            raise InputError(f"expected {rows * cols} jet entries, got {len(entries)}")
        lengths = {len(e) for e in entries}
        if len(lengths) != 1:
            raise InputError("all entries of a matrix jet must share the same order")
        arr = np.array(entries, dtype=float).T.reshape(-1, rows, cols)
        return cls(arr, center)

    def __repr__(self) -> str:
        return f"MatrixJet(center={self._center}, order={self.order}, shape={self.shape})"


def hstack(jets: Iterable[MatrixJet]) -> MatrixJet:
    jets = list(jets)
    if not jets:
        raise InputError("nothing to stack")
    center = jets[0].center
    for j in jets:
        _check_center(center, j.center)
    n = min(j.order for j in jets)
    return MatrixJet(np.concatenate([j.coeffs[: n + 1] for j in jets], axis=2), center)


def vstack(jets: Iterable[MatrixJet]) -> MatrixJet:
    jets = list(jets)
    if not jets:
        raise InputError("nothing to stack")
    center = jets[0].center
    for j in jets:
        _check_center(center, j.center)
    n = min(j.order for j in jets)
    return MatrixJet(np.concatenate([j.coeffs[: n + 1] for j in jets], axis=1), center)


def common_order(*jets: MatrixJet) -> list[MatrixJet]:
    n = min(j.order for j in jets)
    return [j.truncate(n) for j in jets]


# functional API -------------------------------------------------------------

def jet_arith(a, b, op: str):
    """Binary jet arithmetic.

    ``op`` is one of ``add``, ``sub``, ``mul``, ``matmul`` or ``scale``.
    For ``scale`` the second argument is a float.  The result order is the
    minimum of the operand orders.
    """
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        if isinstance(a, MatrixJet) and isinstance(b, MatrixJet):
            # entrywise (Hadamard) product of matrix jets
            _check_center(a.center, b.center)
            if a.shape != b.shape:
                raise InputError(f"shape mismatch: {a.shape} vs {b.shape}")
            n = min(a.order, b.order)
            out = np.empty((n + 1,) + a.shape)
            for k in range(n + 1):
                out[k] = np.einsum("jab,jab->ab", a.coeffs[: k + 1], b.coeffs[k::-1])
            return MatrixJet(out, a.center)
        return a * b
    if op == "matmul":
        if not (isinstance(a, MatrixJet) and isinstance(b, MatrixJet)):
            raise InputError("matmul needs two matrix jets")
        return a @ b
    if op == "scale":
        return a * float(b)
    raise InputError(f"unknown op {op!r}")


def jet_derive(a):
    """Derivative, dropping the order by one."""
    return a.derive()


def jet_invert_sqrt(a: Jet, mode: str) -> Jet:
    """Reciprocal (``mode='invert'``) or square root (``mode='sqrt'``) of a scalar jet."""
    if mode == "invert":
        return a.invert()
    if mode == "sqrt":
        return a.sqrt()
    raise InputError(f"unknown mode {mode!r}")


def jet_ode_solve(A: MatrixJet, U0) -> MatrixJet:
    """Solve ``U' = A(t) U`` with ``U(t0) = U0`` as a power series.

    The recursion ``(k + 1) U_{k+1} = sum_{j<=k} A_j U_{k-j}`` determines
    ``U`` to order ``A.order + 1``.
    """
    if A.rows != A.cols:
        raise InputError("ODE coefficient must be square")
    U0 = np.atleast_2d(np.asarray(U0, dtype=float))
    if U0.shape[0] != A.rows:
        raise InputError(f"initial value has {U0.shape[0]} rows, expected {A.rows}")
    N = A.order + 1
    Ac = A.coeffs
    U = np.zeros((N + 1,) + U0.shape)
    U[0] = U0
    for k in range(N):
        U[k + 1] = np.einsum("jab,jbc->ac", Ac[: k + 1], U[k::-1]) / (k + 1)
    return MatrixJet(U, A.center)


def matrix_sqrt_near_identity(M: MatrixJet) -> MatrixJet:
    """Series square root ``S`` of ``M`` with ``M(t0) = I``, ``S(t0) = I``.

    ``S`` is a power series in ``M`` and therefore commutes with it.
    """
    c = M.coeffs
    n = M.rows
    if not np.allclose(c[0], np.eye(n), atol=1e-10):
        raise InputError("matrix_sqrt_near_identity needs M(t0) = I")
    S = np.zeros_like(c)
    S[0] = np.eye(n)
    for k in range(1, c.shape[0]):
        s = np.einsum("jab,jbc->ac", S[1:k], S[k - 1 : 0 : -1]) if k > 1 else 0.0
        S[k] = 0.5 * (c[k] - s)
    return MatrixJet(S, M.center)
