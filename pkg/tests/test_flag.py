import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.diagram import YoungDiagram
from artifact.errors import AnalyzabilityError, InputError
from artifact.flag import (
    CurveJet,
    condition_g,
    contraction,
    duality_residual,
    extension,
    extension_dims,
    reduce_ambient,
    young_diagram,
)
from artifact.generators import flat_curve, linear_hamiltonian_jacobi, random_curve, rotating_line
from artifact.jets import MatrixJet
from artifact.symplectic import random_symplectic


def one_row_closed_form(t):
    # flat curve with D = (2,) in coordinates (e1, e2, f1, f2)
    return np.array([[t**2 / 2, -(t**3) / 6, t, 1], [t, -(t**2) / 2, 1, 0]]).T


def test_flat_one_row_closed_form():
    c = flat_curve(YoungDiagram((2,)), 0.0, 10)
    for t in (-0.4, 0.25):
        X = c.frame(t)
        Y = one_row_closed_form(t)
        assert np.max(np.abs(Y - X @ np.linalg.lstsq(X, Y, rcond=None)[0])) < 1e-12


def test_curve_validation():
    with pytest.raises(InputError):
        CurveJet(MatrixJet.zeros(4, 3, 2))
    with pytest.raises(InputError):
        CurveJet(MatrixJet.zeros(4, 2, 2))  # dependent columns
    with pytest.raises(InputError):
        CurveJet(MatrixJet.constant(np.eye(4)[:, [0, 2]], 2))  # not isotropic


def test_json_roundtrip():
    c = rotating_line(0.3, 6)
    back = CurveJet.from_json(c.to_json())
    assert back.frame.allclose(c.frame, atol=0)
    assert back.center == 0.3
    bad = c.to_json()
    bad["order"] = 3
    with pytest.raises(InputError):
        CurveJet.from_json(bad)
    with pytest.raises(InputError):
        CurveJet.from_json({"half_dim": 1})


@pytest.mark.parametrize("rows", [(1,), (2,), (3,), (1, 1), (2, 1), (3, 1), (2, 2), (3, 2, 1)])
def test_flat_diagram(rows):
    D = YoungDiagram(rows)
    rep = young_diagram(flat_curve(D, 0.0, 2 * rows[0] + 1))
    assert rep.young_diagram == D
    assert rep.monotonicity == "nondecreasing"
    assert rep.conditionG
    # extension and contraction dimensions are complementary
    n = D.size
    for e, c in zip(rep.ext_dims, rep.con_dims):
        assert e + c == 2 * n


def test_extension_dims_oracle():
    # D = (3, 1): columns (2, 1, 1)
    c = flat_curve(YoungDiagram((3, 1)), 0.0, 8)
    assert extension_dims(c) == [4, 6, 7, 8]


def test_regular_curve_has_one_column():
    rng = np.random.default_rng(5)
    A = rng.standard_normal((6, 6))
    c = linear_hamiltonian_jacobi(A @ A.T + np.eye(6), 0.0, 6)
    rep = young_diagram(c)
    assert rep.young_diagram == YoungDiagram((1, 1, 1))
    assert rep.monotonicity == "nondecreasing"


def test_rank_one_curve_has_one_row():
    c = random_curve(YoungDiagram((4,)), seed=2, order=10)
    assert young_diagram(c).young_diagram == YoungDiagram((4,))


def test_time_reversal_flips_monotonicity():
    c = flat_curve(YoungDiagram((2, 1)), 0.0, 8)
    rev = young_diagram(c.reversed())
    assert rev.young_diagram == YoungDiagram((2, 1))
    assert rev.monotonicity == "nonincreasing"
    assert rev.conditionG


def test_basis_change_does_not_matter():
    c = random_curve(YoungDiagram((2, 1)), seed=4, order=10)
    rng = np.random.default_rng(0)
    P = rng.standard_normal((11, 3, 3)) * 0.3
    P[0] += np.eye(3) * 2
    c2 = c.reparametrized_basis(MatrixJet(P))
    r1, r2 = young_diagram(c), young_diagram(c2)
    assert r1.young_diagram == r2.young_diagram
    assert r1.inertia == r2.inertia


def test_mixed_inertia_is_indefinite_but_satisfies_g():
    c = random_curve(YoungDiagram((2, 2, 1)), [(1, 1), (0, 1)], seed=3, order=12)
    rep = young_diagram(c)
    assert rep.monotonicity == "indefinite"
    assert rep.conditionG
    assert rep.inertia == [(1, 1), (0, 1)]
    ok, inertia, ranks = condition_g(c, rep.reduced)
    assert ok and ranks == [2, 3]


@settings(max_examples=15, deadline=None)
@given(st.sampled_from([(2,), (2, 1), (3, 1), (2, 2), (1, 1, 1)]), st.integers(0, 1000))
def test_duality(rows, seed):
    c = random_curve(YoungDiagram(rows), seed=seed, order=2 * rows[0] + 2)
    scale = max(1.0, c.frame.max_abs())
    for i in range(rows[0] + 1):
        assert duality_residual(c, i) < 1e-8 * scale


def test_duality_survives_symplectic_maps():
    c = flat_curve(YoungDiagram((3, 1)), 0.0, 8).transformed(random_symplectic(4, seed=9))
    assert max(duality_residual(c, i) for i in range(4)) < 1e-10
    assert extension(c, 0).cols == 4 and contraction(c, 3).cols == 0


def test_bad_indices():
    c = rotating_line()
    with pytest.raises(InputError):
        extension(c, -1)
    with pytest.raises(InputError):
        contraction(c, -1)


def test_zero_velocity_is_rejected():
    c = CurveJet(MatrixJet.constant(np.eye(2)[:, [1]], 4))
    with pytest.raises(AnalyzabilityError):
        young_diagram(c)


def direct_sum_curve(order=10):
    # rotating line in the first plane plus a constant line in the second
    line = rotating_line(0.0, order).frame.coeffs
    c = np.zeros((order + 1, 4, 2))
    c[:, [0, 2], 0] = line[:, :, 0]
    c[0, 3, 1] = 1.0
    return CurveJet(MatrixJet(c))


def test_reduce_ambient_direct_sum():
    c = direct_sum_curve()
    with pytest.raises(AnalyzabilityError):
        young_diagram(c)
    q, info = reduce_ambient(c)
    assert not info["identity"] and info["dim_V"] == 3
    assert q.n == 1
    rep = young_diagram(q)
    assert rep.young_diagram == YoungDiagram((1,))


def test_reduce_ambient_identity():
    c = rotating_line()
    q, info = reduce_ambient(c)
    assert info["identity"] and q is c
