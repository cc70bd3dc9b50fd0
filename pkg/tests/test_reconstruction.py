import numpy as np
import pytest

from artifact.diagram import Superbox, YoungDiagram, reduce_diagram
from artifact.errors import InputError
from artifact.generators import random_curve, random_spec
from artifact.jets import MatrixJet
from artifact.normal_frame import normal_frame, required_order, structural_residual, verify_normal
from artifact.reconstruction import (
    CurvatureSpec,
    frame_match,
    reconstruct,
    roundtrip,
    spec_from_result,
    structure_matrix,
)
from artifact.symplectic import darboux_defect

S = Superbox


def test_spec_validation():
    D = YoungDiagram((2, 1))
    with pytest.raises(InputError):
        CurvatureSpec(D, [(1, 0)])
    with pytest.raises(InputError):
        CurvatureSpec(D, [(1, 0), (2, -1)])


def test_one_box_constant_curvature():
    # R = k: E'' = -k E in the plane; for k = 1 this is the rotating line
    spec = CurvatureSpec(YoungDiagram((1,)), [(1, 0)], {(S(1, 1), S(1, 1)): np.array([[-1.0]])})
    curve, res = reconstruct(spec, 0.0, 10)
    t = 0.3
    X = curve.frame(t)[:, 0]
    expected = np.array([np.sin(t), np.cos(t)])
    assert abs(X[0] * expected[1] - X[1] * expected[0]) < 1e-9


def test_reconstructed_frame_is_darboux():
    spec = random_spec(YoungDiagram((3, 2, 2)), [(1, 0), (1, 1)], seed=3, center=0.5)
    curve, res = reconstruct(spec, 0.5, 16)
    assert darboux_defect(res.E, res.F) < 1e-10
    assert structural_residual(res) < 1e-10
    assert curve.center == 0.5


def test_non_normal_spec_is_rejected():
    D = YoungDiagram((3, 1))
    spec = CurvatureSpec(D, [(1, 0), (1, 0)], {(S(1, 1), S(2, 1)): np.ones((1, 1))})
    assert not spec.validate().ok
    with pytest.raises(InputError):
        reconstruct(spec, 0.0, 14)


def test_spec_json_roundtrip():
    spec = random_spec(YoungDiagram((2, 2, 1)), [(1, 1), (0, 1)], seed=8)
    back = CurvatureSpec.from_json(spec.to_json())
    assert back.inertia == spec.inertia
    for key, M in spec.arrows.items():
        assert back.arrows[key].allclose(M, atol=0)
    with pytest.raises(InputError):
        CurvatureSpec.from_json({"arrows": []})


def test_json_defaults_to_monotone_inertia():
    spec = CurvatureSpec.from_json({"diagram": {"rows": [2, 1]}, "arrows": []})
    assert spec.inertia == [(1, 0), (1, 0)]


def test_mapping_pads_jets():
    c = np.zeros((2, 1, 1))
    c[1] = 1.0
    spec = CurvatureSpec(YoungDiagram((1,)), [(1, 0)], {(S(1, 1), S(1, 1)): MatrixJet(c)})
    M = spec.mapping(5)[(S(1, 1), S(1, 1))]
    assert M.order == 5 and M.coeffs[1, 0, 0] == 1.0
    with pytest.raises(InputError):
        spec.mapping(5, center=1.0)


def test_structure_matrix_one_box():
    delta = reduce_diagram(YoungDiagram((1,)))
    spec = CurvatureSpec(YoungDiagram((1,)), [(1, 0)], {(S(1, 1), S(1, 1)): np.array([[2.0]])})
    C = structure_matrix(spec.mapping(0), delta, spec.inertia, 0, 0.0)
    # E' = F, F' = 2 E
    np.testing.assert_array_equal(C.value, [[0.0, 2.0], [1.0, 0.0]])


@pytest.mark.parametrize("rows, inertia", [((2, 1), None), ((2, 2), [(1, 1)]), ((3, 1, 1), None)])
def test_analysis_recovers_spec_frame(rows, inertia):
    D = YoungDiagram(rows)
    N = required_order(reduce_diagram(D))
    spec = random_spec(D, inertia, seed=5)
    curve, built = reconstruct(spec, 0.0, N)
    res = normal_frame(curve)
    assert verify_normal(res, curve).ok
    _, mismatch = frame_match(res, built)
    assert mismatch < 1e-8


def test_spec_from_result():
    c = random_curve(YoungDiagram((2, 1)), seed=1, order=10)
    res = normal_frame(c)
    spec = spec_from_result(res)
    assert spec.diagram == YoungDiagram((2, 1))
    assert all((b, a) not in spec.arrows for a, b in spec.arrows if a != b)


@pytest.mark.parametrize("rows, inertia", [((2,), None), ((2, 1), None), ((2, 2, 1), [(1, 1), (0, 1)])])
def test_roundtrip(rows, inertia):
    D = YoungDiagram(rows)
    c = random_curve(D, inertia, seed=2, order=required_order(reduce_diagram(D)))
    rep = roundtrip(c, 1e-6)
    assert rep.ok, rep.to_json()
    assert rep.symplectic_defect < 1e-8
