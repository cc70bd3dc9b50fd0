import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.diagram import (
    ReducedDiagram,
    Superbox,
    YoungDiagram,
    allowed_pairs,
    chain_pairs,
    check_shapes,
    complete_mapping,
    essential_pairs,
    lemma_quasi_normal_zero_pairs,
    reduce_diagram,
    validate_mapping,
    zeroed_chain_pairs,
)
from artifact.errors import InputError
from artifact.jets import MatrixJet

S = Superbox


@st.composite
def diagrams(draw, max_rows=4, max_len=5):
    rows = draw(st.lists(st.integers(1, max_len), min_size=1, max_size=max_rows))
    return YoungDiagram(tuple(sorted(rows, reverse=True)))


def test_reduce_groups_equal_rows():
    delta = reduce_diagram(YoungDiagram((3, 3, 2, 1, 1)))
    assert delta.levels == ((3, 2), (2, 1), (1, 2))
    assert delta.n == 10
    assert delta.expand() == YoungDiagram((3, 3, 2, 1, 1))


def test_columns_roundtrip():
    D = YoungDiagram((4, 2, 1))
    assert D.columns == (3, 2, 1, 1)
    assert YoungDiagram.from_columns(D.columns) == D
    assert YoungDiagram.from_json(D.to_json()) == D


@pytest.mark.parametrize("rows", [(), (1, 2), (0,), (2, -1)])
def test_bad_diagrams(rows):
    with pytest.raises(InputError):
        YoungDiagram(rows)


def test_superbox_navigation():
    delta = reduce_diagram(YoungDiagram((3, 1)))
    assert delta.superboxes() == [S(1, 1), S(1, 2), S(1, 3), S(2, 1)]
    assert delta.special(1) == S(1, 3)
    assert delta.right(S(1, 3)) is None
    assert delta.left(S(1, 2)) == S(1, 1)
    assert delta.is_special(S(2, 1))
    assert repr(S(1, 2)) == "(1,2)"


def test_chain_examples():
    # p = (3, 1): only the level-1 box moves
    delta = reduce_diagram(YoungDiagram((3, 1)))
    assert chain_pairs(delta, 2, 1) == [(S(1, 1), S(2, 1)), (S(1, 2), S(2, 1)), (S(1, 3), S(2, 1))]
    # p = (3, 2): alternate, then finish on level 1
    delta = reduce_diagram(YoungDiagram((3, 2)))
    assert chain_pairs(delta, 2, 1) == [
        (S(1, 1), S(2, 1)),
        (S(1, 1), S(2, 2)),
        (S(1, 2), S(2, 2)),
        (S(1, 3), S(2, 2)),
    ]
    with pytest.raises(InputError):
        chain_pairs(delta, 1, 2)


def test_essential_pairs_p21():
    delta = reduce_diagram(YoungDiagram((2, 1)))
    ess = essential_pairs(delta)
    # single-row level: no neighbour block; gap 1 means no zeroed chain pair
    assert (S(1, 1), S(1, 2)) not in ess
    assert (S(1, 1), S(2, 1)) in ess and (S(1, 2), S(2, 1)) in ess
    assert zeroed_chain_pairs(delta) == set()


def test_zeroed_pairs_p31():
    delta = reduce_diagram(YoungDiagram((3, 1)))
    assert zeroed_chain_pairs(delta) == {(S(1, 1), S(2, 1)), (S(2, 1), S(1, 1))}


@settings(max_examples=80, deadline=None)
@given(diagrams())
def test_chain_length(D):
    delta = reduce_diagram(D)
    for i in range(2, delta.d + 1):
        for j in range(1, i):
            ch = chain_pairs(delta, i, j)
            assert len(ch) == delta.p[j - 1] + delta.p[i - 1] - 1
            assert ch[-1] == (delta.special(j), delta.special(i))


@settings(max_examples=80, deadline=None)
@given(diagrams())
def test_quasi_normal_characterizations_agree(D):
    delta = reduce_diagram(D)
    boxes = delta.superboxes()
    every = {(a, b) for a in boxes for b in boxes}
    assert every - lemma_quasi_normal_zero_pairs(delta) == allowed_pairs(delta)


@settings(max_examples=80, deadline=None)
@given(diagrams())
def test_essential_pairs_symmetric_and_allowed(D):
    delta = reduce_diagram(D)
    ess = essential_pairs(delta)
    assert all((b, a) in ess for a, b in ess)
    assert ess <= allowed_pairs(delta)
    assert not (ess & zeroed_chain_pairs(delta))


def _jet(M, order=2):
    return MatrixJet.constant(np.atleast_2d(M), order)


def test_validate_detects_each_kind():
    delta = reduce_diagram(YoungDiagram((3, 3, 1)))
    a1, a2, a3, b = S(1, 1), S(1, 2), S(1, 3), S(2, 1)
    R = {
        (a1, a1): _jet([[1.0, 2.0], [0.0, 1.0]]),  # not symmetric
        (a1, a2): _jet(np.eye(2)),  # neighbour block must be antisymmetric
        (a2, a1): _jet(np.eye(2)),
        (a1, a3): _jet(np.ones((2, 2))),  # not allowed
        (a3, a1): _jet(np.ones((2, 2))),
        (b, a1): _jet(np.ones((2, 1))),  # zeroed chain pair
        (a1, b): _jet(np.ones((1, 2))),
    }
    rep = validate_mapping(complete_mapping(R, delta, 2, 0.0), delta)
    kinds = {v.kind for v in rep.violations}
    assert kinds == {"compatibility", "antisymmetry", "quasi_normal", "normal"}
    assert not rep.ok
    loose = validate_mapping(complete_mapping(R, delta, 2, 0.0), delta, "quasi_normal")
    assert "normal" not in {v.kind for v in loose.violations}


def test_violation_reports_first_order():
    delta = reduce_diagram(YoungDiagram((1,)))
    c = np.zeros((4, 1, 1))
    c[2] = 1.0
    R = {(S(1, 1), S(1, 1)): MatrixJet(c)}
    assert validate_mapping(R, delta).ok
    delta2 = reduce_diagram(YoungDiagram((2, 1)))
    R2 = complete_mapping({(S(1, 1), S(1, 2)): MatrixJet(c)}, delta2, 3, 0.0)
    v = validate_mapping(R2, delta2).violations[0]
    assert v.kind == "antisymmetry" and v.order == 2


def test_shape_errors_raise():
    delta = reduce_diagram(YoungDiagram((2, 2)))
    with pytest.raises(InputError):
        check_shapes({(S(1, 1), S(1, 1)): _jet(np.eye(3))}, delta)
    with pytest.raises(InputError):
        validate_mapping({}, delta, "strict")


def test_complete_mapping_fills_transposes():
    delta = reduce_diagram(YoungDiagram((2, 1)))
    M = MatrixJet(np.arange(3.0).reshape(3, 1, 1))
    R = complete_mapping({(S(1, 1), S(2, 1)): M}, delta, 2, 0.0)
    assert len(R) == 9
    assert R[(S(2, 1), S(1, 1))].allclose(M.T)
    assert R[(S(1, 2), S(1, 2))].max_abs() == 0.0
    assert validate_mapping(R, delta).ok
