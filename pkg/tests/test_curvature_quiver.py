import numpy as np
import pytest

from artifact.curvature_quiver import (
    compare_invariants,
    extract_quiver,
    fingerprints,
    span_distance,
    splitting_and_complement,
)
from artifact.diagram import Superbox, YoungDiagram, essential_pairs, reduce_diagram
from artifact.errors import AnalyzabilityError, InputError
from artifact.generators import flat_curve, random_curve, random_spec
from artifact.jets import MatrixJet
from artifact.normal_frame import normal_frame, required_order
from artifact.reconstruction import reconstruct
from artifact.symplectic import random_symplectic

S = Superbox


def analyzed(rows, inertia=None, seed=0):
    D = YoungDiagram(rows)
    c = random_curve(D, inertia, seed=seed, order=required_order(reduce_diagram(D)))
    return c, normal_frame(c)


def test_arrows_are_essential_pairs():
    _, res = analyzed((3, 1))
    q = extract_quiver(res)
    assert set(q.arrows) <= essential_pairs(res.delta)
    assert q.levels == [(1, (1, 0)), (1, (1, 0))]


def test_adjoint_relation():
    _, res = analyzed((2, 2, 1), [(1, 1), (1, 0)], seed=3)
    q = extract_quiver(res)
    assert q.adjoint_defect() < 1e-8


def test_nonessential_block_is_rejected():
    _, res = analyzed((3, 1))
    bad = dict(res.R)
    key = (S(1, 1), S(2, 1))  # zeroed leading chain pair
    bad[key] = bad[key] + MatrixJet.constant(np.ones((1, 1)), bad[key].order)
    res.R = bad
    with pytest.raises(AnalyzabilityError):
        extract_quiver(res)


def test_fingerprints_under_gauge():
    # conjugating by a constant O(1, 1) element leaves the fingerprints unchanged
    _, res = analyzed((2, 2), [(1, 1)], seed=4)
    q = extract_quiver(res)
    f = fingerprints(q)
    t = 0.4
    U = np.array([[np.cosh(t), np.sinh(t)], [np.sinh(t), np.cosh(t)]])
    Uinv = np.linalg.inv(U)
    J = q.J(1)
    q.arrows = {k: (Uinv @ (M @ J) @ U) @ J for k, M in q.arrows.items()}
    g = fingerprints(q)
    assert f.keys() == g.keys()
    assert max(abs(f[k] - g[k]) for k in f) < 1e-10


def test_symplectic_invariance():
    c, res = analyzed((2, 1), seed=7)
    q = extract_quiver(res)
    for k in range(3):
        q2 = extract_quiver(normal_frame(c.transformed(random_symplectic(3, seed=k))))
        assert compare_invariants(q, q2, 1e-6).isomorphic


def test_different_specs_are_distinguished():
    D = YoungDiagram((2, 1))
    q1 = extract_quiver(reconstruct(random_spec(D, seed=1), 0.0, 10)[1])
    q2 = extract_quiver(reconstruct(random_spec(D, seed=2), 0.0, 10)[1])
    cmp = compare_invariants(q1, q2, 1e-6)
    assert not cmp.isomorphic and cmp.max_diff > 1e-3


def test_compare_mismatches():
    _, a = analyzed((2, 1))
    _, b = analyzed((2,))
    with pytest.raises(InputError):
        compare_invariants(extract_quiver(a), extract_quiver(b))
    _, c = analyzed((2, 2), [(2, 0)])
    _, d = analyzed((2, 2), [(1, 1)])
    assert not compare_invariants(extract_quiver(c), extract_quiver(d)).isomorphic


def test_splitting_and_complement():
    _, res = analyzed((2, 1), seed=2)
    sp = splitting_and_complement(res)
    assert sp.direct_sum_rank == 3
    assert sp.splitting_rank == 6
    assert sp.complement_isotropy < 1e-8
    assert set(sp.V) == set(res.delta.superboxes())


def test_span_distance():
    A = np.eye(4)[:, :2]
    assert span_distance(A, A @ np.array([[2.0, 1.0], [0.0, 1.0]])) < 1e-14
    assert span_distance(A, np.eye(4)[:, 2:]) == pytest.approx(1.0)
    assert span_distance(A, np.eye(4)[:, :1]) == float("inf")


def test_flat_quiver_json():
    res = normal_frame(flat_curve(YoungDiagram((2, 1)), 0.0, 10))
    out = extract_quiver(res).to_json()
    assert {tuple(x["a"]) for x in out} >= {(1, 1), (2, 1)}
    assert all(max(abs(v) for e in x["jet"]["coeffs"] for v in e) < 1e-10 for x in out)
