import numpy as np
import pytest
from scipy.linalg import expm

from artifact.diagram import YoungDiagram
from artifact.flag import young_diagram
from artifact.generators import (
    diagrams_up_to,
    flat_curve,
    linear_hamiltonian_jacobi,
    random_curve,
    random_spec,
    rotating_line,
)
from artifact.symplectic import canonical_darboux, is_isotropic, omega_matrix


def test_partition_counts():
    # p(1..8) = 1, 2, 3, 5, 7, 11, 15, 22
    assert len(diagrams_up_to(8)) == 66
    assert len(set(diagrams_up_to(5))) == 18


def test_jacobi_curve_matches_flow():
    rng = np.random.default_rng(0)
    H = rng.standard_normal((4, 4))
    H = H + H.T
    c = linear_hamiltonian_jacobi(H, 0.2, 18)
    E0, _ = canonical_darboux(2)
    A = omega_matrix(2) @ H
    for t in (0.15, 0.25):
        np.testing.assert_allclose(c.frame(t), expm(t * A) @ E0, atol=1e-10)
    assert is_isotropic(c.frame, 1e-10)


def test_jacobi_rejects_odd_size():
    with pytest.raises(ValueError):
        linear_hamiltonian_jacobi(np.eye(3))


def test_rotating_line():
    c = rotating_line(0.0, 6)
    for t in (0.1, -0.5):
        np.testing.assert_allclose(c.frame(t)[:, 0], [np.sin(t), np.cos(t)], atol=1e-5)


def test_random_spec_structure():
    spec = random_spec(YoungDiagram((3, 3)), seed=1)
    assert spec.validate(2).ok
    assert spec.inertia == [(2, 0)]


def test_random_curve_is_seeded():
    a = random_curve(YoungDiagram((2, 1)), seed=4, order=8)
    b = random_curve(YoungDiagram((2, 1)), seed=4, order=8)
    assert a.frame.allclose(b.frame, atol=0)
    assert a.truth is not None


@pytest.mark.parametrize("rows", [(1,), (2, 2), (3, 1, 1)])
def test_flat_curve_diagram(rows):
    D = YoungDiagram(rows)
    assert young_diagram(flat_curve(D, 1.5, 2 * rows[0] + 1)).young_diagram == D
