import numpy as np
import pytest

from gcplift.clifford import build_clifford, check_relations, words


@pytest.mark.parametrize("n", range(1, 7))
def test_relations_and_dimension(n):
    cl = build_clifford(n)
    assert cl.dim_s == 2 ** ((n + 1) // 2)
    assert len(cl.gammas) == n
    assert check_relations(cl) < 1e-12


def test_two_generators_are_pauli():
    # gamma_1 = i sigma_x, gamma_2 = i sigma_y; grading = i gamma_1 gamma_2 = sigma_z... up to sign
    cl = build_clifford(2)
    sx = np.array([[0, 1], [1, 0]])
    sy = np.array([[0, -1j], [1j, 0]])
    assert np.allclose(cl.gammas[0], 1j * sx)
    assert np.allclose(cl.gammas[1], 1j * sy)
    assert np.allclose(cl.grading, 1j * cl.gammas[0] @ cl.gammas[1])
    assert np.allclose(np.abs(np.diag(cl.grading)), 1)


@pytest.mark.parametrize("n", [2, 4, 6])
def test_grading_is_traceless_involution(n):
    g = build_clifford(n).grading
    assert np.allclose(g @ g, np.eye(len(g)))
    assert abs(np.trace(g)) < 1e-12


@pytest.mark.parametrize("n", [1, 3, 5])
def test_odd_dimension_has_no_grading(n):
    assert build_clifford(n).grading is None


def test_words_are_unitary():
    cl = build_clifford(3)
    count = 0
    for length, w in words(cl, 3):
        assert np.allclose(w.conj().T @ w, np.eye(cl.dim_s))
        count += 1
    assert count == 3 + 9 + 27


def test_full_matrix_algebra_for_even_n():
    # products of distinct generators span M_{2^m}(C)
    cl = build_clifford(4)
    mats = [np.eye(cl.dim_s)]
    from itertools import combinations
    for r in range(1, 5):
        for idx in combinations(range(4), r):
            w = np.eye(cl.dim_s, dtype=complex)
            for i in idx:
                w = w @ cl.gammas[i]
            mats.append(w)
    A = np.array([m.ravel() for m in mats])
    assert np.linalg.matrix_rank(A) == cl.dim_s ** 2


@pytest.mark.parametrize("bad", [0, -1, 2.5, "3"])
def test_rejects_bad_n(bad):
    with pytest.raises(ValueError):
        build_clifford(bad)
