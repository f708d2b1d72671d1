import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gcplift.clifford import build_clifford
from gcplift.fourier import (FourierElement, commutator, commutator_formula, commutator_norms,
                             derive, dirac_closed_form, dirac_h, interior_mask, multiply, norm1,
                             represent, star)
from gcplift.operators import spectrum

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


def rand(seed, n=2, R=2):
    return FourierElement.random(n, R, np.random.default_rng(seed))


def brute_product(a, b):
    out = {}
    for k, x in a.terms().items():
        for l, y in b.terms().items():
            m = tuple(i + j for i, j in zip(k, l))
            out[m] = out.get(m, 0) + x * y
    return FourierElement.from_terms(out, a.n)


@given(seeds)
@settings(max_examples=25, deadline=None)
def test_product_matches_lattice_sum(seed):
    a, b = rand(seed), rand(seed + 1, R=1)
    assert multiply(a, b).max_abs_diff(brute_product(a, b)) < 1e-12


@given(seeds)
@settings(max_examples=25, deadline=None)
def test_product_matches_pointwise_values(seed):
    a, b = rand(seed), rand(seed + 1)
    x, y = np.random.default_rng(seed).uniform(size=(2, 7))
    assert np.allclose((a * b).evaluate(x, y), a.evaluate(x, y) * b.evaluate(x, y))


@given(seeds)
@settings(max_examples=25, deadline=None)
def test_star_is_pointwise_conjugate(seed):
    a = rand(seed)
    x, y = np.random.default_rng(seed).uniform(size=(2, 5))
    assert np.allclose(star(a).evaluate(x, y), np.conj(a.evaluate(x, y)))
    assert star(star(a)).max_abs_diff(a) == 0


def test_derive_of_character():
    e = FourierElement.character((2, -1))
    d = derive(0, e)
    assert d.coeff((2, -1)) == pytest.approx(2j * np.pi * 2)
    assert derive(1, e).coeff((2, -1)) == pytest.approx(2j * np.pi * -1)


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_derivation_leibniz(seed):
    a, b = rand(seed), rand(seed + 1)
    for j in range(2):
        lhs = derive(j, a * b)
        rhs = derive(j, a) * b + a * derive(j, b)
        assert lhs.max_abs_diff(rhs) < 1e-10


def test_grid_round_trip(rng):
    a = FourierElement.random(2, 3, rng)
    assert FourierElement.from_grid(a.on_grid(8)).max_abs_diff(a) < 1e-12


def test_representation_is_multiplicative_on_interior(rng):
    a, b = FourierElement.random(2, 1, rng), FourierElement.random(2, 1, rng)
    M = 5
    lhs = represent(a * b, M).matrix.toarray()
    rhs = (represent(a, M).matrix @ represent(b, M).matrix).toarray()
    cols = interior_mask(represent(a, M).cols, 2)
    assert np.abs((lhs - rhs)[:, cols]).max() < 1e-12


def test_representation_of_star_is_adjoint(rng):
    a = FourierElement.random(2, 2, rng)
    A = represent(a, 4).matrix.toarray()
    assert np.allclose(represent(star(a), 4).matrix.toarray(), A.conj().T)


@pytest.mark.parametrize("n,M", [(1, 6), (2, 3), (2, 6), (3, 2)])
def test_dirac_spectrum_closed_form(n, M):
    ev = spectrum(dirac_h(M, build_clifford(n)))
    assert np.abs(ev - dirac_closed_form(M, n)).max() < 1e-8
    assert np.abs(np.sort(-ev) - ev).max() < 1e-10


def test_commutator_formula_interior(rng):
    a = FourierElement.random(2, 2, rng)
    cl = build_clifford(2)
    M = 5
    C = commutator(dirac_h(M, cl), a).dense()
    F = commutator_formula(a, M, cl).dense()
    cols = interior_mask(dirac_h(M, cl).cols, 2)
    assert np.abs((C - F)[:, cols]).max() < 1e-10


def test_commutator_norms_stable(rng):
    a = FourierElement.random(2, 1, rng)
    norms = commutator_norms(a, build_clifford(2), [3, 5, 7])
    assert max(norms) - min(norms) < 1e-9 * max(norms)


def test_norm1_oracles():
    cl = build_clifford(2)
    one = FourierElement.unit(2)
    assert norm1(one, 4, cl) == pytest.approx(1.0)
    assert norm1(one * (3 - 4j), 4, cl) == pytest.approx(5.0)
    e = FourierElement.character((1, 0))
    v8, v12 = norm1(e, 8, cl), norm1(e, 12, cl)
    assert v8 >= max(1.0, 2 * np.pi) - 1e-9
    assert abs(v8 - v12) / v12 < 1e-3
    # the 2x2 model [[1, 0], [2 pi i, 1]] has norm sqrt(1 + pi^2) + pi
    assert v8 == pytest.approx(np.sqrt(1 + np.pi ** 2) + np.pi, rel=1e-3)


def test_norm1_homogeneous(rng):
    cl = build_clifford(2)
    a = FourierElement.random(2, 1, rng)
    assert norm1(2 * a, 5, cl) == pytest.approx(2 * norm1(a, 5, cl))


def test_from_terms_validation():
    with pytest.raises(ValueError):
        FourierElement.from_terms({})
    with pytest.raises(ValueError):
        FourierElement.from_terms({(0, 0): 1, (1,): 2})
    with pytest.raises(ValueError):
        FourierElement(2, np.zeros((2, 2)))
