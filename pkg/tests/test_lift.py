from fractions import Fraction

import numpy as np
import pytest

from gcplift import gcp
from gcplift.bimodule import Bimodule
from gcplift.clifford import build_clifford
from gcplift.connexion import grassmann, perturbed
from gcplift.fourier import FourierElement
from gcplift.lift import (build_lift, commutator_lifted, commutator_report, flat_spectrum,
                          kucerovsky_report, kucerovsky_residual, lift_odd_even, lift_odd_odd,
                          one_tensor_nabla, vertical_op, weyl_report)
from gcplift.operators import spectrum

SHIFT = (Fraction(1, 8), Fraction(0))


def brute_flat(K, M, n, reps):
    lam = [np.sqrt(d ** 2 + 4 * np.pi ** 2 * sum(v ** 2 for v in k))
           for d in range(-K, K + 1) for k in np.ndindex(*(2 * M + 1,) * n)
           for k in [tuple(i - M for i in k)]]
    lam = np.array(lam)
    return np.sort(np.concatenate([np.repeat(lam, reps), np.repeat(-lam, reps)]))


@pytest.mark.parametrize("n,K,M", [(2, 4, 4), (2, 2, 3), (4, 1, 1)])
def test_flat_odd_even_spectrum(n, K, M):
    cl = build_clifford(n)
    L = build_lift(grassmann(Bimodule.trivial(n)), K, M, cl)
    assert L.parity == "odd-even"
    ev = spectrum(L.operator)
    assert np.abs(ev - brute_flat(K, M, n, cl.dim_s // 2)).max() < 1e-8
    assert np.allclose(flat_spectrum(K, M, n), brute_flat(K, M, n, cl.dim_s // 2))


@pytest.mark.parametrize("n,K,M", [(1, 3, 5), (3, 1, 1)])
def test_flat_odd_odd_spectrum(n, K, M):
    # odd torus dimension: doubled multiplicity
    cl = build_clifford(n)
    L = build_lift(grassmann(Bimodule.trivial(n)), K, M, cl)
    assert L.parity == "odd-odd"
    ev = spectrum(L.operator)
    assert np.abs(ev - brute_flat(K, M, n, cl.dim_s)).max() < 1e-8


def test_odd_odd_on_even_torus():
    cl = build_clifford(2)
    L = lift_odd_odd(grassmann(Bimodule.trivial(2)), 2, 2, cl)
    assert np.abs(spectrum(L.operator) - flat_spectrum(2, 2, 2, "odd-odd")).max() < 1e-8


def test_twisted_trivial_module_has_flat_spectrum():
    # sigma is a translation, so D_v and D_h still decouple
    cl = build_clifford(2)
    L = build_lift(grassmann(Bimodule.trivial(2, SHIFT)), 2, 3, cl)
    assert np.abs(spectrum(L.operator) - flat_spectrum(2, 3, 2)).max() < 1e-8


def test_vertical_spectrum():
    E = Bimodule.trig(SHIFT)
    V = vertical_op(E, 2, 1, 2)
    ev = spectrum(V)
    counts = {k: int(np.sum(np.isclose(ev, k))) for k in range(-2, 3)}
    per = 9 * 2
    assert counts == {k: per * 2 ** abs(k) for k in range(-2, 3)}


@pytest.mark.parametrize("frame", ["unit", "trig"])
def test_structure(frame):
    E = Bimodule.trivial(2, SHIFT) if frame == "unit" else Bimodule.trig(SHIFT)
    cl = build_clifford(2)
    L = lift_odd_even(grassmann(E), 2, 3, cl)
    assert L.operator.hermitian_defect() < 1e-12
    g = L.grading()
    T, V = L.horizontal.matrix, L.vertical.matrix
    assert abs(g @ T + T @ g).max() < 1e-12
    assert abs(V @ g - g @ V).max() < 1e-12 if (V @ g - g @ V).nnz else True
    # squares: L^2 = V^2 + T^2 because V (x) gamma anticommutes with T
    Vg = V @ g
    cross = Vg @ T + T @ Vg
    assert (abs(cross).max() if cross.nnz else 0.0) < 1e-10
    U = gcp.gauge_unitary(L.basis, np.exp(0.3j)).matrix
    eq = U @ L.operator.matrix @ U.conj().T - L.operator.matrix
    assert (abs(eq).max() if eq.nnz else 0.0) < 1e-12


def test_odd_odd_grading_anticommutes():
    L = lift_odd_odd(grassmann(Bimodule.trig(SHIFT)), 1, 3, build_clifford(2))
    g = L.grading()
    a = g @ L.operator.matrix + L.operator.matrix @ g
    assert (abs(a).max() if a.nnz else 0.0) < 1e-12
    assert L.operator.hermitian_defect() < 1e-12


def test_horizontal_matches_module_formula(rng):
    # on the range of G, T (Xi (x) h) = Xi (x) D h + nabla(Xi) h for the trivial module,
    # where nabla = d: T is D_h on every degree block
    E = Bimodule.trivial(2, SHIFT)
    cl = build_clifford(2)
    T = one_tensor_nabla(grassmann(E), 1, 2, cl).dense()
    from gcplift.fourier import dirac_h
    D = dirac_h(2, cl).dense()
    assert np.allclose(T, np.kron(np.eye(3), D))


def test_commutator_bounded_and_kucerovsky(rng):
    E = Bimodule.trivial(2, SHIFT)
    cl = build_clifford(2)
    nabla = grassmann(E)
    F = gcp.random_graded(E, 2, rng, degrees=[-1, 0, 1])
    ladder = [(2, 3), (3, 5), (4, 7)]
    rep = commutator_report(nabla, cl, F, ladder)
    assert rep.passed and rep.variation < 1e-9
    assert rep.as_dict()["passed"]
    one = gcp.unit(E, 2)
    kr = kucerovsky_report(nabla, cl, one, ladder)
    assert max(kr.norms) < 1e-12
    xi = gcp.creation(E.random_element(rng), 2)
    kr = kucerovsky_report(nabla, cl, xi, ladder)
    assert kr.passed and min(kr.norms) > 0


def test_commutator_with_base_element_is_clifford_multiplication(rng):
    # [L, pi(b)] on degree 0 of the trivial module is sum_j d_j b (x) gamma_j
    E = Bimodule.trivial(2)
    cl = build_clifford(2)
    L = build_lift(grassmann(E), 0, 4, cl)
    b = FourierElement.random(2, 1, rng)
    C = commutator_lifted(L, gcp.from_base(E, b, 0))
    from gcplift.fourier import commutator_formula, interior_mask
    ref = commutator_formula(b, 4, cl).dense()
    cols = interior_mask(C.cols, 1)
    assert np.abs((C.dense() - ref)[:, cols]).max() < 1e-10


def test_kucerovsky_residual_of_unit_is_zero():
    E = Bimodule.trivial(2)
    cl = build_clifford(2)
    L = build_lift(grassmann(E), 2, 3, cl)
    R = kucerovsky_residual(L, gcp.unit(E, 2))
    assert R.matrix.nnz == 0 or abs(R.matrix).max() < 1e-12


def test_weyl_exponent():
    L = build_lift(grassmann(Bimodule.trivial(2)), 8, 8, build_clifford(2))
    rep = weyl_report(spectrum(L.operator), 8, 8, 2)
    assert rep["expected"] == 3
    assert abs(rep["exponent"] - 3) < 0.15


def test_perturbed_lift_still_selfadjoint():
    E = Bimodule.trivial(2)
    L = build_lift(perturbed(E, FourierElement.unit(2), 0, 0.5), 1, 2, build_clifford(2))
    assert L.operator.hermitian_defect() < 1e-12


def test_odd_even_needs_grading():
    with pytest.raises(ValueError):
        lift_odd_even(grassmann(Bimodule.trivial(1)), 1, 1, build_clifford(1))
    with pytest.raises(ValueError):
        build_lift(grassmann(Bimodule.trivial(2)), 1, 1, build_clifford(2), parity="even-even")
