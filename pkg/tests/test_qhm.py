from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gcplift import gcp, qhm
from gcplift.connexion import check_connexion
from gcplift.qhm import QHMElement, QHMParams

MU, NU = Fraction(1, 8), Fraction(1, 16)
seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


def e(t):
    return np.exp(2j * np.pi * t)


def theta(c, p, x0, k, width=0.2):
    """A smooth function with F(x + 1, y) = e(c p y) F(x, y), exact off the grid."""
    def f(x, y):
        g = sum(np.exp(-0.5 * ((x - x0 + n) / width) ** 2) * e(-c * p * n * y) for n in range(-5, 6))
        return g * e(k * y)
    return f


def sample(P, funcs):
    x, y = P.grid()
    return QHMElement.from_slices(P, {p: f(x, y) for p, f in funcs.items()})


@pytest.mark.parametrize("c", [0, 1, 2])
def test_product_matches_formula(c):
    P = QHMParams(c, MU, NU, 32, 3)
    f = {1: theta(c, 1, 0.3, 1), -1: theta(c, -1, 0.6, 0), 0: theta(c, 0, 0.1, 2)}
    g = {1: theta(c, 1, 0.7, -1), 0: theta(c, 0, 0.5, 1)}
    F, G = sample(P, f), sample(P, g)
    x, y = P.grid()
    mu, nu = float(MU), float(NU)
    expect = {}
    for q, fq in f.items():
        for r, gr in g.items():
            p = q + r
            v = fq(x - (q - p) * mu, y - (q - p) * nu) * gr(x - q * mu, y - q * nu)
            expect[p] = expect.get(p, 0) + v
    assert (F * G).max_abs_diff(QHMElement.from_slices(P, expect)) < 1e-12


@pytest.mark.parametrize("c", [0, 1])
def test_algebra_laws(c, rng):
    P = QHMParams(c, MU, NU, 16, 3)
    A, B, C = (qhm.random_element(P, rng, band=2, degrees=[-1, 0, 1]) for _ in range(3))
    assert ((A * B) * C).max_abs_diff(A * (B * C)) < 1e-12
    assert qhm.star_defect(A, B) < 1e-12
    assert A.star().star().max_abs_diff(A) == 0
    one = QHMElement.unit(P)
    assert (one * A).max_abs_diff(A) < 1e-14 and (A * one).max_abs_diff(A) < 1e-14


@pytest.mark.parametrize("c", [0, 1])
def test_trace(c, rng):
    P = QHMParams(c, MU, NU, 16, 2)
    assert qhm.qhm_trace(QHMElement.unit(P)) == 1
    A, B = (qhm.random_element(P, rng, band=2, degrees=[-1, 0, 1]) for _ in range(2))
    assert abs(qhm.qhm_trace(A * B) - qhm.qhm_trace(B * A)) < 1e-12
    r, s = Fraction(3, 16), Fraction(5, 16)
    assert abs(qhm.qhm_trace(qhm.heisenberg_act(r, s, 0.4, A)) - qhm.qhm_trace(A)) < 1e-12
    # positivity: tau(A* A) >= 0
    assert qhm.qhm_trace(A.star() * A).real > 0


@pytest.mark.parametrize("c", [0, 1])
def test_heisenberg_action(c, rng):
    P = QHMParams(c, MU, NU, 16, 2)
    A, B = (qhm.random_element(P, rng, band=2, degrees=[-1, 0, 1]) for _ in range(2))
    r, s, t = Fraction(1, 16), Fraction(2, 16), 0.37
    act = lambda F: qhm.heisenberg_act(r, s, t, F)
    assert act(A * B).max_abs_diff(act(A) * act(B)) < 1e-12
    assert act(A.star()).max_abs_diff(act(A).star()) < 1e-12
    assert qhm.heisenberg_act(0, 0, 0, A).max_abs_diff(A) == 0
    # the central circle acts on degree p by e(p t)
    Z = qhm.heisenberg_act(0, 0, t, A)
    for p in (-1, 0, 1):
        assert np.allclose(Z.slice(p), e(p * t) * A.slice(p))
    with pytest.raises(ValueError):
        qhm.heisenberg_act(Fraction(1, 7), 0, 0, A)


@pytest.mark.parametrize("c", [0, 1, 3])
def test_frame(c):
    P = QHMParams(c, MU, NU, 48, 2)
    x1, x2 = qhm.qhm_frame(P)
    one = QHMElement.unit(P)
    assert (x1.star() * x1 + x2.star() * x2).max_abs_diff(one) < 1e-10
    # read through the quasi-periodic accessor, xi_1 at x = -1/N is chi_1(-1/N)
    assert np.allclose(x1.shifted(1, 1, 0)[0], qhm.chi(-1 / P.N)[0])
    assert np.allclose(x1.shifted(1, 1, 0)[0], 1.0)


def test_frame_needs_resolution():
    with pytest.raises(ValueError):
        qhm.qhm_frame(QHMParams(0, Fraction(1, 8), 0, 8, 1))
    with pytest.raises(ValueError):
        qhm.qhm_frame(QHMParams(0, Fraction(1, 16), 0, 16, 0))


def test_spectral_derivatives_exact_for_c0():
    P = QHMParams(0, MU, NU, 16, 1)
    F = sample(P, {1: lambda x, y: e(2 * x - 3 * y)})
    assert np.allclose(qhm.qhm_derive(0, F).slice(1), 2j * np.pi * 2 * F.slice(1))
    assert np.allclose(qhm.qhm_derive(1, F).slice(1), 2j * np.pi * -3 * F.slice(1))
    assert np.allclose(qhm.qhm_derive(2, F).slice(1), 2j * np.pi * F.slice(1))
    with pytest.raises(IndexError):
        qhm.qhm_derive(3, F)


def test_finite_differences_fourth_order():
    # d/dx of a theta function, compared with its analytic derivative
    errs = []
    for N in (32, 64):
        P = QHMParams(1, MU, NU, N, 1)
        f = theta(1, 1, 0.4, 0)
        F = sample(P, {1: f})
        x, y = P.grid()
        h = 1e-5
        exact = (f(x + h, y) - f(x - h, y)) / (2 * h)
        errs.append(np.abs(qhm.qhm_derive(0, F).slice(1) - exact).max())
    assert errs[0] / errs[1] > 12


def test_heisenberg_relation_c0(rng):
    P = QHMParams(0, MU, NU, 16, 2)
    F = qhm.random_element(P, rng, band=2)
    assert qhm.heisenberg_defect(F) < 1e-9


def test_heisenberg_relation_converges(rng):
    defects = []
    for N in (32, 64):
        P = QHMParams(1, MU, 0, N, 1)
        F = sample(P, {1: theta(1, 1, 0.4, 1), -1: theta(1, -1, 0.2, 0)})
        defects.append(qhm.heisenberg_defect(F))
    assert defects[1] < defects[0] / 6


def test_connexion_c0(rng):
    P = QHMParams(0, MU, NU, 16, 3)
    xis = [qhm.random_element(P, rng, band=1, degrees=[1]) for _ in range(3)]
    bs = [qhm.random_element(P, rng, band=1, degrees=[0]) for _ in range(3)]
    rep = check_connexion(qhm.qhm_connexion(), qhm.QHMModule(P), xis, bs)
    assert rep.passed, rep.as_dict()


def test_connexion_c1_converges():
    res = []
    for N in (16, 32):
        P = QHMParams(1, MU, 0, N, 2)
        xis = [sample(P, {1: theta(1, 1, 0.4, 1)}), sample(P, {1: theta(1, 1, 0.8, 0)})]
        bs = [sample(P, {0: lambda x, y: np.cos(2 * np.pi * x) + e(y)})]
        res.append(max(check_connexion(qhm.qhm_connexion(), qhm.QHMModule(P), xis, bs).as_dict().values()))
    assert res[0] / res[1] >= 12


@pytest.mark.parametrize("frame", ["unit", "trig"])
def test_adapter_is_a_homomorphism(frame, rng):
    P = QHMParams(0, Fraction(1, 8), 0, 16, 3)
    ad = qhm.qhm_as_gcp(P, frame)
    A, B = (qhm.random_element(P, rng, band=2, degrees=[-1, 0, 1]) for _ in range(2))
    GA, GB = ad.to_graded(A), ad.to_graded(B)
    assert ad.from_graded(GA).max_abs_diff(A) < 1e-12
    assert ad.from_graded(GA * GB).max_abs_diff(A * B) < 1e-11
    assert ad.from_graded(GA.star()).max_abs_diff(A.star()) < 1e-12
    z = e(0.21)
    assert ad.from_graded(gcp.gauge_act(z, GA)).max_abs_diff(qhm.heisenberg_act(0, 0, 0.21, A)) < 1e-12
    assert abs(gcp.cond_exp(GA).coeff((0, 0)) - qhm.qhm_trace(A)) < 1e-12


def test_adapter_rejects_twisted_c():
    with pytest.raises(ValueError):
        qhm.qhm_as_gcp(QHMParams(1, MU, NU, 16, 1))
    with pytest.raises(ValueError):
        qhm.qhm_as_gcp(QHMParams(0, MU, NU, 16, 1), "spiral")


@given(seeds)
@settings(max_examples=10, deadline=None)
def test_binary_round_trip(tmp_path_factory, seed):
    P = QHMParams(1, Fraction(3, 16), Fraction(1, 16), 16, 2)
    F = qhm.random_element(P, np.random.default_rng(seed))
    path = tmp_path_factory.mktemp("bin") / "el.qhm"
    qhm.write_element(path, F)
    G = qhm.read_element(path)
    assert G.params == P and np.array_equal(G.values, F.values)


def test_binary_rejects_corruption(tmp_path, rng):
    P = QHMParams(0, MU, NU, 16, 1)
    path = tmp_path / "el.qhm"
    qhm.write_element(path, qhm.random_element(P, rng))
    raw = path.read_bytes()
    (tmp_path / "magic").write_bytes(b"XXXX" + raw[4:])
    (tmp_path / "short").write_bytes(raw[:-16])
    (tmp_path / "head").write_bytes(raw[:10])
    for name in ("magic", "short", "head"):
        with pytest.raises(ValueError):
            qhm.read_element(tmp_path / name)


def test_parameter_validation(rng):
    with pytest.raises(ValueError):
        QHMParams(0, Fraction(1, 3), 0, 16, 1)
    with pytest.raises(ValueError):
        QHMParams(0, 0, 0, 0, 1)
    P = QHMParams(0, MU, NU, 16, 1)
    with pytest.raises(ValueError):
        QHMElement(P, np.zeros((2, 16, 16)))
    with pytest.raises(ValueError):
        QHMElement.from_slices(P, {2: np.zeros((16, 16))})
    with pytest.raises(ValueError):
        QHMElement.unit(P) + QHMElement.unit(P.with_grid(32))
    with pytest.raises(TypeError):
        QHMElement.unit(P) + 1
    big = qhm.random_element(P, rng, degrees=[1])
    assert (big * big).lossy
