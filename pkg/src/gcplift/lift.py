"""Vertical, horizontal and lifted Dirac operators on the truncated ``X (x)_B H``.

Vectors of ``X (x)_B H`` are stored by their frame coordinates: the degree
``k`` block is ``H^(m^|k|)`` and the module sits inside as the range of the
Gram projection ``G``. The horizontal operator is

    G D G + sum_j G A_j G (x) gamma_j,   A_j = (Gamma_j - Gamma_j^*) / 2

where ``Gamma_j`` holds the frame coordinates of the extended connexion.
It agrees with ``Xi (x) h -> Xi (x) D h + nabla(Xi) h`` on the module for
Hermitian connexions and is selfadjoint on the nose, also after truncation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .clifford import CliffordRep
from .connexion import Connexion, x_christoffel
from .fourier import dirac_h, mult_coo
from .gcp import GradedElement, coords_operator, gram_operator, represent_A, x_basis, x_coords
from .operators import Basis, TruncatedOperator, spectrum, window_norm, weyl_exponent

PARITIES = ("odd-even", "odd-odd")


def _spinor(basis: Basis, mat):
    return sp.kron(sp.identity(basis.dim // basis.dim_s), sp.csr_matrix(mat), format="csr")


def vertical_op(E, K, M, dim_s) -> TruncatedOperator:
    """``(D_v xi)_k = k xi_k``."""
    basis = x_basis(E, K, M, dim_s)
    d = basis.labels[:, 1].astype(float)
    return TruncatedOperator(sp.diags(d).tocsr().astype(complex), basis, basis, (K, M), True)


def horizontal_ambient(basis: Basis, cl: CliffordRep):
    """``Id (x) D_h`` on every frame slot of every degree."""
    d = dirac_h(basis.M, cl, basis.n).matrix
    return sp.kron(sp.identity(basis.dim // d.shape[0]), d, format="csr")


def one_tensor_nabla(nabla: Connexion, K: int, M: int, cl: CliffordRep) -> TruncatedOperator:
    """The horizontal operator ``1 (x)_nabla D_h`` on the truncated ``X (x)_B H``."""
    E = nabla.module
    basis = x_basis(E, K, M, cl.dim_s)
    G = gram_operator(E, K, M, cl.dim_s).matrix
    D = horizontal_ambient(basis, cl)
    out = G @ D @ G
    for j in range(nabla.n):
        gam = coords_operator(basis, x_christoffel(nabla, K, j))
        A = 0.5 * (gam - gam.conj().T)
        if A.nnz:
            out = out + (G @ A @ G) @ _spinor(basis, cl.gammas[j])
    return TruncatedOperator(sp.csr_matrix(out), basis, basis, (K, M), True)


@dataclass(frozen=True, eq=False)
class LiftedTriple:
    operator: TruncatedOperator
    parity: str
    cutoffs: tuple
    nabla: Connexion
    cl: CliffordRep
    vertical: TruncatedOperator
    horizontal: TruncatedOperator
    provenance: dict = field(default_factory=dict)

    @property
    def basis(self):
        return self.operator.rows

    def grading(self):
        """The grading of the doubled space (odd-odd) or ``Id (x) gamma`` (odd-even)."""
        b = self.basis
        if self.parity == "odd-odd":
            half = b.dim // 2
            return sp.diags(np.concatenate([np.ones(half), -np.ones(half)])).tocsr()
        return _spinor(b, self.cl.grading)

    def spectrum(self, workers=1):
        return spectrum(self.operator, workers)


def lift_odd_even(nabla: Connexion, K: int, M: int, cl: CliffordRep) -> LiftedTriple:
    """``D_v (x) gamma + 1 (x)_nabla D_h``."""
    if cl.grading is None:
        raise ValueError("the odd-even lift needs a graded Clifford module (even torus dimension)")
    V = vertical_op(nabla.module, K, M, cl.dim_s)
    T = one_tensor_nabla(nabla, K, M, cl)
    Vg = V.matrix @ _spinor(V.rows, cl.grading)
    op = TruncatedOperator(sp.csr_matrix(Vg + T.matrix), T.rows, T.cols, (K, M), True)
    return LiftedTriple(op, "odd-even", (K, M), nabla, cl, V, T)


def lift_odd_odd(nabla: Connexion, K: int, M: int, cl: CliffordRep) -> LiftedTriple:
    """``[[0, D_v - i T], [D_v + i T, 0]]`` on the doubled space."""
    V = vertical_op(nabla.module, K, M, cl.dim_s)
    T = one_tensor_nabla(nabla, K, M, cl)
    up = V.matrix - 1j * T.matrix
    down = V.matrix + 1j * T.matrix
    op = sp.bmat([[None, up], [down, None]], format="csr")
    basis = T.rows.doubled()
    return LiftedTriple(TruncatedOperator(op, basis, basis, (K, M), True), "odd-odd", (K, M),
                        nabla, cl, V, T)


def build_lift(nabla, K, M, cl, parity=None) -> LiftedTriple:
    if parity is None:
        parity = "odd-even" if cl.grading is not None else "odd-odd"
    if parity not in PARITIES:
        raise ValueError(f"unknown parity {parity!r}")
    return (lift_odd_even if parity == "odd-even" else lift_odd_odd)(nabla, K, M, cl)


def flat_spectrum(K, M, n, parity="odd-even"):
    """Closed-form spectrum of the lift for the trivial module."""
    dim_s = 2 ** ((n + 1) // 2)
    r = np.arange(-M, M + 1)
    k2 = sum(g ** 2 for g in np.meshgrid(*([r] * n), indexing="ij")).ravel()
    deg = np.arange(-K, K + 1)
    lam = np.sqrt(deg[:, None] ** 2 + 4 * np.pi ** 2 * k2[None, :]).ravel()
    reps = dim_s // 2 * (2 if parity == "odd-odd" else 1)
    return np.sort(np.concatenate([np.repeat(lam, reps), np.repeat(-lam, reps)]))


# -- represented algebra on the lift ----------------------------------------------

def represent_on(L: LiftedTriple, F: GradedElement) -> TruncatedOperator:
    K, M = L.cutoffs
    A = represent_A(F, M, dim_s=L.cl.dim_s, K=K)
    if L.parity == "odd-odd":
        m = sp.block_diag([A.matrix, A.matrix], format="csr")
        return TruncatedOperator(m, L.basis, L.basis, (K, M), False, A.lossy)
    return A


def operator_reach(op: TruncatedOperator, max_degree=None):
    """``(mode reach, degree reach)``: the largest displacement of any nonzero
    entry, over columns of degree at most ``max_degree`` in absolute value."""
    coo = op.matrix.tocoo()
    lr, lc = op.rows.labels, op.cols.labels
    keep = np.ones(coo.nnz, dtype=bool)
    if max_degree is not None:
        keep = np.abs(lc[coo.col, 1]) <= max_degree
    if not keep.any():
        return 0, 0
    r, c = coo.row[keep], coo.col[keep]
    mode = np.abs(lr[r, 4:] - lc[c, 4:]).max(initial=0)
    deg = np.abs(lr[r, 1] - lc[c, 1]).max(initial=0)
    return int(mode), int(deg)


def commutator_lifted(L: LiftedTriple, F: GradedElement) -> TruncatedOperator:
    A = represent_on(L, F)
    return L.operator @ A - A @ L.operator


@dataclass
class NormReport:
    rungs: list
    norms: list
    window: tuple
    growing: list = field(default_factory=list)
    tol: float = 0.01

    @property
    def variation(self):
        top = max(self.norms)
        if top == 0.0:
            return 0.0
        return (top - min(self.norms)) / top

    @property
    def passed(self):
        return self.variation < self.tol

    def as_dict(self):
        return {"rungs": [list(r) for r in self.rungs], "norms": list(self.norms),
                "window": list(self.window), "variation": self.variation,
                "growing_window_norms": list(self.growing), "passed": self.passed}


def commutator_report(nabla, cl, F: GradedElement, ladder, parity=None, tol=0.01) -> NormReport:
    """Norm of ``[L, F]`` on a window fixed inside the smallest rung.

    The window keeps basis vectors whose image under the commutator is
    computed without truncation at every rung, so a bounded commutator shows
    up as an exactly stable norm.
    """
    ladder = sorted(ladder)
    K0, M0 = ladder[0]
    lifts = [build_lift(nabla, K, M, cl, parity) for K, M in ladder]
    comms = [commutator_lifted(L, GradedElement(F.module, F.parts, K)) for L, (K, M) in zip(lifts, ladder)]
    deg_w = K0 - F.degree_span()
    reach_l = max(operator_reach(L.operator, K0)[0] for L in lifts)
    reach_f = max(operator_reach(represent_on(L, GradedElement(F.module, F.parts, L.cutoffs[0])),
                                 max(deg_w, 0))[0] for L in lifts)
    mode_w = M0 - reach_l - reach_f
    if mode_w < 0 or deg_w < 0:
        raise ValueError("smallest rung is too small to contain an interior window for this element")
    norms = [window_norm(C, C.cols.window(mode_w, deg_w)) for C in comms]
    growing = []
    for C, (K, M) in zip(comms, ladder):
        growing.append(window_norm(C, C.cols.window(M - reach_l - reach_f, K - F.degree_span())))
    return NormReport(ladder, norms, (mode_w, deg_w), growing, tol)


# -- connexion condition -----------------------------------------------------------

def creation_operator(L: LiftedTriple, xi: GradedElement) -> sp.csr_matrix:
    """``T_xi : h -> xi (x) h`` from ``H`` into the truncated ``X (x)_B H``."""
    K, M = L.cutoffs
    basis = x_basis(xi.module, K, M, L.cl.dim_s)
    s = basis.dim_s
    spin = np.arange(s)
    nb = Basis.base(basis.n, M, s).dim
    rows, cols, vals = [], [], []
    for d, v in xi.parts.items():
        if abs(d) > K:
            raise ValueError("element degree exceeds the truncation")
        u = x_coords(xi.module, d, v)
        for i in range(u.shape[0]):
            r, c, w = mult_coo(u[i], M, basis.n)
            r0 = basis.start(d, 0, i)
            rows.append((r0 + r[:, None] * s + spin).ravel())
            cols.append((c[:, None] * s + spin).ravel())
            vals.append(np.repeat(w, s))
    T = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(basis.dim, nb))
    if L.parity == "odd-odd":
        T = sp.block_diag([T, T], format="csr")
    return T


def kucerovsky_residual(L: LiftedTriple, xi: GradedElement) -> TruncatedOperator:
    """``T_xi D - L T_xi`` with ``D`` the base operator (doubled when odd-odd)."""
    K, M = L.cutoffs
    Dh = dirac_h(M, L.cl, L.nabla.n)
    D = Dh.matrix
    base = Dh.rows
    if L.parity == "odd-odd":
        D = sp.bmat([[None, -1j * D], [1j * D, None]], format="csr")
        base = base.doubled()
    T = creation_operator(L, xi)
    R = T @ D - L.operator.matrix @ T
    return TruncatedOperator(sp.csr_matrix(R), L.basis, base, (K, M))


def kucerovsky_report(nabla, cl, xi: GradedElement, ladder, parity=None, tol=0.01) -> NormReport:
    ladder = sorted(ladder)
    K0, M0 = ladder[0]
    if xi.degree_span() > K0:
        raise ValueError("element degree exceeds the smallest rung")
    lifts = [build_lift(nabla, K, M, cl, parity) for K, M in ladder]
    res = [kucerovsky_residual(L, GradedElement(xi.module, xi.parts, L.cutoffs[0])) for L in lifts]
    reach_l = max(operator_reach(L.operator, xi.degree_span())[0] for L in lifts)
    reach_x = max((v.shape[-1] - 1) // 2 for v in xi.parts.values())
    mode_w = M0 - reach_l - reach_x
    if mode_w < 0:
        raise ValueError("smallest rung is too small to contain an interior window")
    norms = [window_norm(R, R.cols.window(mode_w)) for R in res]
    growing = [window_norm(R, R.cols.window(M - reach_l - reach_x)) for R, (K, M) in zip(res, ladder)]
    return NormReport(ladder, norms, (mode_w, 0), growing, tol)


def weyl_report(eigs, K, M, n_torus):
    """Counting-function exponent over the top octave of the complete ball."""
    lam_max = min(float(K), 2 * np.pi * M)
    return {"lambda_max": lam_max, "exponent": weyl_exponent(eigs, lam_max),
            "expected": 1 + n_torus}
