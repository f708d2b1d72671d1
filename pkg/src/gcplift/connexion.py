"""Hermitian connexions on bimodules and their extension to the crossed product.

A connexion on ``P B^m`` is stored as ``nabla_j x = P d_j x + omega_j x`` in
frame coordinates, with ``omega_j`` an ``m x m`` matrix over B (``None``
meaning zero, which is the Grassmann connexion). Because ``sigma`` is a
translation it commutes with every ``d_j``, so the left Leibniz rule holds
for any such connexion and the left Hermitian law is equivalent to the
right one.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bimodule import Bimodule, ModuleElement, matmat, tensor_power
from .fourier import FourierElement, common_radius, derive, derive_coeffs, matvec, product_coeffs
from .gcp import GradedElement, coords_operator, x_basis, x_coords
from .operators import TruncatedOperator

CONNEXION_TOL = 1e-9


def _kron_b(a, b, n):
    blk = product_coeffs(a[:, None, :, None], b[None, :, None, :], n)
    return blk.reshape((a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]) + blk.shape[4:])


def _add(a, b, n):
    x, y = common_radius([a, b], n)
    return x + y


@dataclass(frozen=True, eq=False)
class Connexion:
    module: Bimodule
    omegas: tuple
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if len(self.omegas) != self.module.n:
            raise ValueError("one component per torus direction is required")

    @property
    def n(self):
        return self.module.n

    def gamma(self, k, j):
        """Coordinates of ``nabla_j`` applied to the tensor frame of ``E^(x)k``
        (column ``J`` holds the coordinates of ``nabla_j xi_J``)."""
        key = (k, j)
        if key in self._cache:
            return self._cache[key]
        E, n = self.module, self.n
        if k == 0:
            out = np.zeros((1, 1) + (1,) * n, dtype=complex)
        elif k == 1:
            out = matmat(E.proj, derive_coeffs(E.proj, j, n), n)
            if self.omegas[j] is not None:
                out = _add(out, matmat(self.omegas[j], E.proj, n), n)
        else:
            prev = tensor_power(E, k - 1)
            head_g = E.sigma(self.gamma(1, j), -(k - 1))
            head_p = E.sigma(E.proj, -(k - 1))
            out = _add(_kron_b(head_g, prev.proj, n), _kron_b(head_p, self.gamma(k - 1, j), n), n)
        self._cache[key] = out
        return out

    def apply_coords(self, j, k, y):
        """``nabla_j`` on coordinates ``y`` of an element of ``E^(x)k``."""
        n = self.n
        if k == 0:
            return derive_coeffs(y, j, n)
        p = tensor_power(self.module, k).proj
        return _add(matvec(self.gamma(k, j), y, n), matvec(p, derive_coeffs(y, j, n), n), n)

    def apply(self, j, xi: ModuleElement) -> ModuleElement:
        return ModuleElement(xi.module, self.apply_coords(j, xi.module.power, xi.coords))

    def __call__(self, xi):
        return [self.apply(j, xi) for j in range(self.n)]


def grassmann(E: Bimodule) -> Connexion:
    """``nabla_j(xi) = sum_i xi_i d_j <xi_i, xi>``."""
    return Connexion(E.base, (None,) * E.n)


def perturbed(E: Bimodule, b0: FourierElement, axis=0, scale=1.0) -> Connexion:
    """Grassmann connexion plus the module map ``xi -> scale * xi b0`` on one axis."""
    om = [None] * E.n
    om[axis] = product_coeffs(E.proj, scale * b0.coeffs[None, None], E.n)
    return Connexion(E.base, tuple(om))


# -- verification ------------------------------------------------------------------

@dataclass
class ConnexionReport:
    right_leibniz: float
    left_leibniz: float
    right_hermitian: float
    left_hermitian: float
    tol: float = CONNEXION_TOL

    def as_dict(self):
        return {"right_leibniz": self.right_leibniz, "left_leibniz": self.left_leibniz,
                "right_hermitian": self.right_hermitian, "left_hermitian": self.left_hermitian}

    @property
    def passed(self):
        return max(self.as_dict().values()) < self.tol


def check_connexion(nabla, module, xis, bs, tol=CONNEXION_TOL) -> ConnexionReport:
    """Largest deviation of the Leibniz and Hermitian laws over the samples.

    ``module`` provides ``inner_right``, ``inner_left``, ``act_left``,
    ``act_right`` and ``derive``; ``nabla`` provides ``apply(j, xi)`` and
    ``n``. Elements need ``+``, ``-`` and ``max_abs_diff``.
    """
    res = dict.fromkeys(("rl", "ll", "rh", "lh"), 0.0)
    for j in range(nabla.n):
        nx = [nabla.apply(j, x) for x in xis]
        for x, dx in zip(xis, nx):
            for b in bs:
                db = module.derive(j, b)
                lhs = nabla.apply(j, module.act_right(x, b))
                rhs = module.act_right(dx, b) + module.act_right(x, db)
                res["rl"] = max(res["rl"], lhs.max_abs_diff(rhs))
                lhs = nabla.apply(j, module.act_left(b, x))
                rhs = module.act_left(b, dx) + module.act_left(db, x)
                res["ll"] = max(res["ll"], lhs.max_abs_diff(rhs))
        for x, dx in zip(xis, nx):
            for y, dy in zip(xis, nx):
                lhs = module.inner_right(x, dy) + module.inner_right(dx, y)
                res["rh"] = max(res["rh"], lhs.max_abs_diff(module.derive(j, module.inner_right(x, y))))
                lhs = module.inner_left(dx, y) + module.inner_left(x, dy)
                res["lh"] = max(res["lh"], lhs.max_abs_diff(module.derive(j, module.inner_left(x, y))))
    return ConnexionReport(res["rl"], res["ll"], res["rh"], res["lh"], tol)


# -- extension to the crossed product -------------------------------------------

def extend_derivation(nabla: Connexion, F: GradedElement, j: int) -> GradedElement:
    """The *-derivation of the crossed product extending ``nabla_j``.

    A stored negative part ``eta`` of ``S(eta)*`` maps to ``nabla_j eta``,
    because the extension commutes with the involution.
    """
    if not isinstance(F, GradedElement):
        raise TypeError("extend_derivation needs an algebraic GradedElement")
    if F.module is not nabla.module.base:
        raise ValueError("connexion and element live over different modules")
    parts = {k: nabla.apply_coords(j, abs(k), v) for k, v in F.parts.items()}
    return F._new(parts)


def x_christoffel(nabla: Connexion, K: int, j: int) -> dict:
    """``{(k, I, k, J): <Xi_I, nabla_j Xi_J>}`` over the frame of X."""
    E = nabla.module
    entries = {}
    for k in range(-K, K + 1):
        g = nabla.gamma(abs(k), j)
        if k < 0:
            g = np.swapaxes(x_coords(E, k, np.swapaxes(g, 0, 1)), 0, 1)
        for i in range(g.shape[0]):
            for jj in range(g.shape[1]):
                if np.any(g[i, jj]):
                    entries[(k, i, k, jj)] = g[i, jj]
    return entries


def christoffel_operator(nabla: Connexion, K: int, M: int, j: int, dim_s=1) -> TruncatedOperator:
    basis = x_basis(nabla.module, K, M, dim_s)
    return TruncatedOperator(coords_operator(basis, x_christoffel(nabla, K, j)), basis, basis, (K, M))


class XConnexion:
    """The connexion ``sum_j nabla_j (x) gamma_j`` on X."""

    def __init__(self, nabla: Connexion, cl):
        if cl.n != nabla.n:
            raise ValueError("Clifford module must match the torus dimension")
        self.nabla = nabla
        self.cl = cl

    def components(self, Xi: GradedElement):
        return [extend_derivation(self.nabla, Xi, j) for j in range(self.nabla.n)]

    def _clifford(self, coeff_list):
        n = self.nabla.n
        arrs = common_radius([c.coeffs for c in coeff_list], n)
        return sum(np.multiply.outer(g, a) for g, a in zip(self.cl.gammas, arrs))

    def connexion_law_defect(self, Xi: GradedElement, b: FourierElement) -> float:
        """``nabla(Xi b) - nabla(Xi) b - Xi (x) [D_h, b]``, componentwise."""
        from .gcp import from_base, gcp_multiply
        K = Xi.K
        bb = from_base(Xi.module, b, K)
        out = 0.0
        for j in range(self.nabla.n):
            lhs = extend_derivation(self.nabla, gcp_multiply(Xi, bb), j)
            rhs = gcp_multiply(extend_derivation(self.nabla, Xi, j), bb) + \
                gcp_multiply(Xi, from_base(Xi.module, derive(j, b), K))
            out = max(out, lhs.max_abs_diff(rhs))
        return out

    def hermitian_defect(self, X1: GradedElement, X2: GradedElement) -> float:
        """``[D_h, <X1, X2>] - (<X1, nabla X2> - <nabla X1, X2>)`` as a
        Clifford-valued coefficient array."""
        from .gcp import x_inner
        inner = x_inner(X1, X2)
        lhs = self._clifford([derive(j, inner) for j in range(self.nabla.n)])
        d1, d2 = self.components(X1), self.components(X2)
        # <nabla X1, X2> carries gamma_j^* = -gamma_j, hence the plus sign
        rhs = self._clifford([x_inner(X1, d2[j]) + x_inner(d1[j], X2) for j in range(self.nabla.n)])
        a, b = common_radius([lhs, rhs], self.nabla.n)
        return float(np.abs(a - b).max(initial=0.0))
