"""The crossed product of the torus algebra by a bimodule, truncated in degree.

A :class:`GradedElement` is a finite sum of homogeneous parts. The degree
``k > 0`` part is ``S(xi)`` for ``xi`` in ``E^(x)k`` and is stored by the
tensor-frame coordinates of ``xi``. The degree ``-k`` part is ``S(eta)*``,
stored by the coordinates of ``eta``. Degree 0 holds one element of B,
stored with a leading axis of length one so all parts have the same layout.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .bimodule import Bimodule, ModuleElement, tensor_coords, tensor_power
from .fourier import (FourierElement, common_radius, matvec, mult_coo, product_coeffs,
                      reflect_conj)
from .operators import Basis, TruncatedOperator


@dataclass(frozen=True, eq=False)
class GradedElement:
    module: Bimodule
    parts: dict
    K: int
    lossy: bool = False

    def __post_init__(self):
        n = self.module.n
        clean = {}
        for k, v in self.parts.items():
            v = np.asarray(v, dtype=complex)
            if v.ndim == n:
                v = v[None]
            if v.shape[0] != self.module.m ** abs(k):
                raise ValueError(f"degree {k} part needs {self.module.m ** abs(k)} coordinates")
            clean[int(k)] = v
        object.__setattr__(self, "parts", clean)
        object.__setattr__(self, "module", self.module.base)

    @property
    def n(self):
        return self.module.n

    @property
    def degrees(self):
        return sorted(self.parts)

    def degree_span(self):
        return max((abs(k) for k in self.parts), default=0)

    def support_radius(self):
        return max((v.shape[-1] - 1) // 2 for v in self.parts.values()) if self.parts else 0

    def _new(self, parts, lossy=None):
        return GradedElement(self.module, parts, self.K, self.lossy if lossy is None else lossy)

    def __add__(self, other):
        return self._new(_add_parts(self.parts, other.parts, self.n), self.lossy or other.lossy)

    def __sub__(self, other):
        return self + other * -1.0

    def __neg__(self):
        return self * -1.0

    def __mul__(self, other):
        if isinstance(other, GradedElement):
            return gcp_multiply(self, other)
        c = complex(other)
        return self._new({k: v * (c if k >= 0 else np.conj(c)) for k, v in self.parts.items()})

    def __rmul__(self, c):
        return self * c

    def star(self):
        return gcp_star(self)

    def part(self, k):
        return self.parts.get(k)

    def max_abs_diff(self, other):
        out = 0.0
        for k in set(self.parts) | set(other.parts):
            a = self.parts.get(k)
            b = other.parts.get(k)
            if a is None:
                out = max(out, float(np.abs(b).max(initial=0.0)))
            elif b is None:
                out = max(out, float(np.abs(a).max(initial=0.0)))
            else:
                x, y = common_radius([a, b], self.n)
                out = max(out, float(np.abs(x - y).max(initial=0.0)))
        return out


def _add_parts(a, b, n):
    out = dict(a)
    for k, v in b.items():
        if k in out:
            x, y = common_radius([out[k], v], n)
            out[k] = x + y
        else:
            out[k] = v
    return out


# -- constructors ---------------------------------------------------------------

def from_base(E, b: FourierElement, K) -> GradedElement:
    return GradedElement(E, {0: b.coeffs}, K)


def unit(E, K) -> GradedElement:
    return from_base(E, FourierElement.unit(E.n), K)


def creation(xi: ModuleElement, K) -> GradedElement:
    """``S(xi)`` for ``xi`` in a tensor power of a module."""
    return GradedElement(xi.module.base, {xi.module.power: xi.coords}, K)


def annihilation(xi: ModuleElement, K) -> GradedElement:
    """``S(xi)*``."""
    if xi.module.power == 0:
        return GradedElement(xi.module.base, {0: reflect_conj(xi.coords, xi.module.n)}, K)
    return GradedElement(xi.module.base, {-xi.module.power: xi.coords}, K)


def random_graded(E, K, rng, degrees=None, R=1, scale=1.0) -> GradedElement:
    degrees = range(-K, K + 1) if degrees is None else degrees
    parts = {}
    for k in degrees:
        el = tensor_power(E, abs(k)).random_element(rng, R)
        parts[k] = scale * el.coords
    return GradedElement(E, parts, K)


# -- multiplication ---------------------------------------------------------------

def _neg_pos(E, x, z, p, q):
    """Coordinates of ``S(eta)* S(zeta)``, ``eta`` of length ``p <= q``."""
    n = E.n
    r = q - p
    z3 = z.reshape((E.m ** p, E.m ** r) + z.shape[1:])
    left = E.sigma(reflect_conj(x, n), -r)
    c = product_coeffs(left[:, None], z3, n).sum(axis=0)
    return matvec(tensor_power(E, r).proj, c, n)


def _pos_neg(E, x, z, p, q):
    """Coordinates of ``S(xi) S(zeta)*``, ``xi`` of length ``p >= q``."""
    n = E.n
    r = p - q
    x3 = x.reshape((E.m ** r, E.m ** q) + x.shape[1:])
    c = product_coeffs(reflect_conj(z, n)[None], x3, n).sum(axis=1)
    c = E.sigma(c, q)
    return matvec(tensor_power(E, r).proj, c, n)


def _pair(E, p, x, q, y):
    """Product of a homogeneous degree-``p`` part with a degree-``q`` part."""
    n = E.n
    if p == 0 and q == 0:
        return 0, product_coeffs(x, y, n)
    if p == 0:
        b = x[0]
        if q > 0:
            return q, product_coeffs(y, E.sigma(b, -q)[None], n)
        return q, product_coeffs(y, reflect_conj(b, n)[None], n)
    if q == 0:
        b = y[0]
        if p > 0:
            return p, product_coeffs(x, b[None], n)
        return p, product_coeffs(x, E.sigma(reflect_conj(b, n), p)[None], n)
    if p > 0 and q > 0:
        return p + q, tensor_coords(x, y, E, q)
    if p < 0 and q < 0:
        return p + q, tensor_coords(y, x, E, -p)
    if p < 0:
        a = -p
        if a <= q:
            return q - a, _neg_pos(E, x, y, a, q)
        return q - a, _neg_pos(E, y, x, q, a)
    b = -q
    if p >= b:
        return p - b, _pos_neg(E, x, y, p, b)
    return p - b, _pos_neg(E, y, x, b, p)


def gcp_multiply(F: GradedElement, G: GradedElement) -> GradedElement:
    if F.module is not G.module:
        raise ValueError("elements belong to different crossed products")
    E = F.module
    K = min(F.K, G.K)
    out = {}
    lossy = F.lossy or G.lossy
    for p, x in F.parts.items():
        for q, y in G.parts.items():
            if abs(p + q) > K:
                lossy = True
                continue
            d, w = _pair(E, p, x, q, y)
            out = _add_parts(out, {d: w}, E.n)
    return GradedElement(E, out, K, lossy)


def gcp_star(F: GradedElement) -> GradedElement:
    parts = {}
    for k, v in F.parts.items():
        parts[-k] = reflect_conj(v, F.n) if k == 0 else v
    return F._new(parts)


def gauge_act(z, F: GradedElement) -> GradedElement:
    z = complex(z)
    if abs(abs(z) - 1.0) > 1e-12:
        raise ValueError("gauge parameter must have modulus one")
    return F._new({k: v * z ** abs(k) if k != 0 else v for k, v in F.parts.items()})


def cond_exp(F: GradedElement) -> FourierElement:
    v = F.parts.get(0)
    if v is None:
        return FourierElement.zero(F.n)
    return FourierElement(F.n, v[0])


def x_inner(F: GradedElement, G: GradedElement) -> FourierElement:
    return cond_exp(gcp_multiply(gcp_star(F), G))


# -- the module X ----------------------------------------------------------------

def x_gram(E, k):
    """Gram matrix of the degree-``k`` block of the frame of X."""
    p = tensor_power(E, abs(k)).proj
    if k >= 0:
        return p
    return E.sigma(np.swapaxes(p, 0, 1), -k)


def x_coords(E, k, v):
    """Frame coordinates in X of a homogeneous degree-``k`` part."""
    if k >= 0:
        return v
    return E.sigma(reflect_conj(v, E.n), -k)


def x_frame(E: Bimodule, K: int):
    """Frame of ``X`` up to degree ``K``, ordered by ``|k|`` (``k`` before ``-k``).

    Returns a list of ``(degree, index, GradedElement)``.
    """
    E = E.base
    out = [(0, 0, unit(E, K))]
    for k in range(1, K + 1):
        p = tensor_power(E, k).proj
        for sign in (1, -1):
            for i in range(p.shape[0]):
                out.append((sign * k, i, GradedElement(E, {sign * k: p[:, i]}, K)))
    return out


def x_frame_defect(E, K, F: GradedElement) -> float:
    """``max |sum_J Xi_J <Xi_J, F> - F|`` over coefficients."""
    acc = GradedElement(E, {}, K)
    for _, _, xi in x_frame(E, K):
        acc = acc + gcp_multiply(xi, from_base(E, x_inner(xi, F), K))
    return acc.max_abs_diff(F)


def x_basis(E, K, M, dim_s, copies=1) -> Basis:
    degrees = tuple(range(-K, K + 1))
    sizes = tuple(E.m ** abs(k) for k in degrees)
    return Basis(E.n, M, dim_s, degrees, sizes, copies)


def coords_operator(basis: Basis, entries, copy=(0, 0)):
    """Assemble ``{(deg_r, I, deg_c, J): coefficient array}`` into a sparse
    operator acting as multiplication (tensor ``Id_S``) per entry."""
    M, n, s = basis.M, basis.n, basis.dim_s
    rows, cols, vals = [], [], []
    spin = np.arange(s)
    for (dr, i, dc, j), coeffs in entries.items():
        r, c, v = mult_coo(coeffs, M, n)
        if not len(v):
            continue
        r0 = basis.start(dr, copy[0], i)
        c0 = basis.start(dc, copy[1], j)
        rows.append((r0 + r[:, None] * s + spin).ravel())
        cols.append((c0 + c[:, None] * s + spin).ravel())
        vals.append(np.repeat(v, s))
    if rows:
        return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(basis.dim, basis.dim))
    return sp.csr_matrix((basis.dim, basis.dim), dtype=complex)


def gram_operator(E, K, M, dim_s) -> TruncatedOperator:
    """Orthogonal projection of the ambient space onto ``X (x)_B H``."""
    basis = x_basis(E, K, M, dim_s)
    entries = {}
    for k in range(-K, K + 1):
        g = x_gram(E, k)
        for i in range(g.shape[0]):
            for j in range(g.shape[1]):
                if np.any(g[i, j]):
                    entries[(k, i, k, j)] = g[i, j]
    return TruncatedOperator(coords_operator(basis, entries), basis, basis, (K, M), True)


def multiplication_entries(F: GradedElement, K):
    """``{(deg_r, I, deg_c, J): <Xi_I, F Xi_J>}`` over the frame of X."""
    E = F.module
    entries = {}
    lossy = False
    for k, j, xi in x_frame(E, K):
        prod = gcp_multiply(F, xi)
        lossy |= prod.lossy
        for d, v in prod.parts.items():
            u = x_coords(E, d, v)
            for i in range(u.shape[0]):
                if np.any(u[i]):
                    entries[(d, i, k, j)] = u[i]
    return entries, lossy


def represent_A(F: GradedElement, M: int, cl=None, dim_s=None, K=None) -> TruncatedOperator:
    """Left multiplication by ``F`` on the truncated ``X (x)_B (l2 (x) S)``."""
    K = F.K if K is None else K
    if dim_s is None:
        dim_s = 1 if cl is None else cl.dim_s
    basis = x_basis(F.module, K, M, dim_s)
    entries, lossy = multiplication_entries(GradedElement(F.module, F.parts, K, F.lossy), K)
    lossy |= F.support_radius() > M
    return TruncatedOperator(coords_operator(basis, entries), basis, basis, (K, M), False, lossy)


def gauge_unitary(basis: Basis, z) -> TruncatedOperator:
    """Diagonal unitary ``z^degree`` on a graded basis."""
    d = np.asarray(basis.labels[:, 1])
    return TruncatedOperator(sp.diags(complex(z) ** d.astype(float)).tocsr(), basis, basis)


def entry_reach(F: GradedElement, K: int) -> int:
    """Largest Fourier radius among the matrix entries of ``represent_A(F)``.

    Identities between represented operators hold exactly on columns whose
    modes lie at least this far inside the cutoff.
    """
    entries, _ = multiplication_entries(GradedElement(F.module, F.parts, K), K)
    return max((v.shape[-1] - 1) // 2 for v in entries.values()) if entries else 0


def relation_residuals(E, rng, samples, K=4, span=2):
    """Largest deviation of the four representation relations and of
    associativity over random elements.

    Relations are sampled on tensor powers up to ``span``; associativity on
    triples supported in degrees ``|k| <= span // 2 + 1``, for which every
    intermediate degree fits below ``K``.
    """
    E = E.base
    n = E.n
    out = dict.fromkeys(("i", "ii", "iii", "iv", "associativity"), 0.0)
    deg = range(-(span // 2 + 1), span // 2 + 2)
    if 2 * max(deg) > K:
        raise ValueError("degree cutoff too small for the associativity sample")
    for _ in range(samples):
        k = int(rng.integers(1, span + 1))
        Ek = tensor_power(E, k)
        xi, zeta = Ek.random_element(rng), Ek.random_element(rng)
        b = FourierElement.random(n, 1, rng)
        S, Sa, pi = (lambda x: creation(x, K)), (lambda x: annihilation(x, K)), (lambda c: from_base(E, c, K))
        out["i"] = max(out["i"], (Sa(xi) * S(zeta)).max_abs_diff(pi(Ek.inner_right(xi, zeta))))
        out["ii"] = max(out["ii"], (S(xi) * pi(b)).max_abs_diff(S(Ek.act_right(xi, b))))
        out["iii"] = max(out["iii"], (pi(b) * S(xi)).max_abs_diff(S(Ek.act_left(b, xi))))
        out["iv"] = max(out["iv"], (S(xi) * Sa(zeta)).max_abs_diff(pi(Ek.inner_left(xi, zeta))))
        F, G, H = (random_graded(E, K, rng, degrees=deg) for _ in range(3))
        out["associativity"] = max(out["associativity"], ((F * G) * H).max_abs_diff(F * (G * H)))
    return out
