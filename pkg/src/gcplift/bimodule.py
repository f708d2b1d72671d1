"""Finitely generated projective Hilbert bimodules over the torus algebra.

A module is presented as ``P B^m`` where ``P_ij = <g_i, g_j>`` is the Gram
matrix of a finite generating family. An element is stored by its frame
coordinates ``x_i = <xi_i, x>``, which is just the vector in ``P B^m``.
The left action is twisted by a lattice shift ``sigma``:
``b . xi = xi sigma^{-1}(b)`` and ``_B<xi, eta> = sigma(<eta, xi>_B)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .fourier import (FourierElement, common_radius, derive, matvec, product_coeffs, reflect_conj,
                      twist_coeffs)

FRAME_TOL = 1e-10


def _as_shift(shift, n):
    if shift is None:
        return (Fraction(0),) * n
    shift = tuple(Fraction(s) for s in shift)
    if len(shift) != n:
        raise ValueError(f"shift must have {n} components")
    return shift


@dataclass(frozen=True, eq=False)
class Bimodule:
    """The module ``P B^m`` with left action twisted by ``sigma``.

    ``shift`` defines ``sigma(e_k) = e(k . shift) e_k``. ``power`` records
    which tensor power of ``root`` this is (``root`` is ``None`` for the
    generating module itself).
    """

    n: int
    proj: np.ndarray
    shift: tuple
    twist_degree: int = 0
    power: int = 1
    root: "Bimodule | None" = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.twist_degree != 0:
            raise ValueError("twisted line bundles with nonzero degree are only modelled on the grid")
        p = np.asarray(self.proj, dtype=complex)
        if p.ndim != self.n + 2 or p.shape[0] != p.shape[1]:
            raise ValueError("projection must be an m x m matrix of coefficient arrays")
        p = 0.5 * (p + np.swapaxes(reflect_conj(p, self.n), 0, 1))
        object.__setattr__(self, "proj", p)
        object.__setattr__(self, "shift", _as_shift(self.shift, self.n))

    # -- construction ---------------------------------------------------------

    @classmethod
    def from_generators(cls, gens, shift=None, twist_degree=0, check=True):
        """Module generated by elements ``g_i`` of B with ``sum g_i* g_i = 1``."""
        gens = list(gens)
        if not gens:
            raise ValueError("at least one generator is required")
        n = gens[0].n
        arrs = common_radius([g.coeffs for g in gens], n)
        g = np.stack(arrs)
        proj = product_coeffs(reflect_conj(g, n)[:, None], g[None, :], n)
        mod = cls(n, proj, shift, twist_degree)
        if check:
            mod.validate()
        return mod

    @classmethod
    def trivial(cls, n, shift=None):
        return cls(n, np.ones((1, 1) + (1,) * n, dtype=complex), shift)

    @classmethod
    def trig(cls, shift=None, n=2, axis=0):
        """Generated by ``cos(2 pi x_axis)`` and ``sin(2 pi x_axis)``."""
        e = [0] * n
        e[axis] = 1
        plus, minus = tuple(e), tuple(-v for v in e)
        c = FourierElement.from_terms({plus: 0.5, minus: 0.5}, n)
        s = FourierElement.from_terms({plus: -0.5j, minus: 0.5j}, n)
        return cls.from_generators([c, s], shift)

    def validate(self, tol=FRAME_TOL):
        p = self.proj
        pp = matmat(p, p, self.n)
        a, b = common_radius([pp, p], self.n)
        if np.abs(a - b).max() > tol:
            raise ValueError("Gram matrix of the generators is not idempotent")
        if self.power == 1:
            tr = FourierElement(self.n, np.einsum('ii...->...', p))
            if tr.max_abs_diff(FourierElement.unit(self.n)) > tol:
                raise ValueError("only rank-one (line bundle type) modules are supported")

    # -- structure ------------------------------------------------------------

    @property
    def m(self):
        return self.proj.shape[0]

    @property
    def base(self):
        return self if self.root is None else self.root

    def sigma(self, a, power=1):
        """Apply ``sigma^power`` of this module to a coefficient array."""
        return twist_coeffs(a, self.shift, power, self.n)

    def same(self, other):
        return other is self or (other.base is self.base and other.power == self.power)

    def element(self, coords, check=True):
        coords = np.asarray(coords, dtype=complex)
        if coords.ndim == self.n:
            coords = coords[None]
        if coords.shape[0] != self.m:
            raise ValueError(f"expected {self.m} coordinates, got {coords.shape[0]}")
        el = ModuleElement(self, coords)
        if check and self.frame_defect(el) > FRAME_TOL * max(1.0, np.abs(coords).max()):
            raise ValueError("coordinates do not lie in the range of the frame projection")
        return el

    def project(self, coords):
        """``P x``, the element ``sum_j xi_j x_j``."""
        return ModuleElement(self, matvec(self.proj, np.asarray(coords, dtype=complex), self.n))

    def frame(self):
        return [ModuleElement(self, self.proj[:, j]) for j in range(self.m)]

    def random_element(self, rng, R=1):
        side = (2 * R + 1,) * self.n
        c = rng.standard_normal((self.m,) + side) + 1j * rng.standard_normal((self.m,) + side)
        return self.project(c / np.sqrt(2))

    # -- inner products and actions -------------------------------------------

    def _check(self, *els):
        for e in els:
            if not isinstance(e, ModuleElement) or not self.same(e.module):
                raise ValueError("element belongs to a different bimodule")

    def inner_right(self, xi, eta):
        self._check(xi, eta)
        c = product_coeffs(reflect_conj(xi.coords, self.n), eta.coords, self.n).sum(axis=0)
        return FourierElement(self.n, c)

    def inner_left(self, xi, eta):
        c = self.inner_right(eta, xi).coeffs
        return FourierElement(self.n, self.sigma(c, 1))

    def act_left(self, b, xi):
        self._check(xi)
        return ModuleElement(self, product_coeffs(xi.coords, self.sigma(b.coeffs, -1)[None], self.n))

    def act_right(self, xi, b):
        self._check(xi)
        return ModuleElement(self, product_coeffs(xi.coords, b.coeffs[None], self.n))

    def derive(self, j, b):
        return derive(j, b)

    def frame_defect(self, xi):
        """``max |sum_j xi_j <xi_j, xi> - xi|`` over coefficients."""
        a, b = common_radius([matvec(self.proj, xi.coords, self.n), xi.coords], self.n)
        return float(np.abs(a - b).max(initial=0.0))

    def left_frame_defect(self, xi):
        """``max |sum_j _B<xi, xi_j> xi_j - xi|``; the right frame is also a left frame."""
        acc = None
        for fj in self.frame():
            t = self.act_left(self.inner_left(xi, fj), fj).coords
            acc = t if acc is None else sum(common_radius([acc, t], self.n))
        a, b = common_radius([acc, xi.coords], self.n)
        return float(np.abs(a - b).max(initial=0.0))

    def compatibility_defect(self, xi, eta, zeta):
        """``_B<xi, eta> zeta - xi <eta, zeta>_B``."""
        lhs = self.act_left(self.inner_left(xi, eta), zeta).coords
        rhs = self.act_right(xi, self.inner_right(eta, zeta)).coords
        a, b = common_radius([lhs, rhs], self.n)
        return float(np.abs(a - b).max(initial=0.0))

    # -- tensor powers --------------------------------------------------------

    def tensor(self, xi, eta):
        """``xi (x) eta`` for elements of powers ``p`` and ``q`` of one module."""
        E = self.base
        if xi.module.base is not E or eta.module.base is not E:
            raise ValueError("tensor factors must come from the same bimodule")
        p, q = xi.module.power, eta.module.power
        coords = tensor_coords(xi.coords, eta.coords, E, q)
        return ModuleElement(tensor_power(E, p + q), coords)

    def __repr__(self):
        return f"Bimodule(n={self.n}, m={self.m}, shift={tuple(str(s) for s in self.shift)}, power={self.power})"


@dataclass(frozen=True, eq=False)
class ModuleElement:
    module: Bimodule
    coords: np.ndarray

    def __add__(self, other):
        self.module._check(other)
        a, b = common_radius([self.coords, other.coords], self.module.n)
        return ModuleElement(self.module, a + b)

    def __sub__(self, other):
        self.module._check(other)
        a, b = common_radius([self.coords, other.coords], self.module.n)
        return ModuleElement(self.module, a - b)

    def __mul__(self, c):
        return ModuleElement(self.module, self.coords * complex(c))

    __rmul__ = __mul__

    def component(self, i):
        return FourierElement(self.module.n, self.coords[i])

    def max_abs_diff(self, other):
        a, b = common_radius([self.coords, other.coords], self.module.n)
        return float(np.abs(a - b).max(initial=0.0))


def matmat(a, b, n):
    """Product of two matrices over the algebra."""
    return product_coeffs(a[:, :, None], b[None, :, :], n).sum(axis=1)


def tensor_coords(x, y, E, q):
    """Coordinates of ``xi (x) eta`` where ``eta`` lies in the ``q``-th power:
    ``z_(I,J) = sigma^{-q}(x_I) y_J``."""
    n = E.n
    xs = E.sigma(x, -q)
    z = product_coeffs(xs[:, None], y[None, :], n)
    return z.reshape((-1,) + z.shape[2:])


def tensor_power(E: Bimodule, k: int) -> Bimodule:
    """``E^{(x) k}`` with its ``m^k`` tensor frame; ``k = 0`` gives B itself."""
    if k < 0:
        raise ValueError("tensor power must be nonnegative")
    E = E.base
    cache = E._cache
    if k in cache:
        return cache[k]
    if k == 0:
        out = Bimodule(E.n, np.ones((1, 1) + (1,) * E.n, dtype=complex), (0,) * E.n, power=0, root=E)
    elif k == 1:
        out = E
    else:
        prev = tensor_power(E, k - 1)
        a = E.sigma(E.proj, -(k - 1))
        m, mp = E.m, prev.m
        blk = product_coeffs(a[:, None, :, None], prev.proj[None, :, None, :], E.n)
        p = blk.reshape((m * mp, m * mp) + blk.shape[4:])
        out = Bimodule(E.n, p, tuple(k * s for s in E.shift), power=k, root=E)
    cache[k] = out
    return out
