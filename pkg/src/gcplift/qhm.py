"""Quantum Heisenberg manifolds sampled on a grid.

An element is a finite family of functions ``F(x, y, p)`` with
``F(x + 1, y, p) = e(c p y) F(x, y, p)`` and 1-periodic in ``y``; it is
stored on one fundamental domain ``x, y in {0, 1/N, ..., (N-1)/N}`` for
``|p| <= K``. Shifts by multiples of ``mu`` and ``nu`` stay on the grid
because ``mu N`` and ``nu N`` are required to be integers.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bimodule import Bimodule, tensor_coords
from .connexion import grassmann
from .fourier import FourierElement, product_coeffs, reflect_conj, trim_coeffs
from .gcp import GradedElement

MAGIC = b"QHM1"
HEADER = struct.Struct("<4s7i")


def e(t):
    return np.exp(2j * np.pi * t)


@dataclass(frozen=True)
class QHMParams:
    c: int
    mu: Fraction
    nu: Fraction
    N: int
    K: int

    def __post_init__(self):
        object.__setattr__(self, "mu", Fraction(self.mu))
        object.__setattr__(self, "nu", Fraction(self.nu))
        if self.N < 1 or self.K < 0:
            raise ValueError("grid size must be positive and degree cutoff nonnegative")
        for name in ("mu", "nu"):
            if (getattr(self, name) * self.N).denominator != 1:
                raise ValueError(f"{name} = {getattr(self, name)} is not a multiple of 1/{self.N}")

    @property
    def mu_steps(self):
        return int(self.mu * self.N)

    @property
    def nu_steps(self):
        return int(self.nu * self.N)

    @property
    def degrees(self):
        return np.arange(-self.K, self.K + 1)

    def grid(self):
        x = np.arange(self.N) / self.N
        return np.meshgrid(x, x, indexing="ij")

    def with_grid(self, N):
        return QHMParams(self.c, self.mu, self.nu, N, self.K)


@dataclass(frozen=True, eq=False)
class QHMElement:
    params: QHMParams
    values: np.ndarray
    lossy: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        P = self.params
        if v.shape != (2 * P.K + 1, P.N, P.N):
            raise ValueError(f"values must have shape {(2 * P.K + 1, P.N, P.N)}, got {v.shape}")
        object.__setattr__(self, "values", v)

    # -- constructors ------------------------------------------------------------

    @classmethod
    def zero(cls, params):
        return cls(params, np.zeros((2 * params.K + 1, params.N, params.N), dtype=complex))

    @classmethod
    def unit(cls, params):
        return cls.from_slices(params, {0: np.ones((params.N, params.N))})

    @classmethod
    def from_slices(cls, params, slices):
        out = np.zeros((2 * params.K + 1, params.N, params.N), dtype=complex)
        for p, v in slices.items():
            if abs(p) > params.K:
                raise ValueError(f"degree {p} exceeds the cutoff {params.K}")
            out[p + params.K] = v
        return cls(params, out)

    @classmethod
    def from_function(cls, params, func, degrees=None):
        """Sample ``func(x, y, p)`` on the fundamental domain."""
        x, y = params.grid()
        degrees = params.degrees if degrees is None else degrees
        return cls.from_slices(params, {int(p): func(x, y, int(p)) for p in degrees})

    # -- arithmetic ------------------------------------------------------------------

    def _check(self, other):
        if not isinstance(other, QHMElement):
            raise TypeError("expected a QHMElement")
        if other.params != self.params:
            raise ValueError("parameter mismatch between QHM elements")

    def __add__(self, other):
        self._check(other)
        return QHMElement(self.params, self.values + other.values, self.lossy or other.lossy)

    def __sub__(self, other):
        self._check(other)
        return QHMElement(self.params, self.values - other.values, self.lossy or other.lossy)

    def __neg__(self):
        return QHMElement(self.params, -self.values, self.lossy)

    def __mul__(self, other):
        if isinstance(other, QHMElement):
            return qhm_multiply(self, other)
        return QHMElement(self.params, self.values * complex(other), self.lossy)

    def __rmul__(self, c):
        return QHMElement(self.params, self.values * complex(c), self.lossy)

    def star(self):
        return qhm_star(self)

    def slice(self, p):
        return self.values[p + self.params.K]

    def max_abs_diff(self, other):
        self._check(other)
        return float(np.abs(self.values - other.values).max())

    def support(self, tol=0.0):
        return [int(p) for p in self.params.degrees if np.abs(self.slice(p)).max() > tol]

    # -- grid access -------------------------------------------------------------

    def shifted(self, p, sx, sy):
        """``F(x - sx/N, y - sy/N, p)`` on the grid, quasi-periodic in ``x``."""
        P = self.params
        N = P.N
        src_x = np.arange(N) - sx
        ix = np.mod(src_x, N)
        wraps = (src_x - ix) // N
        iy = np.mod(np.arange(N) - sy, N)
        vals = self.slice(p)[np.ix_(ix, iy)]
        if P.c and p:
            yv = iy / N
            vals = vals * e(P.c * p * np.outer(wraps, yv))
        return vals


def qhm_multiply(F1: QHMElement, F2: QHMElement) -> QHMElement:
    """``(F1 F2)(x,y,p) = sum_q F1(x-(q-p)mu, y-(q-p)nu, q) F2(x-q mu, y-q nu, p-q)``."""
    F1._check(F2)
    P = F1.params
    K, a, b = P.K, P.mu_steps, P.nu_steps
    out = np.zeros_like(F1.values)
    lossy = F1.lossy or F2.lossy
    s1, s2 = F1.support(), F2.support()
    for q in s1:
        for r in s2:
            p = q + r
            if abs(p) > K:
                lossy = True
                continue
            out[p + K] += F1.shifted(q, (q - p) * a, (q - p) * b) * F2.shifted(r, q * a, q * b)
    return QHMElement(P, out, lossy)


def qhm_star(F: QHMElement) -> QHMElement:
    """``F*(x, y, p) = conj(F(x, y, -p))``."""
    return QHMElement(F.params, np.conj(F.values[::-1]), F.lossy)


def star_defect(F1: QHMElement, F2: QHMElement) -> float:
    """``max |(F1 F2)* - F2* F1*|``, the anti-multiplicativity diagnostic."""
    return qhm_star(F1 * F2).max_abs_diff(qhm_star(F2) * qhm_star(F1))


def _grid_steps(v, N, name):
    s = Fraction(v) * N
    if s.denominator != 1:
        raise ValueError(f"{name} = {v} is not a multiple of 1/{N}")
    return int(s)


def heisenberg_act(r, s, t, F: QHMElement) -> QHMElement:
    """``alpha_(r,s,t)(F)(x,y,p) = e(p (t + c s (x - r))) F(x - r, y - s, p)``."""
    P = F.params
    sx, sy = _grid_steps(r, P.N, "r"), _grid_steps(s, P.N, "s")
    x = np.arange(P.N) / P.N
    out = np.empty_like(F.values)
    for p in P.degrees:
        phase = e(p * (float(t) + P.c * float(s) * (x - float(r))))
        out[p + P.K] = phase[:, None] * F.shifted(p, sx, sy)
    return QHMElement(P, out, F.lossy)


def qhm_trace(F: QHMElement) -> complex:
    return complex(F.slice(0).mean())


# -- frame ---------------------------------------------------------------------------

def _smooth_step(t):
    t = np.clip(t, 0.0, 1.0)
    f = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    g = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return f / (f + g)


def frame_angle(x):
    """Angle ``theta`` with ``chi_1 = cos theta`` and ``chi_2 = sin theta``:
    0 on ``[-1/6, 1/6]``, ``pi/2`` on ``[1/3, 2/3]`` and smooth in between."""
    u = np.mod(x, 1.0)
    up = _smooth_step((u - 1 / 6) * 6)
    down = _smooth_step((u - 2 / 3) * 6)
    return 0.5 * np.pi * (up - down)


def chi(x):
    th = frame_angle(x)
    return np.cos(th), np.sin(th)


def qhm_frame(params: QHMParams):
    """The degree-one pair ``(xi_1, xi_2)`` with ``xi_1* xi_1 + xi_2* xi_2 = 1``."""
    if params.N < 12:
        raise ValueError("the frame needs N >= 12 to resolve its plateaus")
    if params.K < 1:
        raise ValueError("the frame lives in degree one; K >= 1 is required")
    x, y = params.grid()
    c1, c2 = chi(x)
    # xi_1 is defined by chi_1 on [-1/2, 1/2); on [1/2, 1) that is the
    # quasi-periodic translate of its values on [-1/2, 0).
    xi1 = np.where(x >= 0.5, e(params.c * y) * c1, c1)
    return (QHMElement.from_slices(params, {1: xi1}), QHMElement.from_slices(params, {1: c2}))


# -- derivations -------------------------------------------------------------------

def _spectral(values, axis):
    N = values.shape[axis]
    k = np.fft.fftfreq(N, 1.0 / N)
    shape = [1] * values.ndim
    shape[axis] = N
    return np.fft.ifft(np.fft.fft(values, axis=axis) * (2j * np.pi * k).reshape(shape), axis=axis)


def _central(F: QHMElement, p, axis):
    N = F.params.N
    def at(step):
        return F.shifted(p, -step, 0) if axis == 0 else F.shifted(p, 0, -step)
    return (-at(2) + 8 * at(1) - 8 * at(-1) + at(-2)) * (N / 12.0)


def qhm_derive(j: int, F: QHMElement) -> QHMElement:
    """Infinitesimal Heisenberg generators: ``d_1 = d/dx``,
    ``d_2 = d/dy - 2 pi i c p x`` and ``d_3 = 2 pi i p``.

    Spectral for ``c = 0``; fourth-order central differences otherwise.
    """
    P = F.params
    if j == 2:
        return QHMElement(P, F.values * (2j * np.pi * P.degrees)[:, None, None], F.lossy)
    if j not in (0, 1):
        raise IndexError("derivation index must be 0, 1 or 2")
    if P.c == 0:
        return QHMElement(P, _spectral(F.values, 1 + j), F.lossy)
    out = np.stack([_central(F, p, j) for p in P.degrees])
    if j == 1:
        x = np.arange(P.N) / P.N
        out = out - 2j * np.pi * P.c * P.degrees[:, None, None] * x[None, :, None] * F.values
    return QHMElement(P, out, F.lossy)


class QHMModule:
    """The degree-one bimodule ``<xi, eta>_B = xi* eta``, ``_B<xi, eta> = xi eta*``."""

    def __init__(self, params):
        self.params = params

    def inner_right(self, xi, eta):
        return qhm_star(xi) * eta

    def inner_left(self, xi, eta):
        return xi * qhm_star(eta)

    def act_left(self, b, xi):
        return b * xi

    def act_right(self, xi, b):
        return xi * b

    def derive(self, j, b):
        return qhm_derive(j, b)


class QHMConnexion:
    """``nabla_j = d_j`` for ``j = 1, 2``."""

    n = 2

    def apply(self, j, xi):
        return qhm_derive(j, xi)


def qhm_connexion():
    return QHMConnexion()


def heisenberg_defect(F: QHMElement) -> float:
    """``max |[d_1, d_2] F + c d_3 F|``."""
    c = F.params.c
    comm = qhm_derive(0, qhm_derive(1, F)) - qhm_derive(1, qhm_derive(0, F))
    return float(np.abs((comm + c * qhm_derive(2, F)).values).max())


# -- sample elements ------------------------------------------------------------------

def random_element(params, rng, band=2, degrees=None, width=0.25):
    """A smooth random element.

    For ``c = 0`` every slice is a trigonometric polynomial of radius
    ``band``. Otherwise degree ``p != 0`` slices are theta sums
    ``sum_n g(x + n) e(-c p n y)`` of a Gaussian ``g`` times low ``y``-modes,
    which satisfy the quasi-periodicity exactly.
    """
    degrees = params.degrees if degrees is None else degrees
    ks = np.arange(-band, band + 1)
    slices = {}
    x, y = params.grid()
    for p in degrees:
        coef = (rng.standard_normal((len(ks), len(ks))) + 1j * rng.standard_normal((len(ks), len(ks))))
        coef /= len(ks)
        if params.c == 0 or p == 0:
            v = sum(coef[i, j] * e(kx * x + ky * y) for i, kx in enumerate(ks) for j, ky in enumerate(ks))
        else:
            x0 = rng.uniform(0, 1)
            theta = sum(np.exp(-0.5 * ((x - x0 + n) / width) ** 2) * e(-params.c * p * n * y)
                        for n in range(-4, 5))
            v = theta * sum(coef[0, j] * e(ky * y) for j, ky in enumerate(ks))
        slices[int(p)] = v
    return QHMElement.from_slices(params, slices)


# -- binary format ---------------------------------------------------------------------

def write_element(path, F: QHMElement):
    P = F.params
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, P.c, P.mu.numerator, P.mu.denominator,
                             P.nu.numerator, P.nu.denominator, P.N, P.K))
        fh.write(np.ascontiguousarray(F.values, dtype="<c16").tobytes())


def read_element(path) -> QHMElement:
    with open(path, "rb") as fh:
        head = fh.read(HEADER.size)
        if len(head) != HEADER.size:
            raise ValueError("truncated QHM header")
        magic, c, mn, md, nn, nd, N, K = HEADER.unpack(head)
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        params = QHMParams(c, Fraction(mn, md), Fraction(nn, nd), N, K)
        count = (2 * K + 1) * N * N
        data = np.frombuffer(fh.read(), dtype="<c16")
    if data.size != count:
        raise ValueError(f"expected {count} complex values, found {data.size}")
    return QHMElement(params, data.reshape(2 * K + 1, N, N).astype(complex))


# -- crossed-product adapter ------------------------------------------------------------

class QHMAdapter:
    """Identifies the ``c = 0`` grid algebra with the crossed product of B by
    the line-bundle module twisted by ``sigma(b) = b(. - 2 (mu, nu))``.

    A degree ``p > 0`` slice ``F_p`` corresponds to the coordinate
    ``F_p(x + p (mu, nu))``; a degree ``-p`` slice to the stored coordinate
    ``conj(F_{-p}(x + p (mu, nu)))`` of ``S(eta)*``. Slices must be
    band-limited below ``N / 2``.
    """

    def __init__(self, params: QHMParams, frame="unit"):
        if params.c != 0:
            raise ValueError("the Fourier-side adapter only covers c = 0; use the grid model")
        self.params = params
        shift = (-2 * params.mu, -2 * params.nu)
        if frame == "unit":
            self.module = Bimodule.trivial(2, shift)
        elif frame == "trig":
            self.module = Bimodule.trig(shift)
        else:
            raise ValueError(f"unknown frame {frame!r}")
        self.frame = frame
        self._emb = {}

    def connexion(self):
        return grassmann(self.module)

    def embedding(self, p):
        """Coordinates of the image of ``1`` in the ``p``-th tensor power."""
        if p not in self._emb:
            E = self.module
            if p == 0 or self.frame == "unit":
                u = np.ones((1, 1, 1), dtype=complex)
            elif p == 1:
                u = _frame_vector()
            else:
                u = tensor_coords(_frame_vector(), self.embedding(p - 1), E, p - 1)
            self._emb[p] = u
        return self._emb[p]

    def to_graded(self, F: QHMElement, K=None) -> GradedElement:
        P = self.params
        K = P.K if K is None else K
        parts = {}
        for p in F.support():
            k = abs(p)
            vals = F.shifted(p, -k * P.mu_steps, -k * P.nu_steps)
            if p < 0:
                vals = np.conj(vals)
            c = FourierElement.from_grid(vals).coeffs
            # drop FFT roundoff so the support radius reflects the band limit
            tol = 1e-13 * max(1.0, float(np.abs(c).max(initial=0.0)))
            c = np.where(np.abs(c) > tol, c, 0)
            parts[p] = self._lift(trim_coeffs(c, 2), k)
        return GradedElement(self.module, parts, K)

    def _lift(self, c, k):
        if k == 0 or self.frame == "unit":
            return c[None]
        return product_coeffs(self.embedding(k), c[None], 2)

    def _lower(self, v, k):
        if k == 0 or self.frame == "unit":
            return v[0]
        return product_coeffs(reflect_conj(self.embedding(k), 2), v, 2).sum(axis=0)

    def from_graded(self, G: GradedElement) -> QHMElement:
        P = self.params
        slices = {}
        for p, v in G.parts.items():
            k = abs(p)
            c = FourierElement(2, self._lower(v, k))
            vals = c.on_grid(P.N)
            if p < 0:
                vals = np.conj(vals)
            tmp = QHMElement.from_slices(P, {p: vals})
            slices[p] = tmp.shifted(p, k * P.mu_steps, k * P.nu_steps)
        return QHMElement.from_slices(P, slices)


def _frame_vector():
    """The generators ``(cos 2 pi x, sin 2 pi x)`` as coordinates of ``E``."""
    c = FourierElement.from_terms({(1, 0): 0.5, (-1, 0): 0.5}).coeffs
    s = FourierElement.from_terms({(1, 0): -0.5j, (-1, 0): 0.5j}).coeffs
    return np.stack([c, s])


def qhm_as_gcp(params: QHMParams, frame="unit") -> QHMAdapter:
    return QHMAdapter(params, frame)
