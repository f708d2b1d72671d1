"""Trigonometric polynomials on the n-torus and their truncated representation.

Coefficient arrays are dense and centred: an array of radius ``R`` has
shape ``(..., 2R+1, ..., 2R+1)`` with the lattice point ``k`` stored at
index ``k + R``. Leading axes (if any) are batch axes, which is how vectors
and matrices over the algebra are stored elsewhere in the package.
The character ``e_k`` is ``x -> exp(2 pi i k.x)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.signal import fftconvolve

from .clifford import CliffordRep
from .operators import Basis, TruncatedOperator, window_norm

TWO_PI_I = 2j * np.pi
_DIRECT_LIMIT = 48


# -- coefficient-array helpers ------------------------------------------------

def radius(a, n):
    return (a.shape[-1] - 1) // 2


def pad_to(a, R, n):
    r = radius(a, n)
    if R == r:
        return a
    if R < r:
        raise ValueError("cannot pad to a smaller radius")
    w = [(0, 0)] * (a.ndim - n) + [(R - r, R - r)] * n
    return np.pad(a, w)


def common_radius(arrays, n):
    R = max(radius(a, n) for a in arrays)
    return [pad_to(a, R, n) for a in arrays]


def convolve(a, b, n):
    """Coefficient convolution (pointwise product) over the last ``n`` axes,
    broadcasting the leading axes."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    lat = tuple(range(-n, 0))
    nz_a = np.argwhere(np.abs(a).reshape((-1,) + a.shape[-n:]).max(axis=0) > 0)
    nz_b = np.argwhere(np.abs(b).reshape((-1,) + b.shape[-n:]).max(axis=0) > 0)
    if min(len(nz_a), len(nz_b)) > _DIRECT_LIMIT:
        return fftconvolve(a, b, axes=lat)
    if len(nz_b) < len(nz_a):
        a, b, nz_a = b, a, nz_b
    lead = np.broadcast_shapes(a.shape[:-n], b.shape[:-n])
    size = a.shape[-1] + b.shape[-1] - 1
    out = np.zeros(lead + (size,) * n, dtype=complex)
    nb = b.shape[-1]
    for pos in nz_a:
        sl = tuple(slice(p, p + nb) for p in pos)
        coef = a[(Ellipsis,) + tuple(pos)]
        out[(Ellipsis,) + sl] += coef[(Ellipsis,) + (None,) * n] * b
    return out


def reflect_conj(a, n):
    """``k -> conj(a(-k))`` on the last ``n`` axes."""
    return np.conj(np.flip(a, axis=tuple(range(-n, 0))))


def _lattice_grid(R, n):
    r = np.arange(-R, R + 1)
    return np.meshgrid(*([r] * n), indexing="ij")


def derive_coeffs(a, j, n):
    """``d/dx_j``: multiplies the coefficient at ``k`` by ``2 pi i k_j``."""
    k = _lattice_grid(radius(a, n), n)[j]
    return a * (TWO_PI_I * k)


def twist_coeffs(a, shift, power, n):
    """Apply ``sigma^power`` where ``sigma(e_k) = e(k.shift) e_k``."""
    if power == 0 or not any(shift):
        return a
    grid = _lattice_grid(radius(a, n), n)
    phase = sum(float(s) * g for s, g in zip(shift, grid))
    return a * np.exp(TWO_PI_I * power * phase)


def trim_coeffs(a, n, tol=0.0):
    """Drop outer shells whose coefficients are all at most ``tol``."""
    flat = np.abs(a).reshape((-1,) + a.shape[-n:]).max(axis=0)
    while flat.shape[0] > 1:
        inner = np.zeros(flat.shape, dtype=bool)
        inner[(slice(1, -1),) * n] = True
        if np.any(flat[~inner] > tol):
            break
        flat = flat[(slice(1, -1),) * n]
        a = a[(Ellipsis,) + (slice(1, -1),) * n]
    return a


# -- elements -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FourierElement:
    """A trigonometric polynomial ``sum_k c_k e_k`` on the n-torus."""

    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != self.n or len(set(c.shape)) > 1 or c.shape[0] % 2 == 0:
            raise ValueError("coefficients must be a centred cube of odd side")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_terms(cls, terms, n=None):
        terms = {tuple(int(v) for v in np.atleast_1d(k)): complex(c) for k, c in dict(terms).items()}
        if n is None:
            if not terms:
                raise ValueError("cannot infer the torus dimension from an empty map")
            n = len(next(iter(terms)))
        R = max((max(abs(v) for v in k) for k in terms), default=0)
        a = np.zeros((2 * R + 1,) * n, dtype=complex)
        for k, c in terms.items():
            if len(k) != n:
                raise ValueError("lattice point dimension mismatch")
            a[tuple(v + R for v in k)] += c
        return cls(n, a)

    @classmethod
    def unit(cls, n):
        return cls(n, np.ones((1,) * n, dtype=complex))

    @classmethod
    def zero(cls, n):
        return cls(n, np.zeros((1,) * n, dtype=complex))

    @classmethod
    def character(cls, k, c=1.0):
        k = tuple(int(v) for v in np.atleast_1d(k))
        return cls.from_terms({k: c}, len(k))

    @classmethod
    def random(cls, n, R, rng, scale=1.0):
        shape = (2 * R + 1,) * n
        return cls(n, scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2))

    @property
    def radius(self):
        return radius(self.coeffs, self.n)

    def support_radius(self):
        return radius(trim_coeffs(self.coeffs, self.n), self.n) if np.any(self.coeffs) else 0

    def terms(self, tol=0.0):
        R = self.radius
        return {tuple(int(i) - R for i in idx): complex(self.coeffs[tuple(idx)])
                for idx in np.argwhere(np.abs(self.coeffs) > tol)}

    def coeff(self, k):
        R = self.radius
        k = tuple(int(v) for v in np.atleast_1d(k))
        if max(abs(v) for v in k) > R:
            return 0j
        return complex(self.coeffs[tuple(v + R for v in k)])

    def padded(self, R):
        return pad_to(self.coeffs, R, self.n)

    def _check(self, other):
        if not isinstance(other, FourierElement):
            raise TypeError(f"expected FourierElement, got {type(other).__name__}")
        if other.n != self.n:
            raise ValueError(f"torus dimension mismatch: {self.n} vs {other.n}")

    def __add__(self, other):
        self._check(other)
        a, b = common_radius([self.coeffs, other.coeffs], self.n)
        return FourierElement(self.n, a + b)

    def __sub__(self, other):
        self._check(other)
        a, b = common_radius([self.coeffs, other.coeffs], self.n)
        return FourierElement(self.n, a - b)

    def __neg__(self):
        return FourierElement(self.n, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, FourierElement):
            return multiply(self, other)
        return FourierElement(self.n, self.coeffs * complex(other))

    def __rmul__(self, c):
        return FourierElement(self.n, self.coeffs * complex(c))

    def star(self):
        return star(self)

    def twist(self, shift, power=1):
        return FourierElement(self.n, twist_coeffs(self.coeffs, shift, power, self.n))

    def trimmed(self, tol=0.0):
        return FourierElement(self.n, trim_coeffs(self.coeffs, self.n, tol))

    def max_abs_diff(self, other):
        a, b = common_radius([self.coeffs, other.coeffs], self.n)
        return float(np.abs(a - b).max(initial=0.0))

    def is_selfadjoint(self, tol=0.0):
        return self.max_abs_diff(star(self)) <= tol

    def evaluate(self, *coords):
        """Values at points; ``coords`` are n broadcastable coordinate arrays."""
        R = self.radius
        out = np.zeros(np.broadcast_shapes(*[np.shape(c) for c in coords]), dtype=complex)
        for idx in np.argwhere(self.coeffs != 0):
            k = idx - R
            out += self.coeffs[tuple(idx)] * np.exp(TWO_PI_I * sum(kj * c for kj, c in zip(k, coords)))
        return out

    def on_grid(self, N):
        """Samples at ``x = i/N`` for ``i`` in ``[0, N)`` along every axis."""
        x = np.arange(N) / N
        return self.evaluate(*np.meshgrid(*([x] * self.n), indexing="ij"))

    @classmethod
    def from_grid(cls, values):
        """Inverse of :meth:`on_grid` for data band-limited to ``|k|_inf < N/2``."""
        values = np.asarray(values, dtype=complex)
        n = values.ndim
        N = values.shape[0]
        R = (N - 1) // 2
        f = np.fft.fftn(values) / N ** n
        f = np.fft.fftshift(f)
        c0 = N // 2
        sl = (slice(c0 - R, c0 + R + 1),) * n
        return cls(n, f[sl])

    def __repr__(self):
        terms = self.terms()
        body = ", ".join(f"{k}: {v:.6g}" for k, v in sorted(terms.items()))
        return f"FourierElement(n={self.n}, {{{body}}})"


def multiply(a: FourierElement, b: FourierElement) -> FourierElement:
    a._check(b)
    return FourierElement(a.n, convolve(a.coeffs, b.coeffs, a.n))


def star(a: FourierElement) -> FourierElement:
    return FourierElement(a.n, reflect_conj(a.coeffs, a.n))


def derive(j: int, a: FourierElement) -> FourierElement:
    """The derivation ``d_j`` (zero-based axis index)."""
    if not 0 <= j < a.n:
        raise IndexError(f"axis {j} out of range for a {a.n}-torus")
    return FourierElement(a.n, derive_coeffs(a.coeffs, j, a.n))


def shift_vector(*parts):
    """Exact rational shift vector from numbers or ``'a/b'`` strings."""
    return tuple(Fraction(p) for p in parts)


# -- truncated representation ---------------------------------------------------

def mult_coo(coeffs, M, n):
    """COO triplets of convolution by ``coeffs`` on ``{e_k : |k|_inf <= M}``."""
    side = 2 * M + 1
    modes = Basis.base(n, M, 1).modes
    src = np.arange(len(modes))
    R = radius(coeffs, n)
    rows, cols, vals = [], [], []
    for idx in np.argwhere(coeffs != 0):
        tgt = modes + (idx - R)
        ok = np.all(np.abs(tgt) <= M, axis=1)
        if not ok.any():
            continue
        rows.append(np.ravel_multi_index(tuple((tgt[ok] + M).T), (side,) * n))
        cols.append(src[ok])
        vals.append(np.full(ok.sum(), coeffs[tuple(idx)]))
    if not rows:
        empty = np.zeros(0, dtype=int)
        return empty, empty, np.zeros(0, dtype=complex)
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


def mult_matrix(coeffs, M, n):
    """Sparse matrix of convolution by ``coeffs`` on ``{e_k : |k|_inf <= M}``."""
    r, c, v = mult_coo(coeffs, M, n)
    size = (2 * M + 1) ** n
    return sp.csr_matrix((v, (r, c)), shape=(size, size))


def represent(a: FourierElement, M: int, dim_s: int = 1) -> TruncatedOperator:
    """Left multiplication by ``a`` on the truncated GNS space (tensor ``Id_S``)."""
    basis = Basis.base(a.n, M, dim_s)
    m = sp.kron(mult_matrix(a.coeffs, M, a.n), sp.identity(dim_s), format="csr")
    lossy = a.support_radius() > M
    return TruncatedOperator(m, basis, basis, (0, M), a.is_selfadjoint(1e-14), lossy)


def derivation_diag(M, n, j):
    modes = Basis.base(n, M, 1).modes
    return sp.diags(TWO_PI_I * modes[:, j])


def dirac_h(M: int, cl: CliffordRep, n: int | None = None) -> TruncatedOperator:
    """``sum_j d_j (x) gamma_j`` on the truncated ``l2(Z^n) (x) S``."""
    n = cl.n if n is None else n
    if cl.n != n:
        raise ValueError("Clifford module must have one generator per torus direction")
    basis = Basis.base(n, M, cl.dim_s)
    m = sum(sp.kron(derivation_diag(M, n, j), sp.csr_matrix(cl.gammas[j])) for j in range(n))
    return TruncatedOperator(sp.csr_matrix(m), basis, basis, (0, M), True)


def dirac_closed_form(M, n):
    """``{+-2 pi |k| : |k|_inf <= M}`` with multiplicity for the minimal module."""
    modes = Basis.base(n, M, 1).modes
    r = 2 * np.pi * np.linalg.norm(modes, axis=1)
    half = 2 ** ((n + 1) // 2) // 2
    return np.sort(np.concatenate([np.repeat(r, half), np.repeat(-r, half)]))


def commutator(D: TruncatedOperator, a: FourierElement) -> TruncatedOperator:
    """Matrix commutator ``[D, pi(a)]`` at the cutoff of ``D``."""
    A = represent(a, D.rows.M, D.rows.dim_s)
    return D @ A - A @ D


def commutator_formula(a: FourierElement, M: int, cl: CliffordRep) -> TruncatedOperator:
    """``sum_j pi(d_j a) (x) gamma_j``."""
    basis = Basis.base(a.n, M, cl.dim_s)
    m = sum(sp.kron(mult_matrix(derive(j, a).coeffs, M, a.n), sp.csr_matrix(cl.gammas[j]))
            for j in range(a.n))
    return TruncatedOperator(sp.csr_matrix(m), basis, basis, (0, M))


def interior_mask(basis: Basis, reach: int):
    """Basis vectors at distance more than ``reach`` from the cutoff boundary."""
    return basis.window(basis.M - reach)


def commutator_norms(a: FourierElement, cl: CliffordRep, cutoffs):
    """Norm of ``[D_h, a]`` on the interior window of the smallest cutoff."""
    r = a.support_radius()
    w = min(cutoffs) - r
    if w < 0:
        raise ValueError("smallest cutoff does not contain the support of the element")
    out = []
    for M in cutoffs:
        C = commutator(dirac_h(M, cl), a)
        out.append(window_norm(C, C.cols.window(w)))
    return out


def norm1(a: FourierElement, M: int, cl: CliffordRep) -> float:
    """Norm of ``[[pi(a), 0], [[D_h, a], pi(a)]]`` at cutoff ``M``."""
    A = represent(a, M, cl.dim_s).matrix
    C = commutator(dirac_h(M, cl), a).matrix
    rho = sp.bmat([[A, None], [C, A]], format="csr")
    g = (rho.conj().T @ rho).tocsc()
    if g.shape[0] <= 1200:
        top = np.linalg.eigvalsh(g.toarray())[-1]
    else:
        top = spla.eigsh(g, k=1, which="LA", tol=1e-13, return_eigenvectors=False)[0]
    return float(np.sqrt(max(top, 0.0)))


def product_coeffs(a, b, n, tol=1e-14):
    """Convolution followed by trimming of numerically empty outer shells."""
    c = convolve(a, b, n)
    scale = float(np.abs(c).max(initial=0.0))
    return trim_coeffs(c, n, tol * max(1.0, scale))


def matvec(mat, vec, n):
    """``(mat @ vec)_i = sum_j mat_ij * vec_j`` for arrays over the algebra."""
    return product_coeffs(mat, vec[None], n).sum(axis=1)
