"""Truncated operators on block-structured finite Hilbert spaces.

Every Hilbert space in the package is a direct sum indexed by
``(copy, degree, frame index, Fourier mode, spinor index)`` in that order.
The base space ``H = l2(Z^n) (x) S`` is the special case with a single
degree 0 and a single frame slot.
"""
from __future__ import annotations

from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from itertools import product

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.sparse.csgraph import connected_components


DENSE_NORM_LIMIT = 800


@dataclass(frozen=True)
class Basis:
    n: int
    M: int
    dim_s: int
    degrees: tuple = (0,)
    frame_sizes: tuple = (1,)
    copies: int = 1

    def __post_init__(self):
        if len(self.degrees) != len(self.frame_sizes):
            raise ValueError("one frame size per degree is required")
        if self.M < 0:
            raise ValueError("Fourier cutoff must be nonnegative")

    @classmethod
    def base(cls, n, M, dim_s):
        return cls(n=n, M=M, dim_s=dim_s)

    @cached_property
    def nmodes(self):
        return (2 * self.M + 1) ** self.n

    @cached_property
    def modes(self):
        """Lattice points ``|k|_inf <= M`` in lexicographic order, shape (nmodes, n)."""
        r = range(-self.M, self.M + 1)
        return np.array(list(product(r, repeat=self.n)), dtype=int).reshape(-1, self.n)

    @cached_property
    def _offsets(self):
        offs = {}
        pos = 0
        for c in range(self.copies):
            for d, m in zip(self.degrees, self.frame_sizes):
                offs[(c, d)] = pos
                pos += m * self.nmodes * self.dim_s
        return offs, pos

    @property
    def dim(self):
        return self._offsets[1]

    def start(self, degree, copy=0, frame=0):
        return self._offsets[0][(copy, degree)] + frame * self.nmodes * self.dim_s

    def frame_size(self, degree):
        return self.frame_sizes[self.degrees.index(degree)]

    @cached_property
    def labels(self):
        """Integer labels, columns ``copy, degree, frame, spinor, mode_1..mode_n``."""
        out = np.zeros((self.dim, 4 + self.n), dtype=int)
        modes = np.repeat(self.modes, self.dim_s, axis=0)
        spin = np.tile(np.arange(self.dim_s), self.nmodes)
        for c in range(self.copies):
            for d, m in zip(self.degrees, self.frame_sizes):
                for f in range(m):
                    s = self.start(d, c, f)
                    e = s + self.nmodes * self.dim_s
                    out[s:e, 0] = c
                    out[s:e, 1] = d
                    out[s:e, 2] = f
                    out[s:e, 3] = spin
                    out[s:e, 4:] = modes
        return out

    def window(self, mode_radius, degree_radius=None):
        """Boolean mask of basis vectors with ``|k|_inf <= mode_radius`` and
        ``|degree| <= degree_radius``."""
        lab = self.labels
        mask = np.abs(lab[:, 4:]).max(axis=1, initial=0) <= mode_radius
        if degree_radius is not None:
            mask &= np.abs(lab[:, 1]) <= degree_radius
        return mask

    def doubled(self):
        return Basis(self.n, self.M, self.dim_s, self.degrees, self.frame_sizes, 2 * self.copies)


@dataclass(frozen=True)
class TruncatedOperator:
    matrix: sp.csr_matrix
    rows: Basis
    cols: Basis
    cutoff: tuple = (0, 0)
    selfadjoint: bool = False
    lossy: bool = False

    def __post_init__(self):
        if self.matrix.shape != (self.rows.dim, self.cols.dim):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match basis dims "
                f"({self.rows.dim}, {self.cols.dim})")

    @property
    def shape(self):
        return self.matrix.shape

    def dense(self):
        return self.matrix.toarray()

    def _new(self, matrix, rows=None, cols=None, selfadjoint=False, lossy=None):
        return TruncatedOperator(
            sp.csr_matrix(matrix), rows or self.rows, cols or self.cols, self.cutoff,
            selfadjoint, self.lossy if lossy is None else lossy)

    def adjoint(self):
        return TruncatedOperator(
            sp.csr_matrix(self.matrix.conj().T), self.cols, self.rows, self.cutoff,
            self.selfadjoint, self.lossy)

    def __add__(self, other):
        return self._new(self.matrix + other.matrix,
                         selfadjoint=self.selfadjoint and other.selfadjoint,
                         lossy=self.lossy or other.lossy)

    def __sub__(self, other):
        return self._new(self.matrix - other.matrix,
                         selfadjoint=self.selfadjoint and other.selfadjoint,
                         lossy=self.lossy or other.lossy)

    def __neg__(self):
        return self._new(-self.matrix, selfadjoint=self.selfadjoint)

    def __mul__(self, c):
        return self._new(c * self.matrix, selfadjoint=self.selfadjoint and np.isreal(c))

    __rmul__ = __mul__

    def __matmul__(self, other):
        return TruncatedOperator(
            sp.csr_matrix(self.matrix @ other.matrix), self.rows, other.cols, self.cutoff,
            False, self.lossy or other.lossy)

    def hermitian_defect(self):
        d = self.matrix - self.matrix.conj().T
        return float(abs(d).max()) if d.nnz else 0.0

    def sectors(self):
        """Connected components of the sparsity graph (square operators only)."""
        if self.rows != self.cols:
            raise ValueError("sectors are only defined for operators on one space")
        pattern = abs(self.matrix) + abs(self.matrix.T)
        ncomp, comp = connected_components(pattern, directed=False)
        groups = defaultdict(list)
        for i, c in enumerate(comp):
            groups[c].append(i)
        return [np.array(groups[c]) for c in range(ncomp)]

    def blocks(self):
        dense_rows = self.matrix.tocsr()
        return [(idx, dense_rows[idx][:, idx].toarray()) for idx in self.sectors()]

    def restricted(self, row_mask=None, col_mask=None):
        """Dense submatrix on the selected rows and columns."""
        m = self.matrix
        if row_mask is not None:
            m = m[np.flatnonzero(row_mask)]
        if col_mask is not None:
            m = m.tocsc()[:, np.flatnonzero(col_mask)]
        return m.toarray()


def window_norm(op: TruncatedOperator, col_mask) -> float:
    """Operator norm of ``op`` applied to vectors supported on ``col_mask``.

    Rows are not restricted, so no output component is discarded.
    """
    a = op.matrix.tocsc()[:, np.flatnonzero(col_mask)]
    if a.shape[1] == 0 or a.nnz == 0:
        return 0.0
    g = (a.conj().T @ a).tocsr()
    if g.shape[0] <= DENSE_NORM_LIMIT:
        top = np.linalg.eigvalsh(g.toarray())[-1]
    else:
        top = spla.eigsh(g, k=1, which="LA", tol=1e-13, return_eigenvectors=False)[0]
    return float(np.sqrt(max(top, 0.0)))


def interior_residual(a: TruncatedOperator, b: TruncatedOperator, row_mask, col_mask) -> float:
    d = (a.matrix - b.matrix).tocsr()[np.flatnonzero(row_mask)].tocsc()[:, np.flatnonzero(col_mask)]
    return float(abs(d).max()) if d.nnz else 0.0


def _check_selfadjoint(op, tol):
    defect = op.hermitian_defect()
    scale = max(1.0, float(abs(op.matrix).max()) if op.matrix.nnz else 1.0)
    if defect > tol * scale:
        raise ValueError(f"operator is not selfadjoint (defect {defect:.3e})")


def eigensystem(op: TruncatedOperator, vectors=False, workers=1, tol=1e-10):
    """Per-sector Hermitian eigensolve.

    Sectors of equal size are stacked and diagonalised in one batched call.
    Returns ``(eigenvalues, sector_of_eigenvalue)`` and, if ``vectors`` is set,
    also the basis index carrying the largest weight of each eigenvector.
    """
    _check_selfadjoint(op, tol)
    a = op.matrix.tocsr()
    a = (a + a.conj().T) * 0.5
    by_size = defaultdict(list)
    for idx in op.sectors():
        by_size[len(idx)].append(idx)

    def solve(size):
        idxs = np.array(by_size[size])
        stack = np.stack([a[i][:, i].toarray() for i in idxs])
        if vectors:
            w, v = np.linalg.eigh(stack)
            lead = np.argmax(np.abs(v) ** 2, axis=1)
            lead = np.take_along_axis(idxs, lead, axis=1)
            return idxs, w, lead
        return idxs, np.linalg.eigvalsh(stack), None

    sizes = sorted(by_size)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(solve, sizes))
    else:
        results = [solve(s) for s in sizes]

    evals, sector, leads = [], [], []
    for idxs, w, lead in results:
        evals.append(w.ravel())
        sector.append(np.repeat(idxs[:, 0], idxs.shape[1]))
        if lead is not None:
            leads.append(lead.ravel())
    evals = np.concatenate(evals)
    sector = np.concatenate(sector)
    order = np.lexsort((sector, evals))
    if vectors:
        return evals[order], sector[order], np.concatenate(leads)[order]
    return evals[order], sector[order]


def spectrum(op: TruncatedOperator, workers=1) -> np.ndarray:
    """Sorted eigenvalues (with multiplicity) of a selfadjoint operator."""
    return eigensystem(op, workers=workers)[0]


def heat_trace(op_or_eigs, ts) -> np.ndarray:
    """``sum_lambda exp(-t lambda^2)`` for every ``t`` in ``ts``."""
    eigs = spectrum(op_or_eigs) if isinstance(op_or_eigs, TruncatedOperator) else np.asarray(op_or_eigs)
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if np.any(ts <= 0):
        raise ValueError("heat trace times must be positive")
    return np.exp(-np.outer(ts, eigs ** 2)).sum(axis=1)


def counting_function(eigs, lams) -> np.ndarray:
    a = np.sort(np.abs(np.asarray(eigs)))
    return np.searchsorted(a, np.asarray(lams), side="right")


def weyl_exponent(eigs, lam_max, octaves=1.0, samples=40) -> float:
    """Least-squares slope of ``log N(lambda)`` against ``log lambda``.

    The fit uses the top ``octaves`` below ``lam_max``, which should be the
    largest value at which the truncation still contains the whole
    eigenvalue ball.
    """
    lams = np.geomspace(lam_max * 2.0 ** (-octaves), lam_max, samples)
    counts = counting_function(eigs, lams)
    return float(np.polyfit(np.log(lams), np.log(counts), 1)[0])


def growth_report(eigs) -> dict:
    """Eigenvalue growth statistics; informational only."""
    a = np.sort(np.abs(np.asarray(eigs)))
    return {
        "dimension": int(a.size),
        "kernel": int(np.sum(a < 1e-9)),
        "max_abs": float(a[-1]) if a.size else 0.0,
        "median_abs": float(np.median(a)) if a.size else 0.0,
    }


def block_diag_operator(basis: Basis, blocks: dict, cutoff=(0, 0), selfadjoint=False):
    """Assemble an operator from ``{(row_degree, col_degree): sparse block}``."""
    rows, cols, vals = [], [], []
    for (dr, dc), blk in blocks.items():
        coo = sp.coo_matrix(blk)
        rows.append(coo.row + basis.start(dr))
        cols.append(coo.col + basis.start(dc))
        vals.append(coo.data)
    if rows:
        m = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(basis.dim, basis.dim))
    else:
        m = sp.csr_matrix((basis.dim, basis.dim), dtype=complex)
    return TruncatedOperator(m, basis, basis, cutoff, selfadjoint)
