"""Finite-dimensional Clifford modules.

The generators returned here are the anti-selfadjoint operators
``gamma_j = i * e_j`` where the ``e_j`` are selfadjoint and satisfy
``e_j e_k + e_k e_j = 2 delta_jk``.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)
_I2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class CliffordRep:
    n: int
    dim_s: int
    gammas: tuple
    grading: np.ndarray | None = None

    def __post_init__(self):
        for g in self.gammas:
            g.setflags(write=False)
        if self.grading is not None:
            self.grading.setflags(write=False)

    @property
    def selfadjoint_generators(self):
        """The selfadjoint generators ``e_j = -i gamma_j``."""
        return tuple(-1j * g for g in self.gammas)


def _kron_all(mats):
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def _even_generators(m):
    # Jordan-Wigner style: sigma_z strings followed by sigma_x / sigma_y.
    gens = []
    for l in range(m):
        head = [_SZ] * l
        tail = [_I2] * (m - l - 1)
        gens.append(_kron_all(head + [_SX] + tail))
        gens.append(_kron_all(head + [_SY] + tail))
    return gens


def build_clifford(n: int) -> CliffordRep:
    """Representation of Cl(n) on C^(2^ceil(n/2)).

    For odd ``n`` the module is the restriction of the ``n + 1`` generator
    module, so no grading is attached.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"number of generators must be a positive integer, got {n!r}")
    n = int(n)
    m = (n + 1) // 2
    e = _even_generators(m)[:n]
    gammas = tuple(1j * ej for ej in e)
    grading = None
    if n % 2 == 0:
        prod = np.eye(2 ** m, dtype=complex)
        for g in gammas:
            prod = prod @ g
        grading = (1j ** (n // 2)) * prod
    return CliffordRep(n=n, dim_s=2 ** m, gammas=gammas, grading=grading)


def check_relations(rep: CliffordRep) -> float:
    """Largest operator-norm residual over all defining relations."""
    eye = np.eye(rep.dim_s)
    dev = 0.0
    for j, gj in enumerate(rep.gammas):
        dev = max(dev, np.linalg.norm(gj.conj().T + gj, 2))
        for k, gk in enumerate(rep.gammas):
            target = -2.0 * eye if j == k else 0.0 * eye
            dev = max(dev, np.linalg.norm(gj @ gk + gk @ gj - target, 2))
    if rep.grading is not None:
        g = rep.grading
        dev = max(dev, np.linalg.norm(g @ g - eye, 2))
        dev = max(dev, np.linalg.norm(g.conj().T - g, 2))
        for gj in rep.gammas:
            dev = max(dev, np.linalg.norm(g @ gj + gj @ g, 2))
    return float(dev)


def words(rep: CliffordRep, max_length: int):
    """All products of generators of length 1..max_length, with their lengths."""
    for length in range(1, max_length + 1):
        for idx in product(range(rep.n), repeat=length):
            w = np.eye(rep.dim_s, dtype=complex)
            for i in idx:
                w = w @ rep.gammas[i]
            yield length, w
