"""
The 24-element single-qubit Clifford group as transfer matrices.

Elements are generated by breadth-first closure of the Hadamard and phase
gates starting from the identity, so indices are stable across runs. Each
unital block is a signed permutation matrix; entries are snapped to exact
integers so group bookkeeping never depends on floating-point comparisons.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Tuple

import numpy as np

from .errors import ClosureOverflow
from .superop import Superop, ptm_from_unitary

GROUP_ORDER = 24

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PHASE = np.diag([1, 1j])


def fingerprint(mat: np.ndarray) -> Tuple[int, ...]:
    """Hashable key of a Clifford transfer matrix (its rounded entries)."""
    return tuple(int(x) for x in np.rint(np.asarray(mat)).ravel())


@dataclass(frozen=True)
class CliffordGroup:
    gates: Tuple[Superop, ...]
    index: Dict[Tuple[int, ...], int]
    inverse_table: np.ndarray
    cayley: np.ndarray

    def __len__(self) -> int:
        return len(self.gates)

    def __getitem__(self, i: int) -> Superop:
        return self.gates[i]

    def __iter__(self):
        return iter(self.gates)

    @property
    def mats(self) -> np.ndarray:
        """All transfer matrices stacked, shape (24, 4, 4)."""
        return np.array([g.mat for g in self.gates])

    def lookup(self, mat) -> int:
        """Index of the element equal to ``mat`` (a Superop or array)."""
        m = mat.mat if isinstance(mat, Superop) else np.asarray(mat)
        if np.max(np.abs(m - np.rint(m))) > 1e-9:
            raise KeyError("matrix is not a Clifford transfer matrix")
        return self.index[fingerprint(m)]

    def inverse(self, i: int) -> int:
        return int(self.inverse_table[i])

    def compose_word(self, indices) -> int:
        """Index of ``g[i0] @ g[i1] @ ...`` (operator order)."""
        acc = 0
        for i in indices:
            acc = int(self.cayley[acc, i])
        return acc


def generate() -> CliffordGroup:
    """Close {H, S} under composition; raises ClosureOverflow past 24 elements."""
    gens = [np.rint(ptm_from_unitary(u).mat) for u in (HADAMARD, PHASE)]
    mats = [np.eye(4)]
    index = {fingerprint(mats[0]): 0}
    queue = [0]
    while queue:
        nxt = []
        for i in queue:
            for g in gens:
                m = g @ mats[i]
                key = fingerprint(m)
                if key in index:
                    continue
                if len(mats) >= GROUP_ORDER:
                    raise ClosureOverflow("closure of {H, S} exceeded 24 elements")
                index[key] = len(mats)
                mats.append(m)
                nxt.append(len(mats) - 1)
        queue = nxt

    n = len(mats)
    cayley = np.empty((n, n), dtype=int)
    for i, a in enumerate(mats):
        for j, b in enumerate(mats):
            cayley[i, j] = index[fingerprint(a @ b)]
    inverse_table = np.array([int(np.flatnonzero(cayley[i] == 0)[0]) for i in range(n)])
    cayley.flags.writeable = False
    inverse_table.flags.writeable = False
    gates = tuple(Superop(m) for m in mats)
    return CliffordGroup(gates, index, inverse_table, cayley)


@lru_cache(maxsize=None)
def clifford_group() -> CliffordGroup:
    """Shared, lazily generated instance of :func:`generate`."""
    return generate()


def inverse(i: int, group: CliffordGroup | None = None) -> int:
    group = group or clifford_group()
    return group.inverse(i)


def clifford_twirl(E: Superop, group: CliffordGroup | None = None) -> Superop:
    """Group average ``(1/24) sum_G G E G^dag``."""
    group = group or clifford_group()
    G = group.mats
    avg = np.einsum("kij,jl,kml->im", G, E.mat, G) / len(group)
    return Superop(avg)
