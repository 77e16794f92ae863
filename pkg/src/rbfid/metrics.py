"""Average gate and gate-set fidelity."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch, LengthMismatch
from .superop import Superop


@dataclass(frozen=True)
class FidelityReport:
    q_per_gate: List[float]
    q_avg: float
    F_avg: float
    epsilon: float
    d: int

    def to_dict(self) -> dict:
        return asdict(self)


def twirl_parameters(E: Superop) -> Tuple[float, float]:
    """``(t(E), q(E))``: trace factor ``tr(E(1))/d`` and ``Tr(E_u)/D``."""
    return float(E.mat[0, 0]), float(np.trace(E.unital) / E.D)


def twirl_analytic(E: Superop) -> Superop:
    """Unitary twirl ``t(E) B_00 + sqrt(D) q(E) B_11``."""
    t, q = twirl_parameters(E)
    return Superop(np.diag([t] + [q] * E.D))


def gate_q(G: Superop, noisy: Superop) -> float:
    """``Tr((G^dag G~)_u) / D``."""
    if G.mat.shape != noisy.mat.shape:
        raise DimensionMismatch("ideal and noisy gate have different dimensions")
    return float(np.sum(G.unital * noisy.unital) / G.D)


def average_fidelity(q: float, d: int = 2) -> float:
    return ((d - 1) * q + 1) / d


def gateset_q(cliffords: Sequence[Superop], noisy: Sequence[Superop], side: str = "right") -> float:
    """Gate-set average of q from right residues ``G^dag G~`` or left ``G~ G^dag``."""
    if len(cliffords) != len(noisy):
        raise LengthMismatch(f"{len(cliffords)} ideal gates vs {len(noisy)} noisy gates")
    if side == "right":
        vals = [np.trace((g.mat.T @ n.mat)[1:, 1:]) for g, n in zip(cliffords, noisy)]
    elif side == "left":
        vals = [np.trace((n.mat @ g.mat.T)[1:, 1:]) for g, n in zip(cliffords, noisy)]
    else:
        raise ValueError(f"side must be 'right' or 'left', got {side!r}")
    return float(np.mean(vals) / cliffords[0].D)


def gateset_report(cliffords: Sequence[Superop], noisy: Sequence[Superop]) -> FidelityReport:
    if len(cliffords) != len(noisy):
        raise LengthMismatch(f"{len(cliffords)} ideal gates vs {len(noisy)} noisy gates")
    d = cliffords[0].d
    qs = [gate_q(g, n) for g, n in zip(cliffords, noisy)]
    q = float(np.mean(qs))
    F = average_fidelity(q, d)
    return FidelityReport(qs, q, F, 1 - F, d)


def rb_number(p: float, d: int = 2) -> float:
    return (d - 1) * (1 - p) / d


def infidelity_from_q(q: float, d: int = 2) -> float:
    return (d - 1) * (1 - q) / d


def haar_states(n: int, rng: np.random.Generator) -> np.ndarray:
    """Pure qubit states as transfer-matrix coordinates, shape (n, 4).

    Normalized complex Gaussian 2-vectors are exactly Fubini-Study distributed.
    """
    z = rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    a, b = z[:, 0], z[:, 1]
    bloch = np.stack([2 * (a.conj() * b).real, 2 * (a.conj() * b).imag,
                      np.abs(a) ** 2 - np.abs(b) ** 2], axis=1)
    return np.hstack([np.ones((n, 1)), bloch]) / np.sqrt(2)


def haar_fidelity_mc(G: Superop, noisy: Superop, n_samples: int, seed: int,
                     block: int = 8192) -> Tuple[float, float]:
    """Monte-Carlo estimate of ``int dpsi tr(G(psi) G~(psi))``.

    Samples are drawn in fixed-size blocks from seed-derived substreams and
    reduced in block order, so the result depends only on ``seed``.

    Returns
    -------
    mean, stderr
    """
    if n_samples < 100:
        raise ValueError("need at least 100 samples")
    n_blocks = -(-n_samples // block)
    streams = np.random.SeedSequence(seed).spawn(n_blocks)
    values = []
    remaining = n_samples
    for ss in streams:
        k = min(block, remaining)
        remaining -= k
        psi = haar_states(k, np.random.default_rng(ss))
        values.append(np.einsum("ni,ni->n", psi @ G.mat.T, psi @ noisy.mat.T))
    vals = np.concatenate(values)
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(len(vals)))
