"""
Spectral analysis of the RB twirl operator ``M = <G (x) G~>``.

The average of an RB sequence of length ``m + 1`` vectorizes to
``M^m |1)``, so the decay rate is the dominant eigenvalue of the unital
block ``M_u = <G_u (x) G~_u>``, whereas the average gate-set fidelity
parameter is the diagonal element ``q = (1|M_u|1)``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import List, NamedTuple, Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.optimize

from .channels import NoiseModel, noisy_gateset
from .clifford import CliffordGroup, clifford_group
from .errors import (
    DegenerateNoise,
    EigSolverFailure,
    LengthMismatch,
    NotCPTP,
    NotTracePreserving,
    NotUnitary,
)
from .metrics import gateset_report, infidelity_from_q, rb_number
from .superop import B0, B1, Superop, is_cptp, ket1_unital, vec

IMAG_WARN = 1e-9
GAP_WARN = 0.5
CLUSTER_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class MOperator:
    full: np.ndarray
    unital: np.ndarray
    avg_translation: np.ndarray
    avg_unital: np.ndarray

    @property
    def D(self) -> int:
        return self.avg_unital.shape[0]


def _mats(gates) -> np.ndarray:
    if isinstance(gates, CliffordGroup):
        return gates.mats
    return np.array([g.mat if isinstance(g, Superop) else np.asarray(g) for g in gates])


def build_M(cliffords, noisy) -> MOperator:
    """``(1/N) sum_k G_k (x) G~_k`` together with its unital block."""
    G = _mats(cliffords)
    Gt = _mats(noisy)
    if len(G) != len(Gt):
        raise LengthMismatch(f"{len(G)} ideal gates vs {len(Gt)} noisy gates")
    first = np.zeros(Gt.shape[-1])
    first[0] = 1.0
    if not np.allclose(Gt[:, 0, :], first, atol=1e-10) or not np.allclose(G[:, 0, :], first, atol=1e-10):
        raise NotTracePreserving("build_M needs trace-preserving gates")
    n = G.shape[-1]
    full = np.einsum("kij,kab->iajb", G, Gt).reshape(n * n, n * n) / len(G)
    Gu, Gtu = G[:, 1:, 1:], Gt[:, 1:, 1:]
    D = n - 1
    unital = np.einsum("kij,kab->iajb", Gu, Gtu).reshape(D * D, D * D) / len(G)
    return MOperator(full, unital, Gt[:, 1:, 0].mean(axis=0), Gtu.mean(axis=0))


def M_ideal(d: int = 2) -> np.ndarray:
    """``|0)(0| + |1)(1|``."""
    k0, k1 = vec(B0(d)), vec(B1(d))
    return np.outer(k0, k0) + np.outer(k1, k1)


class DecayRate(NamedTuple):
    p: float
    eigenvalues: np.ndarray
    gap: float
    flags: tuple


def decay_rate(M: MOperator) -> DecayRate:
    """Real part of the largest-magnitude eigenvalue of ``M_u``.

    ``flags`` may contain ``"complex_dominant"`` (imaginary part above 1e-9)
    and ``"small_gap"`` (second eigenvalue more than half the first in
    magnitude), both signs that the weak-noise picture has broken down.
    """
    try:
        ev = np.linalg.eigvals(M.unital)
    except np.linalg.LinAlgError as exc:
        raise EigSolverFailure(str(exc)) from exc
    if not np.all(np.isfinite(ev)):
        raise EigSolverFailure("non-finite eigenvalues")
    order = np.argsort(-np.abs(ev), kind="stable")
    ev = ev[order]
    top = ev[0]
    gap = float(abs(ev[1]) / abs(top)) if abs(top) > 0 else float("nan")
    flags = []
    if abs(top.imag) > IMAG_WARN:
        flags.append("complex_dominant")
    if gap > GAP_WARN:
        flags.append("small_gap")
    return DecayRate(float(top.real), ev, gap, tuple(flags))


def q_from_M(M: MOperator) -> float:
    one = ket1_unital()
    return float(one @ M.unital @ one)


class EigenTerm(NamedTuple):
    value: complex
    right: np.ndarray      # |L_i)
    left: np.ndarray       # |R_i^dag), normalized so that (R_i^dag|L_i) = 1
    cluster: int


def eigen_terms(mat: np.ndarray) -> List[EigenTerm]:
    """Biorthogonal eigen-decomposition, largest magnitude first.

    Eigenvalues closer than 1e-10 share a ``cluster`` label; vectors within a
    cluster are whatever the solver returned and should not be split.
    """
    try:
        w, vl, vr = scipy.linalg.eig(mat, left=True, right=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigSolverFailure(str(exc)) from exc
    order = np.argsort(-np.abs(w), kind="stable")
    terms = []
    labels: List[complex] = []
    for i in order:
        right = vr[:, i] / np.linalg.norm(vr[:, i])
        left = vl[:, i]
        overlap = left.conj() @ right
        if abs(overlap) > 1e-14:
            left = left / overlap.conj()
        label = next((j for j, c in enumerate(labels) if abs(c - w[i]) < CLUSTER_TOL), None)
        if label is None:
            labels.append(w[i])
            label = len(labels) - 1
        terms.append(EigenTerm(complex(w[i]), right, left, label))
    return terms


@dataclass
class SpectralReport:
    p: float
    q: float
    r: float
    epsilon: float
    alpha: Optional[float] = None
    beta: Optional[float] = None
    x1: Optional[float] = None
    x2: Optional[float] = None
    eigenvalues: List[complex] = field(default_factory=list)
    gap: float = float("nan")
    flags: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["eigenvalues"] = [[float(np.real(z)), float(np.imag(z))] for z in self.eigenvalues]
        return out


def spectral_report(cliffords, noisy) -> SpectralReport:
    M = build_M(cliffords, noisy)
    dr = decay_rate(M)
    q = q_from_M(M)
    return SpectralReport(dr.p, q, rb_number(dr.p), infidelity_from_q(q),
                          eigenvalues=list(dr.eigenvalues), gap=dr.gap, flags=list(dr.flags))


def analyze_model(model: NoiseModel, group: CliffordGroup | None = None):
    """Spectral and fidelity reports for a noise model."""
    group = group or clifford_group()
    noisy = noisy_gateset(model, group)
    return spectral_report(group, noisy), gateset_report(list(group), noisy)


# ------------------------------------------------------------ L G R geometry

def lgr_geometry(L: Superop, R: Superop) -> SpectralReport:
    """Closed-form p, q and the (alpha, beta, x1, x2) geometry of ``G~ = L G R``.

    ``M_u = alpha |L)(R^dag|`` with unit vectors ``|L)``, ``|R^dag)``;
    ``p = alpha beta`` and ``q = alpha x1 (beta x1 + sqrt(1 - beta^2) x2)``.
    A negative ``beta`` is accepted and flagged.
    """
    if not (L.is_tp and R.is_tp and L.is_unital and R.is_unital):
        raise NotTracePreserving("lgr_geometry needs unital trace-preserving L and R")
    D = L.D
    vl = vec(L.unital)
    vr = vec(R.unital.T)
    nl, nr = np.linalg.norm(vl), np.linalg.norm(vr)
    if nl < 1e-12 or nr < 1e-12:
        raise DegenerateNoise("L or R has a vanishing unital part")
    Lhat, Rhat = vl / nl, vr / nr
    alpha = nl * nr / D
    beta = float(np.clip(Rhat @ Lhat, -1.0, 1.0))
    one = ket1_unital()
    x1 = float(Lhat @ one)
    perp = Rhat - beta * Lhat
    s = np.sqrt(max(0.0, 1 - beta**2))
    x2 = float(perp @ one / s) if s > 1e-12 else 0.0
    p = alpha * beta
    q = alpha * x1 * (beta * x1 + s * x2)
    M = np.outer(vl, vr) / D
    ev = np.linalg.eigvals(M)
    ev = ev[np.argsort(-np.abs(ev), kind="stable")]
    flags = ["negative_beta"] if beta < 0 else []
    return SpectralReport(float(p), float(q), rb_number(p), infidelity_from_q(q),
                          float(alpha), beta, x1, x2, list(ev), float(abs(ev[1]) / abs(ev[0])), flags)


def q_band(beta):
    """Attainable range ``[0, (1 + beta)/2]`` of ``q/alpha`` at fixed beta."""
    beta = np.asarray(beta, dtype=float)
    return np.zeros_like(beta), (1 + beta) / 2


class InfidelityBound(NamedTuple):
    general: float
    qubit: Optional[float]


def infidelity_bound(alpha: float, r: float, d: int = 2) -> InfidelityBound:
    """Lower bounds ``(d-1)/(2d) (1-alpha) + r/2`` and, for a qubit with alpha <= 1, ``r/2``."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    general = (d - 1) / (2 * d) * (1 - alpha) + r / 2
    qubit = r / 2 if d == 2 and alpha <= 1 + 1e-12 else None
    return InfidelityBound(general, qubit)


def alpha_qubit_check(E: Superop, tol: float = 1e-10) -> float:
    """Largest singular value of the unital block; must not exceed 1 for CPTP qubit maps."""
    if E.d != 2 or not is_cptp(E):
        raise NotCPTP("alpha_qubit_check needs a CPTP qubit channel")
    s = float(np.linalg.norm(E.unital, 2))
    if s > 1 + tol:
        raise AssertionError(f"unital block has operator norm {s} > 1")
    return s


# --------------------------------------------------------- nonunital spectrum

@dataclass
class SpectrumReport:
    eigenvalues: List[complex]
    has_unit_eigenvalue: bool
    n_zero: int
    factorization_ok: bool
    bauer_fike_radius: float
    bauer_fike_ok: bool
    p: float

    @property
    def ok(self) -> bool:
        return self.has_unit_eigenvalue and self.factorization_ok and self.bauer_fike_ok


def _match_multisets(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    if len(a) != len(b):
        return False
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = scipy.optimize.linear_sum_assignment(cost)
    return bool(np.max(cost[rows, cols], initial=0.0) <= tol)


def nonunital_spectrum(M: MOperator, zero_tol: float = 1e-9, match_tol: float = 1e-9) -> SpectrumReport:
    """Check ``det(M - x) = (1-x) det(<G~_u> - x) (-x)^D det(M_u - x)`` numerically.

    Also checks the Bauer-Fike bound: every eigenvalue of ``M`` lies within
    ``||M - M_ideal||_2`` of 0 or 1.
    """
    ev = np.linalg.eigvals(M.full)
    D = M.D
    has_one = bool(np.min(np.abs(ev - 1)) < 1e-10)
    n_zero = int(np.sum(np.abs(ev) < zero_tol))
    predicted = np.concatenate([[1.0], np.linalg.eigvals(M.avg_unital), np.zeros(D),
                                np.linalg.eigvals(M.unital)])
    fact_ok = _match_multisets(ev, predicted.astype(complex), match_tol) and n_zero >= D
    radius = float(np.linalg.norm(M.full - M_ideal(int(round(np.sqrt(D + 1)))), 2))
    dist = np.minimum(np.abs(ev), np.abs(ev - 1))
    bf_ok = bool(np.all(dist <= radius + 1e-12))
    return SpectrumReport(list(ev), has_one, n_zero, fact_ok, radius, bf_ok, decay_rate(M).p)


# --------------------------------------------------------------- gauge freedom

@dataclass
class GaugeComparison:
    p: float
    p_prime: float
    q: float
    q_prime: float

    @property
    def same_p(self) -> bool:
        return abs(self.p - self.p_prime) < 1e-10


def same_p_different_q(noisy: Sequence[Superop], U: Superop, group: CliffordGroup | None = None) -> GaugeComparison:
    """Compare ``{G~}`` with the unitarily rotated set ``{U G~ U^dag}``."""
    group = group or clifford_group()
    Um = U.mat
    if not (np.allclose(Um.T @ Um, np.eye(len(Um)), atol=1e-10) and U.is_tp and U.is_unital):
        raise NotUnitary("U must be a unitary channel")
    rotated = [Superop(Um @ g.mat @ Um.T) for g in noisy]
    M, Mp = build_M(group, noisy), build_M(group, rotated)
    return GaugeComparison(decay_rate(M).p, decay_rate(Mp).p, q_from_M(M), q_from_M(Mp))


# ----------------------------------------------------------------- figure 1

def fig1_sweep(grid: int, seed: int = 0) -> np.ndarray:
    """Rows ``(beta, p/alpha, q_lo, q_hi, q_sample)`` on an even beta grid in [0, 1].

    ``q_sample`` is ``x1 (beta x1 + sqrt(1-beta^2) x2)`` for a random unit
    pair ``|L)``, ``|R^dag)`` in the 9-dimensional unital sector with the
    prescribed overlap, conditioned on nonnegative identity projections.
    """
    if grid < 2:
        raise ValueError("grid must have at least two points")
    rng = np.random.default_rng(seed)
    one = ket1_unital()
    rows = []
    for beta in np.linspace(0.0, 1.0, grid):
        lo, hi = q_band(beta)
        while True:
            Lv = rng.standard_normal(9)
            Lv /= np.linalg.norm(Lv)
            perp = rng.standard_normal(9)
            perp -= (perp @ Lv) * Lv
            perp /= np.linalg.norm(perp)
            Rv = beta * Lv + np.sqrt(1 - beta**2) * perp
            if Lv @ one >= 0 and Rv @ one >= 0:
                break
        rows.append((beta, beta, float(lo), float(hi), float((Lv @ one) * (Rv @ one))))
    return np.array(rows)

