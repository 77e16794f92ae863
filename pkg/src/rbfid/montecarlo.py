"""
End-to-end simulation of the single-qubit RB protocol.

A sequence of length ``m`` holds ``m + 1`` Clifford indices in time order:
entry 0 is the inversion gate and entries ``1..m`` are uniform draws, so the
ideal composition ``G_m ... G_1 G_0`` is the identity. The survival
probability of the pure fiducial state ``psi0`` with Bloch vector ``r0`` is
``(1 + r0 . r_out) / 2``, evaluated directly on transfer-matrix coordinates.

In ``"theory"`` mode the inversion gate is applied noiselessly, which makes
the length-averaged superoperator exactly ``M^m`` acting on the vectorized
identity. ``"experiment"`` mode (the default) applies every gate noisily.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from .analytic import MOperator, decay_rate
from .channels import NoiseModel, noisy_gateset
from .clifford import CliffordGroup, clifford_group
from .errors import ConfigError

DEFAULT_LENGTHS = (1, 2, 3, 4, 6, 9, 13, 18, 26, 37, 52, 73, 100)
DEFAULT_K = 100
ENUMERATION_LIMIT = 14_000
DIVERGED_RMS = 0.1
FLAT_TOL = 1e-12
P_BOUNDS = (0.0, 1.05)
MODES = ("experiment", "theory")


@dataclass(frozen=True)
class RBConfig:
    """Protocol settings.

    Parameters
    ----------
    lengths : sequence of int
        Strictly increasing sequence lengths ``m >= 1``.
    sequences_per_length : int
        Number ``K`` of random sequences per length.
    shots : int or "exact"
        Measurement shots per sequence; ``"exact"`` uses the survival
        probability itself.
    psi0 : 3-vector
        Bloch vector of the pure fiducial state.
    seed : int
        Root seed; every length and sequence draws from a derived substream.
    mode : {"experiment", "theory"}
        Whether the inversion gate is noisy (experiment) or ideal (theory).
    weighted : bool
        Inverse-variance weights in the fit. Off by default.
    enumerate_small : bool
        In exact mode, average over all ``24^m`` sequences when that number
        is at most ``ENUMERATION_LIMIT``.
    """

    lengths: Tuple[int, ...] = DEFAULT_LENGTHS
    sequences_per_length: int = DEFAULT_K
    shots: Union[int, str] = "exact"
    psi0: Tuple[float, float, float] = (0.0, 0.0, 1.0)
    seed: int = 0
    mode: str = "experiment"
    weighted: bool = False
    enumerate_small: bool = True

    def __post_init__(self):
        lengths = tuple(int(m) for m in self.lengths)
        if not lengths or any(m < 1 for m in lengths):
            raise ConfigError("lengths must be a non-empty list of integers >= 1")
        if any(b <= a for a, b in zip(lengths, lengths[1:])):
            raise ConfigError("lengths must be strictly increasing")
        if int(self.sequences_per_length) < 1:
            raise ConfigError("sequences_per_length must be >= 1")
        if self.shots != "exact" and (isinstance(self.shots, bool) or not isinstance(self.shots, int)
                                      or self.shots < 1):
            raise ConfigError("shots must be a positive integer or 'exact'")
        psi0 = np.asarray(self.psi0, dtype=float).reshape(-1)
        if psi0.shape != (3,) or abs(np.linalg.norm(psi0) - 1) > 1e-9:
            raise ConfigError("psi0 must be a unit Bloch 3-vector")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "sequences_per_length", int(self.sequences_per_length))
        object.__setattr__(self, "psi0", tuple(float(x) for x in psi0))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def exact(self) -> bool:
        return self.shots == "exact"

    def to_dict(self) -> dict:
        return {"lengths": list(self.lengths), "sequences_per_length": self.sequences_per_length,
                "shots": self.shots, "psi0": list(self.psi0), "seed": self.seed,
                "mode": self.mode, "weighted": self.weighted,
                "enumerate_small": self.enumerate_small}

    @classmethod
    def from_dict(cls, spec: dict) -> "RBConfig":
        known = {"lengths", "sequences_per_length", "shots", "psi0", "seed", "mode",
                 "weighted", "enumerate_small"}
        extra = set(spec) - known
        if extra:
            raise ConfigError(f"unknown rb keys: {sorted(extra)}")
        try:
            return cls(**spec)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


@dataclass
class RBRun:
    config: RBConfig
    per_length: List[Tuple[int, float, float]]
    fit: Tuple[float, float, float]
    fit_cov: np.ndarray
    residual_rms: float
    flags: List[str] = field(default_factory=list)
    metadata: Dict[str, object] = field(default_factory=dict)

    @property
    def p(self) -> float:
        return self.fit[1]

    @property
    def p_stderr(self) -> float:
        var = self.fit_cov[1, 1]
        return float(np.sqrt(var)) if np.isfinite(var) and var >= 0 else float("inf")

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "per_length": [{"m": m, "mean": f, "stderr": s} for m, f, s in self.per_length],
            "fit": {"a": self.fit[0], "p": self.fit[1], "b": self.fit[2]},
            "fit_cov": np.asarray(self.fit_cov).tolist(),
            "residual_rms": self.residual_rms,
            "flags": list(self.flags),
            "metadata": dict(self.metadata),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "mean", "stderr"])
        for m, f, s in self.per_length:
            w.writerow([m, repr(f), repr(s)])
        return buf.getvalue()


# ----------------------------------------------------------------- sequences

def sample_sequence(m: int, rng: np.random.Generator, group: CliffordGroup | None = None) -> List[int]:
    """``m`` uniform Clifford indices preceded by the inverse of their product."""
    if m < 1:
        raise ValueError("m must be >= 1")
    group = group or clifford_group()
    body = [int(i) for i in rng.integers(0, len(group), size=m)]
    return [_inversion(body, group)] + body


def _inversion(body: Sequence[int], group: CliffordGroup) -> int:
    # body is in time order, so the composed operator is body[-1] @ ... @ body[0]
    return group.inverse(group.compose_word(reversed(body)))


def _inversions(bodies: np.ndarray, group: CliffordGroup) -> np.ndarray:
    acc = np.zeros(len(bodies), dtype=int)
    for t in range(bodies.shape[1]):
        acc = group.cayley[bodies[:, t], acc]
    return group.inverse_table[acc]


def fiducial(psi0) -> np.ndarray:
    """Transfer-matrix coordinates ``(1, r0) / sqrt(2)`` of a pure state."""
    return np.concatenate([[1.0], np.asarray(psi0, dtype=float)]) / np.sqrt(2)


def survival(seq: Sequence[int], noisy, psi0, ideal=None) -> float:
    """Survival probability of one sequence.

    Parameters
    ----------
    seq : sequence of int
        Gate indices in time order.
    noisy : sequence of Superop or array (24, 4, 4)
        Noisy gate set.
    psi0 : 3-vector
        Fiducial Bloch vector.
    ideal : optional
        If given, ``seq[0]`` is taken from this gate set instead (theory mode).
    """
    seqs = np.asarray(seq, dtype=int)[None]
    first = _stack(ideal) if ideal is not None else None
    return float(_survival_batch(seqs, _stack(noisy), fiducial(psi0), first)[0])


def _stack(gates) -> np.ndarray:
    if isinstance(gates, np.ndarray):
        return gates
    if isinstance(gates, CliffordGroup):
        return gates.mats
    return np.array([getattr(g, "mat", g) for g in gates])


def _survival_batch(seqs: np.ndarray, noisy: np.ndarray, v0: np.ndarray,
                    first: Optional[np.ndarray] = None) -> np.ndarray:
    start = first if first is not None else noisy
    v = start[seqs[:, 0]] @ v0
    for t in range(1, seqs.shape[1]):
        v = np.einsum("kij,kj->ki", noisy[seqs[:, t]], v)
    return np.clip(v @ v0, 0.0, 1.0)


# ----------------------------------------------------------------------- fit

def decay_model(m, a, p, b):
    return a * np.power(p, m) + b


def initial_guess(ms: np.ndarray, F: np.ndarray) -> Tuple[float, float, float]:
    """Seed ``(a0, p0, b0)``: endpoint difference, log-slope of ``F - b0``, last value."""
    a0 = float(F[0] - F[-1])
    b0 = float(F[-1])
    y = F[:-1] - b0
    good = np.abs(y) > 1e-12
    p0 = 0.99
    if np.count_nonzero(good) >= 2:
        slope = np.polyfit(ms[:-1][good], np.log(np.abs(y[good])), 1)[0]
        p0 = float(np.exp(slope))
    p0 = float(np.clip(p0, 1e-3, 1.0 - 1e-9))
    return a0, p0, b0


def fit_decay(ms, F, stderr=None, weighted: bool = False):
    """Least-squares fit of ``a p^m + b``.

    Returns
    -------
    params, cov, residual_rms, flags
    """
    ms = np.asarray(ms, dtype=float)
    F = np.asarray(F, dtype=float)
    flags: List[str] = []
    if np.ptp(F) <= FLAT_TOL:
        # a constant curve carries no decay: p = 1 with all weight in b
        return (0.0, 1.0, float(F.mean())), np.zeros((3, 3)), 0.0, ["flat"]
    guess = initial_guess(ms, F)
    sigma = None
    if weighted and stderr is not None:
        s = np.asarray(stderr, dtype=float)
        if np.all(s > 0):
            sigma = s
        else:
            flags.append("weights_ignored")
    lo = [-np.inf, P_BOUNDS[0] + 1e-12, -np.inf]
    hi = [np.inf, P_BOUNDS[1] - 1e-12, np.inf]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OptimizeWarning)
            popt, pcov = curve_fit(decay_model, ms, F, p0=guess, sigma=sigma,
                                   absolute_sigma=sigma is not None, bounds=(lo, hi),
                                   maxfev=20_000, x_scale="jac")
    except (RuntimeError, ValueError):
        popt, pcov = np.array(guess), np.full((3, 3), np.inf)
        flags.append("FitDiverged")
    rms = float(np.sqrt(np.mean((decay_model(ms, *popt) - F) ** 2)))
    if rms > DIVERGED_RMS and "FitDiverged" not in flags:
        flags.append("FitDiverged")
    return tuple(float(x) for x in popt), np.asarray(pcov), rms, flags


# ----------------------------------------------------------------------- run

def _length_values(m: int, cfg: RBConfig, noisy: np.ndarray, first: Optional[np.ndarray],
                   v0: np.ndarray, ss: np.random.SeedSequence, group: CliffordGroup):
    n = len(group)
    if cfg.exact and cfg.enumerate_small and n**m <= ENUMERATION_LIMIT:
        bodies = np.array(list(itertools.product(range(n), repeat=m)), dtype=int)
        seqs = np.column_stack([_inversions(bodies, group), bodies])
        vals = _survival_batch(seqs, noisy, v0, first)
        return float(vals.mean()), 0.0, True
    children = ss.spawn(cfg.sequences_per_length)
    rngs = [np.random.default_rng(c) for c in children]
    bodies = np.array([r.integers(0, n, size=m) for r in rngs], dtype=int)
    seqs = np.column_stack([_inversions(bodies, group), bodies])
    vals = _survival_batch(seqs, noisy, v0, first)
    if not cfg.exact:
        vals = np.array([r.binomial(cfg.shots, f) for r, f in zip(rngs, vals)]) / cfg.shots
    K = len(vals)
    stderr = float(vals.std(ddof=1) / np.sqrt(K)) if K > 1 else float("nan")
    return float(vals.mean()), stderr, False


def run_rb(config: RBConfig, model: NoiseModel, group: CliffordGroup | None = None) -> RBRun:
    """Simulate the protocol for every length and fit ``a p^m + b``.

    A fit whose residual RMS exceeds 0.1 is flagged ``"FitDiverged"`` rather
    than raised. Results depend only on ``config`` (including its seed).
    """
    group = group or clifford_group()
    noisy = _stack(noisy_gateset(model, group))
    first = group.mats if config.mode == "theory" else None
    v0 = fiducial(config.psi0)
    streams = np.random.SeedSequence(config.seed).spawn(len(config.lengths))
    per_length = []
    enumerated = []
    for m, ss in zip(config.lengths, streams):
        mean, se, full = _length_values(m, config, noisy, first, v0, ss, group)
        per_length.append((m, mean, se))
        if full:
            enumerated.append(m)
    ms = np.array([r[0] for r in per_length], dtype=float)
    F = np.array([r[1] for r in per_length])
    se = np.array([r[2] for r in per_length])
    fit, cov, rms, flags = fit_decay(ms, F, se, config.weighted)
    meta = {
        "enumerated_lengths": enumerated,
        "default_lengths": config.lengths == DEFAULT_LENGTHS,
        "default_K": config.sequences_per_length == DEFAULT_K,
    }
    return RBRun(config, per_length, fit, cov, rms, flags, meta)


def enumerated_mean(m: int, model_or_gates, psi0=(0.0, 0.0, 1.0), mode: str = "theory",
                    group: CliffordGroup | None = None) -> float:
    """Exact average survival over all ``24^m`` sequences of length ``m``."""
    group = group or clifford_group()
    gates = model_or_gates
    if not isinstance(gates, (list, tuple, np.ndarray)):
        gates = noisy_gateset(gates, group)
    noisy = _stack(gates)
    bodies = np.array(list(itertools.product(range(len(group)), repeat=m)), dtype=int)
    seqs = np.column_stack([_inversions(bodies, group), bodies])
    first = group.mats if mode == "theory" else None
    return float(_survival_batch(seqs, noisy, fiducial(psi0), first).mean())


def spectral_mean(m: int, M: MOperator, psi0=(0.0, 0.0, 1.0)) -> float:
    """``vec(psi0 psi0^T)^T M^m vec(1)`` in transfer-matrix coordinates."""
    v0 = fiducial(psi0)
    n = len(v0)
    ident = np.eye(n).reshape(-1, order="F")
    proj = np.outer(v0, v0).reshape(-1, order="F")
    return float(proj @ np.linalg.matrix_power(M.full, m) @ ident)


@dataclass
class ValidationReport:
    p_fitted: float
    p_spectral: float
    sigma: float
    tolerance: float
    difference: float
    ok: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def validate_against_spectrum(run: RBRun, M: MOperator, floor: float = 1e-3) -> ValidationReport:
    """Compare the fitted p with the dominant eigenvalue of ``M_u``.

    Agreement means ``|p_fit - p_spec| < max(3 sigma, floor)``.
    """
    p_spec = decay_rate(M).p
    sigma = run.p_stderr
    tol = max(3 * sigma, floor) if np.isfinite(sigma) else floor
    diff = abs(run.p - p_spec)
    return ValidationReport(run.p, p_spec, sigma, tol, diff, bool(diff < tol))
