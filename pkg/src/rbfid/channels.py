"""
Noise channels and noisy Clifford gate-set models.

Every model turns the 24 ideal Cliffords into their noisy implementations
``G~_k``. Right noise means ``G~ = G R`` (the noise acts first), left noise
``G~ = L G``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .clifford import GROUP_ORDER, CliffordGroup, clifford_group
from .errors import (
    ConfigError,
    DecompositionGateFailed,
    InvalidProbability,
    ModelTableIncomplete,
    NotCPTP,
    NotUnitaryResidual,
    OutOfRange,
    ZeroAxis,
)
from .superop import TOL_KRAUS, Superop, identity, is_cptp, ptm_from_kraus

_PROB_TOL = 1e-12


class RotationParams(NamedTuple):
    axis: np.ndarray
    angle: float


def unit_axis(axis) -> np.ndarray:
    m = np.asarray(axis, dtype=float).reshape(3)
    norm = np.linalg.norm(m)
    if norm < 1e-12:
        raise ZeroAxis("rotation axis has zero length")
    return m / norm


def cross_matrix(axis) -> np.ndarray:
    """Antisymmetric matrix with entries ``epsilon_{ijl} m_l``."""
    x, y, z = axis
    return np.array([[0.0, z, -y], [-z, 0.0, x], [y, -x, 0.0]])


def _embed(block: np.ndarray, translation=None) -> np.ndarray:
    mat = np.zeros((4, 4))
    mat[0, 0] = 1.0
    mat[1:, 1:] = block
    if translation is not None:
        mat[1:, 0] = translation
    return mat


def pauli_channel(l) -> Superop:
    """``rho -> (1 - sum l) rho + l_x X rho X + l_y Y rho Y + l_z Z rho Z``."""
    lx, ly, lz = np.asarray(l, dtype=float).reshape(3)
    if min(lx, ly, lz) < -_PROB_TOL or lx + ly + lz > 1 + _PROB_TOL:
        raise InvalidProbability(f"Pauli probabilities {l!r} are not a sub-distribution")
    diag = [1 - 2 * (ly + lz), 1 - 2 * (lx + lz), 1 - 2 * (lx + ly)]
    return Superop(_embed(np.diag(diag)))


def depolarizing(lam: float) -> Superop:
    return pauli_channel((lam, lam, lam))


def dephasing(lam: float) -> Superop:
    return pauli_channel((0.0, 0.0, lam))


def rotation_block(axis, angle: float) -> np.ndarray:
    m = unit_axis(axis)
    c, s = math.cos(angle), math.sin(angle)
    return c * np.eye(3) - s * cross_matrix(m) + (1 - c) * np.outer(m, m)


def rotation_channel(axis, angle: float) -> Superop:
    """Conjugation by ``exp(-i angle/2 m.sigma)``."""
    return Superop(_embed(rotation_block(axis, angle)))


def amplitude_damping(gamma: float) -> Superop:
    if not 0.0 <= gamma <= 1.0:
        raise OutOfRange(f"damping probability must lie in [0, 1], got {gamma}")
    k0 = np.diag([1.0, math.sqrt(1 - gamma)])
    k1 = np.array([[0.0, math.sqrt(gamma)], [0.0, 0.0]])
    return ptm_from_kraus([k0, k1])


# ---------------------------------------------------------------- primitives

PRIMITIVES = {
    "X": rotation_channel((1, 0, 0), math.pi / 2),
    "Y": rotation_channel((0, 1, 0), math.pi / 2),
}


def parse_word(word) -> Tuple[str, ...]:
    if isinstance(word, str):
        tokens = word.replace(",", " ").split()
    else:
        tokens = list(word)
    tokens = [t for t in tokens if t not in ("-", "I", "")]
    bad = [t for t in tokens if t not in PRIMITIVES]
    if bad:
        raise ConfigError(f"unknown primitive(s) {bad}; expected one of {sorted(PRIMITIVES)}")
    return tuple(tokens)


def word_product(word: Sequence[str]) -> np.ndarray:
    acc = np.eye(4)
    for name in word:
        acc = acc @ PRIMITIVES[name].mat
    return acc


def load_xy_compilation() -> List[Tuple[str, ...]]:
    """The shipped compilation table, in file order."""
    text = resources.files("rbfid").joinpath("data/xy_compilation.txt").read_text()
    words = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        words.append(parse_word(line))
    return words


def index_decomposition(words, group: CliffordGroup) -> Tuple[Tuple[str, ...], ...]:
    """Reorder a list of words by the Clifford index each one implements."""
    table: List[Optional[Tuple[str, ...]]] = [None] * len(group)
    for w in words:
        w = parse_word(w)
        k = group.lookup(np.rint(word_product(w)))
        if table[k] is not None:
            raise ModelTableIncomplete(f"two words implement Clifford {k}")
        table[k] = w
    missing = [k for k, w in enumerate(table) if w is None]
    if missing:
        raise ModelTableIncomplete(f"no word for Clifford indices {missing}")
    return tuple(table)  # type: ignore[arg-type]


# -------------------------------------------------------------- power series

def _series_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cauchy product of truncated matrix power series, shape (order+1, n, n)."""
    out = np.zeros_like(a)
    for n in range(a.shape[0]):
        for i in range(n + 1):
            out[n] += a[i] @ b[n - i]
    return out


def rotation_series(axis, rate: float, order: int) -> np.ndarray:
    """Taylor coefficients in theta of the unital block of a rotation by ``rate*theta``."""
    gen = -rate * cross_matrix(unit_axis(axis))
    out = np.empty((order + 1, 3, 3))
    term = np.eye(3)
    for n in range(order + 1):
        out[n] = term
        term = term @ gen / (n + 1)
    return out


# -------------------------------------------------------------------- models

@dataclass(frozen=True, eq=False)
class GateIndependentLR:
    left: Superop
    right: Superop

    def gates(self, group: CliffordGroup) -> List[Superop]:
        return [self.left @ g @ self.right for g in group]


@dataclass(frozen=True, eq=False)
class PauliLR:
    l: Tuple[float, float, float]
    s: Tuple[float, float, float]

    def as_lr(self) -> GateIndependentLR:
        return GateIndependentLR(pauli_channel(self.l), pauli_channel(self.s))

    def gates(self, group: CliffordGroup) -> List[Superop]:
        return self.as_lr().gates(group)


@dataclass(frozen=True, eq=False)
class PerGateUnitary:
    """Right unitary noise ``G~_k = G_k U_k`` with angle ``coeffs[k] * theta``."""

    axes: np.ndarray
    coeffs: np.ndarray
    theta: float = 1.0

    def __post_init__(self):
        axes = np.array([unit_axis(a) for a in np.asarray(self.axes, dtype=float)])
        coeffs = np.asarray(self.coeffs, dtype=float).reshape(-1)
        if len(axes) != GROUP_ORDER or len(coeffs) != GROUP_ORDER:
            raise ModelTableIncomplete("per-gate table must cover all 24 Cliffords")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def random(cls, rng: np.random.Generator, theta: float = 1.0) -> "PerGateUnitary":
        axes = rng.standard_normal((GROUP_ORDER, 3))
        coeffs = rng.uniform(0.5, 1.5, GROUP_ORDER)
        return cls(axes, coeffs, theta)

    def with_theta(self, theta: float) -> "PerGateUnitary":
        return PerGateUnitary(self.axes, self.coeffs, theta)

    def angles(self) -> np.ndarray:
        return self.coeffs * self.theta

    def gates(self, group: CliffordGroup) -> List[Superop]:
        return [g @ rotation_channel(m, a * self.theta)
                for g, m, a in zip(group, self.axes, self.coeffs)]

    def unital_series(self, group: CliffordGroup, order: int) -> np.ndarray:
        out = np.empty((len(group), order + 1, 3, 3))
        for k, g in enumerate(group):
            out[k] = g.unital @ rotation_series(self.axes[k], self.coeffs[k], order)
        return out


@dataclass(frozen=True, eq=False)
class ProctorPrimitive:
    """Cliffords compiled from noisy pi/2 x/y rotations.

    Every primitive ``P`` is implemented as ``P N`` with the same coherent
    rotation ``N`` by ``theta`` about ``axis``. ``decomposition`` maps each
    Clifford index to a word (operator order); by default the shipped XY
    compilation is used.
    """

    theta: float
    axis: Tuple[float, float, float] = (0.0, 0.0, 1.0)
    decomposition: Optional[Tuple[Tuple[str, ...], ...]] = None

    def table(self, group: CliffordGroup) -> Tuple[Tuple[str, ...], ...]:
        if self.decomposition is None:
            return index_decomposition(load_xy_compilation(), group)
        if len(self.decomposition) != len(group):
            raise ModelTableIncomplete("decomposition must list one word per Clifford index")
        table = tuple(parse_word(w) for w in self.decomposition)
        for k, w in enumerate(table):
            if group.lookup(np.rint(word_product(w))) != k:
                raise ModelTableIncomplete(f"word {' '.join(w) or '-'} does not implement Clifford {k}")
        return table

    def with_theta(self, theta: float) -> "ProctorPrimitive":
        return ProctorPrimitive(theta, self.axis, self.decomposition)

    def gates(self, group: CliffordGroup) -> List[Superop]:
        noise = rotation_channel(self.axis, self.theta).mat
        out = []
        for word in self.table(group):
            acc = np.eye(4)
            for name in word:
                acc = acc @ PRIMITIVES[name].mat @ noise
            out.append(Superop(acc))
        return out

    def unital_series(self, group: CliffordGroup, order: int) -> np.ndarray:
        noise = rotation_series(self.axis, 1.0, order)
        out = np.zeros((len(group), order + 1, 3, 3))
        for k, word in enumerate(self.table(group)):
            acc = np.zeros((order + 1, 3, 3))
            acc[0] = np.eye(3)
            for name in word:
                acc = _series_mul(acc, PRIMITIVES[name].unital @ noise)
            out[k] = acc
        return out


@dataclass(frozen=True, eq=False)
class Custom:
    table: Tuple[Superop, ...] = field(default_factory=tuple)

    def gates(self, group: CliffordGroup) -> List[Superop]:
        if len(self.table) != len(group):
            raise ModelTableIncomplete(f"custom table has {len(self.table)} gates, need {len(group)}")
        return list(self.table)


NoiseModel = Union[GateIndependentLR, PauliLR, PerGateUnitary, ProctorPrimitive, Custom]


def noisy_gateset(model: NoiseModel, group: CliffordGroup | None = None,
                  check: bool = True) -> List[Superop]:
    """The noisy implementations ``G~_k`` in Clifford index order.

    Raises
    ------
    NotCPTP
        If ``check`` and any noisy gate fails :func:`is_cptp` at 1e-10.
    """
    group = group or clifford_group()
    gates = model.gates(group)
    if len(gates) != len(group):
        raise ModelTableIncomplete(f"model produced {len(gates)} gates, need {len(group)}")
    if check:
        for k, g in enumerate(gates):
            if not is_cptp(g, TOL_KRAUS):
                raise NotCPTP(f"noisy gate {k} is not CPTP")
    return gates


def effective_right_unitary_angle(G: Superop, noisy: Superop, tol: float = 1e-9) -> float:
    """Rotation angle of the right residue ``G^dag G~``, in [0, pi]."""
    res = G.mat.T @ noisy.mat
    ok = (np.allclose(res[0], [1, 0, 0, 0], atol=tol)
          and np.allclose(res[1:, 0], 0, atol=tol)
          and np.allclose(res[1:, 1:].T @ res[1:, 1:], np.eye(3), atol=tol)
          and np.linalg.det(res[1:, 1:]) > 0)
    if not ok:
        raise NotUnitaryResidual("G^dag G~ is not a unitary channel")
    c = (np.trace(res[1:, 1:]) - 1) / 2
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def effective_angles(model: NoiseModel, group: CliffordGroup | None = None) -> np.ndarray:
    group = group or clifford_group()
    return np.array([effective_right_unitary_angle(g, n)
                     for g, n in zip(group, noisy_gateset(model, group, check=False))])


def decomposition_gate(model: ProctorPrimitive, theta_ref: float = 1e-2,
                       rtol: float = 1e-2, group: CliffordGroup | None = None) -> float:
    """Check ``<theta_k^2> = (3/2) theta^2`` at a small reference angle.

    Returns the measured ratio ``<theta_k^2> / theta^2``.

    Raises
    ------
    DecompositionGateFailed
        If the ratio is not within ``rtol`` of 3/2.
    """
    probe = model.with_theta(theta_ref)
    ratio = float(np.mean(effective_angles(probe, group) ** 2) / theta_ref**2)
    if abs(ratio / 1.5 - 1) > rtol:
        raise DecompositionGateFailed(f"<theta_k^2>/theta^2 = {ratio:.6f}, expected 1.5")
    return ratio


# ------------------------------------------------------------- serialization

def channel_from_dict(spec: dict) -> Superop:
    """Build a single channel from a JSON-style dict with a ``kind`` key."""
    try:
        kind = spec["kind"]
        if kind == "identity":
            return identity()
        if kind == "pauli":
            return pauli_channel(spec["l"])
        if kind == "depolarizing":
            return depolarizing(spec["lambda"])
        if kind == "dephasing":
            return dephasing(spec["lambda"])
        if kind == "rotation":
            return rotation_channel(spec["axis"], spec["angle"])
        if kind == "amplitude_damping":
            return amplitude_damping(spec["gamma"])
        if kind == "ptm":
            return Superop(spec["matrix"])
        if kind == "compose":
            acc = identity()
            for sub in spec["channels"]:
                acc = acc @ channel_from_dict(sub)
            return acc
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad channel description {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown channel kind {spec.get('kind')!r}")


def model_from_dict(spec: dict) -> NoiseModel:
    """Parse a noise model from its JSON form (``type`` discriminator)."""
    if not isinstance(spec, dict):
        raise ConfigError("noise model must be a JSON object")
    kind = spec.get("type")
    try:
        if kind == "gate_independent_lr":
            return GateIndependentLR(channel_from_dict(spec.get("L", {"kind": "identity"})),
                                     channel_from_dict(spec.get("R", {"kind": "identity"})))
        if kind == "pauli_lr":
            return PauliLR(tuple(spec["l"]), tuple(spec["s"]))
        if kind == "per_gate_unitary":
            return PerGateUnitary(spec["axes"], spec["coeffs"], spec.get("theta", 1.0))
        if kind == "proctor":
            decomp = spec.get("decomposition")
            if decomp is not None:
                decomp = tuple(parse_word(w) for w in decomp)
            return ProctorPrimitive(float(spec["theta"]), tuple(spec.get("axis", (0, 0, 1))), decomp)
        if kind == "custom":
            return Custom(tuple(Superop(m) for m in spec["gates"]))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad noise model {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown noise model type {kind!r}")
