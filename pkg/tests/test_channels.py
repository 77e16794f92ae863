import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rbfid.channels import (
    PRIMITIVES,
    Custom,
    GateIndependentLR,
    PauliLR,
    PerGateUnitary,
    ProctorPrimitive,
    amplitude_damping,
    channel_from_dict,
    decomposition_gate,
    dephasing,
    depolarizing,
    effective_angles,
    effective_right_unitary_angle,
    index_decomposition,
    load_xy_compilation,
    model_from_dict,
    noisy_gateset,
    pauli_channel,
    rotation_block,
    rotation_channel,
    rotation_series,
    word_product,
)
from rbfid.errors import (
    ConfigError,
    DecompositionGateFailed,
    InvalidProbability,
    ModelTableIncomplete,
    NotCPTP,
    NotUnitaryResidual,
    OutOfRange,
    ZeroAxis,
)
from rbfid.superop import Superop, identity, is_cptp, ptm_from_unitary
from scipy.linalg import expm

from conftest import PAULIS, amp_damp_kraus, pauli_kraus, ptm_oracle

probs = st.tuples(*[st.floats(0, 1 / 3) for _ in range(3)])
axes = st.tuples(*[st.floats(-1, 1) for _ in range(3)]).filter(lambda v: np.linalg.norm(v) > 1e-3)
angles = st.floats(-math.pi, math.pi)


@settings(max_examples=50, deadline=None)
@given(probs)
def test_pauli_channel_against_kraus(l):
    E = pauli_channel(l)
    assert np.allclose(E.mat, ptm_oracle(pauli_kraus(l)), atol=1e-14)
    assert E.is_unital and is_cptp(E)


def test_pauli_special_cases():
    assert np.array_equal(pauli_channel((0, 0, 0)).mat, np.eye(4))
    lam = 0.07
    assert np.allclose(dephasing(lam).mat, np.diag([1, 1 - 2 * lam, 1 - 2 * lam, 1]))
    assert np.allclose(depolarizing(lam).unital, (1 - 4 * lam) * np.eye(3))
    with pytest.raises(InvalidProbability):
        pauli_channel((0.5, 0.4, 0.2))
    with pytest.raises(InvalidProbability):
        pauli_channel((-0.1, 0, 0))


@settings(max_examples=30, deadline=None)
@given(probs, probs)
def test_pauli_channels_commute(a, b):
    A, B = pauli_channel(a), pauli_channel(b)
    assert np.allclose((A @ B).mat, (B @ A).mat, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(axes, angles)
def test_rotation_matches_unitary(axis, theta):
    m = np.asarray(axis) / np.linalg.norm(axis)
    U = expm(-0.5j * theta * sum(c * p for c, p in zip(m, PAULIS[1:])))
    R = rotation_channel(axis, theta)
    assert np.allclose(R.mat, ptm_from_unitary(U).mat, atol=1e-12)
    Ru = R.unital
    assert np.allclose(Ru.T @ Ru, np.eye(3), atol=1e-12)
    assert np.isclose(np.linalg.det(Ru), 1.0)
    assert np.isclose(np.trace(Ru), 1 + 2 * math.cos(theta))
    assert np.allclose((R @ rotation_channel(axis, -theta)).mat, np.eye(4), atol=1e-12)


def test_rotation_quarter_turn():
    Ru = rotation_channel((0, 0, 1), math.pi / 2).unital
    assert np.allclose(Ru @ [1, 0, 0], [0, 1, 0])
    assert np.allclose(Ru @ [0, 1, 0], [-1, 0, 0])
    assert np.allclose(Ru @ [0, 0, 1], [0, 0, 1])
    assert np.array_equal(rotation_channel((0, 0, 1), 0.0).mat, np.eye(4))
    with pytest.raises(ZeroAxis):
        rotation_channel((0, 0, 0), 0.1)


def test_amplitude_damping():
    for gamma in (0.0, 0.1, 0.5, 1.0):
        E = amplitude_damping(gamma)
        assert np.allclose(E.mat, ptm_oracle(amp_damp_kraus(gamma)), atol=1e-14)
        assert is_cptp(E)
    assert np.allclose(amplitude_damping(0.0).mat, np.eye(4))
    full = amplitude_damping(1.0)
    assert np.allclose(full.unital, 0) and np.allclose(full.translation, [0, 0, 1])
    with pytest.raises(OutOfRange):
        amplitude_damping(1.5)


def test_rotation_series_matches_block():
    axis, theta = (0.3, -0.5, 0.8), 0.03
    coeffs = rotation_series(axis, 1.7, 12)
    approx = sum(c * theta**n for n, c in enumerate(coeffs))
    assert np.allclose(approx, rotation_block(axis, 1.7 * theta), atol=1e-15)


def test_compilation_table(group):
    words = load_xy_compilation()
    assert len(words) == 24
    table = index_decomposition(words, group)
    for k, w in enumerate(table):
        assert np.array_equal(np.rint(word_product(w)), group[k].mat)
    assert np.mean([len(w) for w in words]) == 3.5
    assert table[0] == ()


def test_compilation_table_rejects_bad_tables(group):
    words = load_xy_compilation()
    with pytest.raises(ModelTableIncomplete):
        index_decomposition(words[:-1], group)
    with pytest.raises(ModelTableIncomplete):
        index_decomposition(words + [("X", "X", "X", "X")], group)
    with pytest.raises(ModelTableIncomplete):
        ProctorPrimitive(0.1, decomposition=(("X",),) * 24).table(group)


def test_identity_model_is_ideal(group):
    gates = noisy_gateset(GateIndependentLR(identity(), identity()), group)
    assert all(np.array_equal(g.mat, h.mat) for g, h in zip(gates, group))


def test_pauli_lr_matches_lr(group):
    l, s = (0.01, 0.02, 0.03), (0.04, 0.0, 0.01)
    a = noisy_gateset(PauliLR(l, s), group)
    b = noisy_gateset(GateIndependentLR(pauli_channel(l), pauli_channel(s)), group)
    assert all(np.array_equal(x.mat, y.mat) for x, y in zip(a, b))


def test_per_gate_unitary_is_right_noise(group, rng):
    model = PerGateUnitary.random(rng, theta=0.2)
    gates = noisy_gateset(model, group)
    for g, n, m, a in zip(group, gates, model.axes, model.angles()):
        assert np.allclose(n.mat, g.mat @ rotation_channel(m, a).mat, atol=1e-14)
    assert np.allclose(effective_angles(model, group), np.abs(model.angles()), atol=1e-7)


def test_per_gate_table_must_be_complete():
    with pytest.raises(ModelTableIncomplete):
        PerGateUnitary(np.ones((23, 3)), np.ones(23))


def test_proctor_gates_follow_words(group):
    theta = 0.07
    model = ProctorPrimitive(theta)
    gates = noisy_gateset(model, group)
    noise = rotation_channel((0, 0, 1), theta).mat
    for k, word in enumerate(model.table(group)):
        acc = np.eye(4)
        for name in word:
            acc = acc @ PRIMITIVES[name].mat @ noise
        assert np.allclose(gates[k].mat, acc)
    assert np.array_equal(gates[0].mat, np.eye(4))


def test_proctor_series_matches_gates(group):
    model = ProctorPrimitive(0.0)
    theta = 0.02
    series = model.unital_series(group, 10)
    approx = np.einsum("knij,n->kij", series, theta ** np.arange(11))
    exact = np.array([g.unital for g in noisy_gateset(model.with_theta(theta), group)])
    assert np.allclose(approx, exact, atol=1e-14)


def test_effective_angle():
    G = rotation_channel((1, 0, 0), math.pi / 2)
    assert effective_right_unitary_angle(G, G) == pytest.approx(0.0, abs=1e-7)
    assert effective_right_unitary_angle(G, G @ rotation_channel((0, 0, 1), 0.3)) == pytest.approx(0.3)
    with pytest.raises(NotUnitaryResidual):
        effective_right_unitary_angle(G, G @ depolarizing(0.01))


def test_proctor_decomposition_gate(group):
    ratio = decomposition_gate(ProctorPrimitive(0.0), group=group)
    assert abs(ratio / 1.5 - 1) < 1e-3
    angles = effective_angles(ProctorPrimitive(0.01), group)
    assert np.mean(angles**2) == pytest.approx(1.5e-4, rel=1e-3)


def test_decomposition_gate_catches_other_noise(group):
    # noise about x instead of z gives <theta_k^2> = 5 theta^2 with this table
    with pytest.raises(DecompositionGateFailed):
        decomposition_gate(ProctorPrimitive(0.0, axis=(1, 0, 0)), group=group)


def test_noisy_gateset_rejects_non_cp(group):
    bad = Superop(np.diag([1, 1.2, 1, 1]))
    with pytest.raises(NotCPTP):
        noisy_gateset(GateIndependentLR(identity(), bad), group)
    with pytest.raises(ModelTableIncomplete):
        noisy_gateset(Custom(tuple(group)[:10]), group)


def test_model_from_dict_variants(group):
    specs = [
        {"type": "gate_independent_lr", "L": {"kind": "pauli", "l": [0.01, 0, 0]},
         "R": {"kind": "compose", "channels": [{"kind": "amplitude_damping", "gamma": 0.1},
                                               {"kind": "rotation", "axis": [0, 1, 0], "angle": 0.1}]}},
        {"type": "pauli_lr", "l": [0, 0, 0.01], "s": [0.01, 0, 0]},
        {"type": "per_gate_unitary", "axes": [[0, 0, 1]] * 24, "coeffs": [1.0] * 24, "theta": 0.1},
        {"type": "proctor", "theta": 0.1, "decomposition": [" ".join(w) or "-" for w in ProctorPrimitive(0).table(group)]},
        {"type": "custom", "gates": [g.mat.tolist() for g in group]},
    ]
    for spec in specs:
        gates = noisy_gateset(model_from_dict(spec), group)
        assert len(gates) == 24
    with pytest.raises(ConfigError):
        model_from_dict({"type": "nope"})
    with pytest.raises(ConfigError):
        model_from_dict({"type": "pauli_lr", "l": [0, 0, 0]})
    with pytest.raises(ConfigError):
        channel_from_dict({"kind": "mystery"})
    with pytest.raises(ConfigError):
        model_from_dict({"type": "proctor", "theta": 0.1, "decomposition": ["Q"] * 24})
