"""Randomized-benchmarking decay rates versus average gate-set fidelity for qubit Clifford gates."""

__version__ = "0.1.0"

from .analytic import (
    MOperator,
    SpectralReport,
    analyze_model,
    build_M,
    decay_rate,
    eigen_terms,
    fig1_sweep,
    infidelity_bound,
    lgr_geometry,
    M_ideal,
    nonunital_spectrum,
    q_band,
    q_from_M,
    same_p_different_q,
    spectral_report,
)
from .channels import (
    Custom,
    GateIndependentLR,
    PauliLR,
    PerGateUnitary,
    ProctorPrimitive,
    amplitude_damping,
    dephasing,
    depolarizing,
    model_from_dict,
    noisy_gateset,
    pauli_channel,
    rotation_channel,
)
from .clifford import CliffordGroup, clifford_group, clifford_twirl
from .errors import RBFidError
from .metrics import FidelityReport, gateset_report, rb_number, twirl_analytic
from .montecarlo import RBConfig, RBRun, run_rb, sample_sequence, survival, validate_against_spectrum
from .perturbation import PerturbSeries, perturb_series
from .superop import Superop, ptm_from_kraus, ptm_from_unitary

__all__ = [
    "CliffordGroup",
    "Custom",
    "FidelityReport",
    "GateIndependentLR",
    "MOperator",
    "M_ideal",
    "PauliLR",
    "PerGateUnitary",
    "PerturbSeries",
    "ProctorPrimitive",
    "RBConfig",
    "RBFidError",
    "RBRun",
    "SpectralReport",
    "Superop",
    "amplitude_damping",
    "analyze_model",
    "build_M",
    "clifford_group",
    "clifford_twirl",
    "decay_rate",
    "dephasing",
    "depolarizing",
    "eigen_terms",
    "fig1_sweep",
    "gateset_report",
    "infidelity_bound",
    "lgr_geometry",
    "model_from_dict",
    "noisy_gateset",
    "nonunital_spectrum",
    "pauli_channel",
    "perturb_series",
    "ptm_from_kraus",
    "ptm_from_unitary",
    "q_band",
    "q_from_M",
    "rb_number",
    "rotation_channel",
    "run_rb",
    "same_p_different_q",
    "sample_sequence",
    "spectral_report",
    "survival",
    "twirl_analytic",
    "validate_against_spectrum",
]
