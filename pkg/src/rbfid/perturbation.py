"""
Small-angle expansion of the RB decay rate for coherent (unitary) noise.

With ``M_u(theta) = sum_n theta^n M_n`` and ``M_0 = |1)(1|``, the dominant
eigenvalue expands as ``p = 1 + sum_n p_n theta^n``. The closed forms used
here assume the lower orders vanish:

    p_1 = (1|M1|1)
    p_2 = (1|M1^2|1) + (1|M2|1)                                    if p_1 = 0
    p_3 = (1|M1^3|1) + (1|M3|1) + (1|M1 M2|1) + (1|M2 M1|1)         if p_1 = p_2 = 0
    p_4 = (1|M1^4|1) + (1|M2^2|1) + (1|M4|1) + (1|M1 M3 + M3 M1|1)
          + (1|M1^2 M2 + M2 M1^2 + M1 M2 M1|1)                      if p_1 = p_2 = p_3 = 0

A coefficient whose precondition fails is not reported.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .analytic import build_M
from .channels import PerGateUnitary, ProctorPrimitive, noisy_gateset
from .clifford import CliffordGroup, clifford_group
from .errors import FormulaPreconditionViolated, TaylorIllConditioned
from .superop import ket1_unital

VANISH_TOL = 1e-9
FD_STEPS = (1e-2, 5e-3)
FD_POINTS = 9


@dataclass
class PerturbSeries:
    coeffs: List[Optional[float]]
    brackets: Dict[str, float]
    valid_to: int
    method: str = "exact"
    taylor: Optional[np.ndarray] = field(default=None, repr=False)

    def p_at(self, theta: float) -> float:
        """Truncated series ``1 + sum_{n <= valid_to} p_n theta^n``."""
        return 1.0 + sum(c * theta ** (n + 1) for n, c in enumerate(self.coeffs[: self.valid_to]))

    def to_dict(self) -> dict:
        return {"coeffs": self.coeffs, "brackets": self.brackets,
                "valid_to": self.valid_to, "method": self.method}


def exact_taylor(model, max_order: int, group: CliffordGroup) -> np.ndarray:
    """Taylor coefficients ``M_0 .. M_max_order`` from exact power-series products."""
    series = model.unital_series(group, max_order)
    Gu = group.mats[:, 1:, 1:]
    D = Gu.shape[-1]
    return np.einsum("kij,knab->niajb", Gu, series).reshape(max_order + 1, D * D, D * D) / len(group)


def _stencil_weights(order: int, points: int = FD_POINTS) -> np.ndarray:
    """Central finite-difference weights for the ``order``-th derivative at unit spacing."""
    half = points // 2
    x = np.arange(-half, half + 1, dtype=float)
    A = np.vander(x, points, increasing=True).T
    rhs = np.zeros(points)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(A, rhs)


def _stencil_accuracy(order: int, points: int = FD_POINTS) -> int:
    return 2 * ((points - order + 1) // 2)


def fd_taylor(f: Callable[[float], np.ndarray], max_order: int,
              steps: Sequence[float] = FD_STEPS, points: int = FD_POINTS,
              rtol: float = 1e-3) -> np.ndarray:
    """Taylor coefficients of a matrix function from central differences.

    Each coefficient is estimated at two step sizes and combined by one
    Richardson step.

    Raises
    ------
    TaylorIllConditioned
        If the Richardson correction exceeds ``rtol`` (relative to the
        coefficient scale), meaning the steps are outside the asymptotic regime.
    """
    h1, h2 = steps
    half = points // 2
    samples = {}
    for h in (h1, h2):
        samples[h] = np.array([f(j * h) for j in range(-half, half + 1)])
    f0 = samples[h1][half]
    out = [f0]
    for n in range(1, max_order + 1):
        w = _stencil_weights(n, points)
        est = [np.tensordot(w, samples[h], axes=1) / h**n / math.factorial(n) for h in (h1, h2)]
        ratio = (h1 / h2) ** _stencil_accuracy(n, points)
        rich = (ratio * est[1] - est[0]) / (ratio - 1)
        scale = max(1.0, float(np.max(np.abs(rich))))
        if np.max(np.abs(rich - est[1])) > rtol * scale:
            raise TaylorIllConditioned(f"order-{n} coefficient unstable under step refinement")
        out.append(rich)
    return np.array(out)


def brackets_from_taylor(Ms: np.ndarray) -> Dict[str, float]:
    one = ket1_unital()
    M = {n: Ms[n] for n in range(len(Ms))}

    def b(*idx):
        v = one
        for i in reversed(idx):
            v = M[i] @ v
        return float(one @ v)

    out = {}
    top = len(Ms) - 1
    if top >= 1:
        out["(1|M1|1)"] = b(1)
    if top >= 2:
        out["(1|M1^2|1)"] = b(1, 1)
        out["(1|M2|1)"] = b(2)
    if top >= 3:
        out["(1|M1^3|1)"] = b(1, 1, 1)
        out["(1|M1 M2|1)"] = b(1, 2)
        out["(1|M2 M1|1)"] = b(2, 1)
        out["(1|M3|1)"] = b(3)
    if top >= 4:
        out["(1|M1^4|1)"] = b(1, 1, 1, 1)
        out["(1|M2^2|1)"] = b(2, 2)
        out["(1|M4|1)"] = b(4)
        out["(1|M1 M3 + M3 M1|1)"] = b(1, 3) + b(3, 1)
        out["(1|M1^2 M2 + M2 M1^2 + M1 M2 M1|1)"] = b(1, 1, 2) + b(2, 1, 1) + b(1, 2, 1)
    return out


def _closed_forms(br: Dict[str, float], max_order: int):
    formulas = [
        lambda: br["(1|M1|1)"],
        lambda: br["(1|M1^2|1)"] + br["(1|M2|1)"],
        lambda: br["(1|M1^3|1)"] + br["(1|M3|1)"] + br["(1|M1 M2|1)"] + br["(1|M2 M1|1)"],
        lambda: (br["(1|M1^4|1)"] + br["(1|M2^2|1)"] + br["(1|M4|1)"]
                 + br["(1|M1 M3 + M3 M1|1)"] + br["(1|M1^2 M2 + M2 M1^2 + M1 M2 M1|1)"]),
    ]
    coeffs: List[Optional[float]] = [None] * max_order
    valid_to = 0
    for n in range(1, max_order + 1):
        coeffs[n - 1] = formulas[n - 1]()
        valid_to = n
        if abs(coeffs[n - 1]) >= VANISH_TOL:
            break
    return coeffs, valid_to


def eigenvalue_series(Ms: np.ndarray) -> np.ndarray:
    """General Rayleigh-Schrodinger coefficients ``p_0 .. p_N`` of the eigenvalue branched from 1.

    Valid whenever ``M_0 = |1)(1|``; no vanishing assumptions. Used to
    cross-check the closed forms.
    """
    one = ket1_unital()
    Q = np.eye(len(one)) - np.outer(one, one)
    vecs = [one]
    p = [1.0]
    for n in range(1, len(Ms)):
        acc = sum(Ms[k] @ vecs[n - k] for k in range(1, n + 1))
        p.append(float(one @ acc))
        vecs.append(Q @ acc - sum(p[k] * vecs[n - k] for k in range(1, n)))
    return np.array(p)


def perturb_series(model: PerGateUnitary | ProctorPrimitive, max_order: int = 4,
                   method: str = "exact", strict: bool = False,
                   group: CliffordGroup | None = None,
                   steps: Sequence[float] = FD_STEPS) -> PerturbSeries:
    """Series coefficients ``p_1 .. p_max_order`` of the RB decay rate in theta.

    ``method="exact"`` multiplies truncated power series of the rotation
    blocks; ``method="fd"`` differentiates ``M_u(theta)`` numerically.

    Raises
    ------
    FormulaPreconditionViolated
        With ``strict=True``, if some order below ``max_order`` is nonzero.
    """
    if not 1 <= max_order <= 4:
        raise ValueError("closed forms exist for orders 1 to 4")
    group = group or clifford_group()
    if method == "exact":
        Ms = exact_taylor(model, max_order, group)
    elif method == "fd":
        def f(theta):
            return build_M(group, noisy_gateset(model.with_theta(theta), group, check=False)).unital
        Ms = fd_taylor(f, max_order, steps)
    else:
        raise ValueError(f"unknown method {method!r}")
    br = brackets_from_taylor(Ms)
    coeffs, valid_to = _closed_forms(br, max_order)
    if strict and valid_to < max_order:
        raise FormulaPreconditionViolated(
            f"p_{valid_to} = {coeffs[valid_to - 1]:.3e} is nonzero; p_{valid_to + 1} formula does not apply")
    return PerturbSeries(coeffs, br, valid_to, method, Ms)
