"""
Pauli transfer matrix (Liouville) representation of qubit superoperators.

Operators are expanded in the normalized Pauli basis ``{1, X, Y, Z}/sqrt(2)``,
which is orthonormal under the Hilbert-Schmidt inner product and has the
identity as its zeroth element. A superoperator ``E`` is stored as the real
``d^2 x d^2`` matrix with entries ``E[a, b] = tr(O_a E(O_b))``. For a
trace-preserving map the first row is ``(1, 0, ..., 0)``; the first column
below it is the translation vector ``t`` and the lower-right ``D x D`` block
(``D = d^2 - 1``) is the unital part.

Vectorization stacks columns, so that ``vec(E F G) = kron(G.T, E) @ vec(F)``.
"""
from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatch, NotTracePreserving, UnsupportedDimension

SUPPORTED_DIMS = (2,)

TOL_EXACT = 1e-12
TOL_KRAUS = 1e-10

_PAULIS = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


class OperatorBasis(NamedTuple):
    """Hermitian orthonormal operator basis whose first element is 1/sqrt(d)."""

    d: int
    elements: np.ndarray  # shape (d**2, d, d)

    @property
    def D(self) -> int:
        return self.d**2 - 1


def pauli_basis(d: int = 2) -> OperatorBasis:
    if d not in SUPPORTED_DIMS:
        raise UnsupportedDimension(f"only d=2 is supported, got d={d}")
    elements = np.array(_PAULIS) / np.sqrt(2)
    elements.flags.writeable = False
    return OperatorBasis(d, elements)


PAULI_BASIS = pauli_basis()


class Superop:
    """Immutable real transfer matrix of a superoperator.

    Compose with ``@`` (``(A @ B)(rho) = A(B(rho))``); ``adjoint`` is the
    transpose, which for a real transfer matrix is the Hilbert-Schmidt adjoint.
    """

    __slots__ = ("_mat",)

    def __init__(self, mat):
        arr = np.asarray(mat)
        if np.iscomplexobj(arr):
            if np.max(np.abs(arr.imag), initial=0.0) > TOL_EXACT:
                raise ValueError("transfer matrix of a Hermiticity-preserving map must be real")
            arr = arr.real
        arr = np.array(arr, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionMismatch(f"transfer matrix must be square, got shape {arr.shape}")
        d = int(round(np.sqrt(arr.shape[0])))
        if d * d != arr.shape[0]:
            raise DimensionMismatch(f"matrix size {arr.shape[0]} is not a square number")
        if d not in SUPPORTED_DIMS:
            raise UnsupportedDimension(f"only d=2 is supported, got d={d}")
        arr.flags.writeable = False
        self._mat = arr

    @property
    def mat(self) -> np.ndarray:
        return self._mat

    @property
    def d(self) -> int:
        return int(round(np.sqrt(self._mat.shape[0])))

    @property
    def D(self) -> int:
        return self._mat.shape[0] - 1

    @property
    def is_tp(self) -> bool:
        first = np.zeros(self._mat.shape[0])
        first[0] = 1.0
        return bool(np.allclose(self._mat[0], first, rtol=0, atol=TOL_EXACT))

    @property
    def is_unital(self) -> bool:
        return bool(np.max(np.abs(self._mat[1:, 0]), initial=0.0) <= TOL_EXACT)

    @property
    def unital(self) -> np.ndarray:
        """The lower-right ``D x D`` block."""
        return self._mat[1:, 1:]

    @property
    def translation(self) -> np.ndarray:
        return self._mat[1:, 0]

    def adjoint(self) -> "Superop":
        return adjoint(self)

    def __matmul__(self, other: "Superop") -> "Superop":
        if not isinstance(other, Superop):
            return NotImplemented
        return compose(self, other)

    def __repr__(self) -> str:
        return f"Superop(\n{np.array2string(self._mat, precision=6, suppress_small=True)})"


class UnitalDecomp(NamedTuple):
    t: np.ndarray
    Eu: np.ndarray

    def reassemble(self) -> Superop:
        D = len(self.t)
        mat = np.zeros((D + 1, D + 1))
        mat[0, 0] = 1.0
        mat[1:, 0] = self.t
        mat[1:, 1:] = self.Eu
        return Superop(mat)


def identity(d: int = 2) -> Superop:
    return Superop(np.eye(d * d))


def ptm_from_kraus(kraus: Sequence[np.ndarray], basis: OperatorBasis = PAULI_BASIS) -> Superop:
    """Transfer matrix ``E[a, b] = sum_i tr(O_a K_i O_b K_i^dag)`` of a Kraus map.

    The first row is set to exactly ``(1, 0, ..., 0)`` once completeness
    has been checked.

    Raises
    ------
    NotTracePreserving
        If ``sum_i K_i^dag K_i`` differs from the identity by more than 1e-10.
    """
    ks = np.asarray(kraus, dtype=complex)
    if ks.ndim == 2:
        ks = ks[None]
    if ks.shape[0] == 0:
        raise ValueError("empty Kraus list")
    if ks.shape[1:] != (basis.d, basis.d):
        raise DimensionMismatch(f"Kraus operators must be {basis.d}x{basis.d}")
    completeness = np.einsum("kji,kjl->il", ks.conj(), ks)
    if not np.allclose(completeness, np.eye(basis.d), rtol=0, atol=TOL_KRAUS):
        raise NotTracePreserving("Kraus operators do not satisfy sum K^dag K = 1")
    O = basis.elements
    # E_ab = sum_k tr(O_a K O_b K^dag)
    mat = np.einsum("aij,kjl,blm,kim->ab", O, ks, O, ks.conj(), optimize=True).real
    # completeness was verified above, so the first row is (1, 0, ..., 0) up to roundoff
    mat[0] = 0.0
    mat[0, 0] = 1.0
    return Superop(mat)


def ptm_from_unitary(U: np.ndarray) -> Superop:
    return ptm_from_kraus([U])


def unital_decomp(E: Superop) -> UnitalDecomp:
    if not E.is_tp:
        raise NotTracePreserving("first row of the transfer matrix is not (1, 0, ..., 0)")
    return UnitalDecomp(E.translation.copy(), E.unital.copy())


def compose(A: Superop, B: Superop) -> Superop:
    """``A`` after ``B``."""
    if A.mat.shape != B.mat.shape:
        raise DimensionMismatch(f"cannot compose {A.mat.shape} with {B.mat.shape}")
    return Superop(A.mat @ B.mat)


def adjoint(A: Superop) -> Superop:
    return Superop(A.mat.T)


def vec(E) -> np.ndarray:
    """Column-stacked vector of a transfer matrix or of any square block."""
    mat = E.mat if isinstance(E, Superop) else np.asarray(E)
    return mat.reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vec` for square matrices."""
    v = np.asarray(v)
    n = int(round(np.sqrt(v.size)))
    if n * n != v.size:
        raise DimensionMismatch(f"vector length {v.size} is not a square number")
    return v.reshape((n, n), order="F")


def B0(d: int = 2) -> np.ndarray:
    """Projector onto the identity component, as a ``d^2 x d^2`` matrix."""
    m = np.zeros((d * d, d * d))
    m[0, 0] = 1.0
    return m


def B1(d: int = 2) -> np.ndarray:
    """Normalized identity on the unital sector, as a ``d^2 x d^2`` matrix."""
    D = d * d - 1
    m = np.zeros((d * d, d * d))
    m[1:, 1:] = np.eye(D) / np.sqrt(D)
    return m


def ket0(d: int = 2) -> np.ndarray:
    return vec(B0(d))


def ket1(d: int = 2) -> np.ndarray:
    return vec(B1(d))


def ket1_unital(d: int = 2) -> np.ndarray:
    """``|1)`` restricted to the ``D^2``-dimensional unital sector."""
    D = d * d - 1
    return vec(np.eye(D) / np.sqrt(D))


def embed_unital(v_u: np.ndarray, d: int = 2) -> np.ndarray:
    """Place a vectorized ``D x D`` block into the full ``d^4`` space."""
    D = d * d - 1
    full = np.zeros((d * d, d * d))
    full[1:, 1:] = unvec(v_u)
    if full[1:, 1:].shape != (D, D):
        raise DimensionMismatch("unital vector has the wrong length")
    return vec(full)


def choi_matrix(E: Superop, basis: OperatorBasis = PAULI_BASIS) -> np.ndarray:
    """Choi matrix ``sum_ij |i><j| (x) E(|i><j|)`` (trace ``d`` for TP maps)."""
    d = basis.d
    O = basis.elements
    choi = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[i, j] = 1.0
            coords = np.einsum("aij,ji->a", O, unit)  # tr(O_a |i><j|)
            out = np.einsum("a,aij->ij", E.mat @ coords, O)
            choi += np.kron(unit, out)
    return choi


def is_cptp(E: Superop, tol: float = TOL_KRAUS) -> bool:
    """True when the Choi matrix is PSD within ``tol`` and ``E`` is TP."""
    try:
        choi = choi_matrix(E)
    except Exception:
        return False
    if not np.allclose(choi, choi.conj().T, rtol=0, atol=tol):
        return False
    first = np.zeros(E.mat.shape[0])
    first[0] = 1.0
    if not np.allclose(E.mat[0], first, rtol=0, atol=tol):
        return False
    return bool(np.linalg.eigvalsh(choi).min() >= -tol)


def random_unitary(rng: np.random.Generator, d: int = 2) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_kraus(rng: np.random.Generator, rank: int = 2, d: int = 2) -> np.ndarray:
    """Kraus operators of a random channel from a random Stinespring isometry."""
    z = rng.standard_normal((rank * d, d)) + 1j * rng.standard_normal((rank * d, d))
    q, _ = np.linalg.qr(z)
    return q.reshape(rank, d, d)


def random_cptp(rng: np.random.Generator, rank: int = 2) -> Superop:
    return ptm_from_kraus(random_kraus(rng, rank))
