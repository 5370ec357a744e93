"""Dense complex operator algebra.

Matrices are plain ``numpy`` complex arrays. The helpers here validate the
semantic tags (Hermitian, projector, isometry) against a ``ToleranceConfig``
and build the objects every other module works with: tensor products,
commutators, range projectors and clustered spectral decompositions.

Tensor index convention: the basis pair ``(i, k)`` of ``A (x) B`` maps to the
flat index ``i * dim(B) + k``, which is what ``numpy.kron`` produces.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from waylab.errors import DimensionMismatchError, NotHermitianError, NotIsometryError

MAX_FACTOR_DIM = 64


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical thresholds used by every check.

    All defects are Frobenius norms. ``tol_spectral`` is relative to the
    spectral radius when clustering eigenvalues.
    """

    tol_hermitian: float = 1e-10
    tol_projector: float = 1e-10
    tol_isometry: float = 1e-10
    tol_spectral: float = 1e-9
    tol_defect: float = 1e-8

    def __post_init__(self):
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{field.name} must be a positive finite number, got {value!r}")

    def replace(self, **overrides: float) -> "ToleranceConfig":
        return dataclasses.replace(self, **overrides)


DEFAULT_TOL = ToleranceConfig()


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a finite 2-d complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2 or m.size == 0:
        raise DimensionMismatchError(f"{name} must be a nonempty 2-d array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def as_square(a, name: str = "matrix") -> np.ndarray:
    m = as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"{name} must be square, got shape {m.shape}")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def frobenius(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def operator_norm(a: np.ndarray) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(a, 2))


def hermitian_defect(a: np.ndarray) -> float:
    """``||A - A^dag||_F`` relative to ``max(1, ||A||_F)``."""
    return frobenius(a - dagger(a)) / max(1.0, frobenius(a))


def is_hermitian(a, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    m = as_square(a)
    return hermitian_defect(m) <= tol.tol_hermitian


def as_hermitian(a, tol: ToleranceConfig = DEFAULT_TOL, name: str = "operator") -> np.ndarray:
    """Validate Hermiticity and return the exactly symmetrized matrix."""
    m = as_square(a, name)
    defect = hermitian_defect(m)
    if defect > tol.tol_hermitian:
        raise NotHermitianError(f"{name} is not Hermitian (relative defect {defect:.3g})")
    return (m + dagger(m)) / 2


def projector_defect(p: np.ndarray) -> float:
    return frobenius(p @ p - p)


def is_projector(p, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    m = as_square(p)
    return hermitian_defect(m) <= tol.tol_hermitian and projector_defect(m) <= tol.tol_projector


def isometry_defect(u: np.ndarray) -> float:
    """``||U^dag U - I||_F``."""
    return frobenius(dagger(u) @ u - np.eye(u.shape[1]))


def as_isometry(u, tol: ToleranceConfig = DEFAULT_TOL, name: str = "isometry") -> np.ndarray:
    m = as_matrix(u, name)
    if m.shape[0] < m.shape[1]:
        raise NotIsometryError(f"{name} has more columns than rows: {m.shape}")
    defect = isometry_defect(m)
    if defect > tol.tol_isometry:
        raise NotIsometryError(f"{name} is not an isometry (||U^dag U - I||_F = {defect:.3g})")
    return m


def _same_square(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[0] != a.shape[1] or a.shape != b.shape:
        raise DimensionMismatchError(f"expected square matrices of equal size, got {a.shape} and {b.shape}")


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product ``a (x) b``; pair ``(i, k)`` goes to ``i * dim(b) + k``."""
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


def commutator(a, b) -> np.ndarray:
    """Return ``ab - ba``."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    _same_square(a, b)
    return a @ b - b @ a


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Distinct eigenvalues (ascending) with their eigenprojectors.

    ``bases[k]`` holds orthonormal eigenvectors spanning ``projectors[k]`` as
    columns, so ``multiplicities[k] == bases[k].shape[1]``.
    """

    eigenvalues: tuple[float, ...]
    projectors: tuple[np.ndarray, ...]
    bases: tuple[np.ndarray, ...]

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(b.shape[1] for b in self.bases)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    def reconstruct(self) -> np.ndarray:
        return sum(lam * q for lam, q in zip(self.eigenvalues, self.projectors))


def _canonical_phase(vectors: np.ndarray) -> np.ndarray:
    # Make the largest-magnitude entry of each column real and positive.
    idx = np.argmax(np.abs(vectors), axis=0)
    pivots = vectors[idx, np.arange(vectors.shape[1])]
    return vectors * (np.abs(pivots) / pivots)


def cluster_eigenvalues(values: Sequence[float], tol_spectral: float) -> list[list[int]]:
    """Group ascending eigenvalues whose consecutive gap is within tolerance.

    The threshold is ``tol_spectral * max(1, spectral radius)``. Returns index
    groups in ascending order.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return []
    threshold = tol_spectral * max(1.0, float(np.max(np.abs(values))))
    groups = [[0]]
    for i in range(1, values.size):
        if values[i] - values[i - 1] <= threshold:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def spectral_decompose(h, tol: ToleranceConfig = DEFAULT_TOL) -> SpectralDecomposition:
    """Spectral decomposition of a Hermitian operator with degeneracy clustering.

    Raises:
        NotHermitianError: if ``h`` is not Hermitian within ``tol_hermitian``.
    """
    m = as_hermitian(h, tol, "h")
    raw, vecs = np.linalg.eigh(m)
    eigenvalues, projectors, bases = [], [], []
    for group in cluster_eigenvalues(raw, tol.tol_spectral):
        block = _canonical_phase(vecs[:, group])
        eigenvalues.append(float(np.mean(raw[group])))
        bases.append(block)
        projectors.append(block @ dagger(block))
    return SpectralDecomposition(tuple(eigenvalues), tuple(projectors), tuple(bases))


def range_projector(u, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Projector ``U U^dag`` onto the range of an isometry."""
    m = as_isometry(u, tol, "u")
    return m @ dagger(m)


def is_orthogonal_resolution(ps: Sequence, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """True iff ``ps`` are projectors with ``P_i P_j = 0`` (i != j) summing to ``I``."""
    mats = [as_square(p, f"ps[{i}]") for i, p in enumerate(ps)]
    if not mats:
        return False
    for m in mats[1:]:
        _same_square(mats[0], m)
    if not all(is_projector(m, tol) for m in mats):
        return False
    for i, a in enumerate(mats):
        for b in mats[i + 1:]:
            if frobenius(a @ b) > tol.tol_projector:
                return False
    return frobenius(sum(mats) - np.eye(mats[0].shape[0])) <= tol.tol_projector


def check_factor_dim(dim: int, max_dim: int = MAX_FACTOR_DIM, name: str = "factor space") -> None:
    if dim > max_dim:
        raise DimensionMismatchError(f"{name} dimension {dim} exceeds the limit {max_dim}")
